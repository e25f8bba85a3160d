"""
Uniform vertex-centred grids on the effective domain [-1/2, 1/2]^d_e.

  NO_FLUX    M nodes including both ends, dx = 1/(M-1), trapezoid weights
  PERIODIC   M nodes, the right end identified with the left, dx = 1/M

The control volume of node i has measure weights[i]; the solver updates
nodal values as cell averages so that sum(weights * p) is the mass.
"""

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Tuple

import numpy as np

import config as CFG


class BoundaryKind(str, Enum):
    """Boundary treatment at the channel ends."""
    NO_FLUX = "noflux"
    PERIODIC = "periodic"

    @classmethod
    def parse(cls, name) -> "BoundaryKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(
                f"Unknown boundary condition: {name}. Use 'noflux' or 'periodic'.") from None


@dataclass(frozen=True)
class Grid:
    """Tensor grid with the same node set along each of `dim` axes."""
    n_points: int
    bc: BoundaryKind = BoundaryKind.NO_FLUX
    dim: int = 1
    lo: float = -0.5
    hi: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "bc", BoundaryKind.parse(self.bc))
        if int(self.n_points) != self.n_points or self.n_points < CFG.PDE_MIN_GRID_POINTS:
            raise ValueError(
                f"Grid needs an integer number of points >= {CFG.PDE_MIN_GRID_POINTS}, "
                f"got {self.n_points}")
        if self.dim not in (1, 2):
            raise ValueError(f"Grid dimension must be 1 or 2, got {self.dim}")
        if not self.hi > self.lo:
            raise ValueError(f"Empty grid interval [{self.lo}, {self.hi}]")

    @property
    def periodic(self) -> bool:
        return self.bc is BoundaryKind.PERIODIC

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def dx(self) -> float:
        if self.periodic:
            return self.length / self.n_points
        return self.length / (self.n_points - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        """Node coordinates along one axis."""
        return self.lo + self.dx * np.arange(self.n_points)

    @cached_property
    def weights(self) -> np.ndarray:
        """Control-volume measures along one axis (trapezoid rule)."""
        w = np.full(self.n_points, self.dx)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.dx
        return w

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n_points,) * self.dim

    @property
    def size(self) -> int:
        return self.n_points ** self.dim

    def mesh(self) -> Tuple[np.ndarray, ...]:
        """Coordinate arrays of shape `self.shape` (ij indexing)."""
        return tuple(np.meshgrid(*([self.nodes] * self.dim), indexing="ij"))

    def integrate(self, values: np.ndarray) -> float:
        """Trapezoid (periodic: rectangle) rule over the whole domain."""
        values = np.asarray(values, dtype=float)
        if self.dim == 1:
            return float(np.dot(self.weights, values))
        return float(self.weights @ values @ self.weights)

    def refined(self, factor: int = 2) -> "Grid":
        """Grid whose nodes contain these nodes (dx divided by factor)."""
        if self.periodic:
            n = self.n_points * factor
        else:
            n = (self.n_points - 1) * factor + 1
        return Grid(n, self.bc, self.dim, self.lo, self.hi)
