"""
Density fields on a Grid, and the initial data used by the transient runs.
"""

from dataclasses import dataclass

import numpy as np

import config as CFG
from .grid import Grid


@dataclass
class DensityField:
    """Nodal values of the effective density at one time."""
    grid: Grid
    values: np.ndarray      # shape grid.shape
    time: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise ValueError(
                f"Field shape {self.values.shape} does not match grid shape {self.grid.shape}")

    def mass(self) -> float:
        return self.grid.integrate(self.values)

    def marginal(self) -> np.ndarray:
        """Density along the channel (integrated over the second axis in 2D)."""
        if self.grid.dim == 1:
            return self.values
        return self.values @ self.grid.weights

    def mean(self) -> float:
        """Centre of mass along the channel."""
        p = self.marginal()
        return float(np.dot(self.grid.weights, self.grid.nodes * p)) / self.mass()

    def variance(self) -> float:
        """Variance along the channel (direct coordinate, not minimal image)."""
        p = self.marginal()
        x = self.grid.nodes
        mu = self.mean()
        return float(np.dot(self.grid.weights, (x - mu) ** 2 * p)) / self.mass()

    def min(self) -> float:
        return float(self.values.min())

    def copy(self) -> "DensityField":
        return DensityField(self.grid, self.values.copy(), self.time)


def uniform(grid: Grid, mass: float = 1.0) -> DensityField:
    return DensityField(grid, np.full(grid.shape, mass / grid.length ** grid.dim))


def top_hat(grid: Grid, lo: float = -0.5 * CFG.INITIAL_SEGMENT,
            hi: float = 0.5 * CFG.INITIAL_SEGMENT, mass: float = 1.0) -> DensityField:
    """
    Uniform density on lo <= x <= hi, stored as control-volume averages.

    Nodes whose control volume straddles an edge get the covered fraction,
    which smooths each edge over one cell and keeps the mass exact. In 2D the
    profile is uniform across the second axis.
    """
    if not hi > lo:
        raise ValueError(f"Empty initial segment [{lo}, {hi}]")
    x = grid.nodes
    w = grid.weights
    # control volume [x - left, x + right]
    left = np.full_like(x, 0.5 * grid.dx)
    right = np.full_like(x, 0.5 * grid.dx)
    if not grid.periodic:
        left[0] = 0.0
        right[-1] = 0.0
    covered = np.clip(np.minimum(x + right, hi) - np.maximum(x - left, lo), 0.0, None)
    height = mass / ((hi - lo) * grid.length ** (grid.dim - 1))
    profile = height * covered / w
    if grid.dim == 2:
        profile = np.repeat(profile[:, None], grid.n_points, axis=1)
    return DensityField(grid, profile)
