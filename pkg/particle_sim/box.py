"""
Centre domains of the particle simulation and wall handling.

Coordinates are nondimensional: channel length 1, particle diameter eps,
confined sides eps*h (and eps*m for Rect):

  NC2   x in [-1/2, 1/2],  y in [-eps h/2, eps h/2]
  NC3   x, then y and z in [-eps h/2, eps h/2]
  PP    x and y in [-1/2, 1/2],  z in [-eps h/2, eps h/2]
  Rect  x, then y in [-eps h/2, eps h/2], z in [-eps m/2, eps m/2]

Axis 0 (x) is along the channel and is the only axis that may be periodic.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from coefficients import Case, Geometry
from errors import DomainError


@dataclass(frozen=True)
class ChannelBox:
    """Axis-aligned box available to particle centres."""
    geom: Geometry
    epsilon: float
    periodic: bool = False          # periodic along the channel axis

    def __post_init__(self):
        if not self.epsilon >= 0.0:
            raise DomainError(f"Particle diameter must be >= 0, got eps={self.epsilon}")

    @property
    def dim(self) -> int:
        return self.geom.space_dim

    @cached_property
    def lower(self) -> np.ndarray:
        return -0.5 * self.widths

    @cached_property
    def upper(self) -> np.ndarray:
        return 0.5 * self.widths

    @cached_property
    def widths(self) -> np.ndarray:
        confined = self.epsilon * self.geom.h
        case = self.geom.case
        if case is Case.NC2:
            return np.array([1.0, confined])
        if case is Case.NC3:
            return np.array([1.0, confined, confined])
        if case is Case.PP:
            return np.array([1.0, 1.0, confined])
        return np.array([1.0, confined, self.epsilon * self.geom.m])

    @property
    def volume(self) -> float:
        return float(np.prod(self.widths))

    def contains(self, positions: np.ndarray) -> np.ndarray:
        """Boolean mask of centres inside the closed box (last axis = coordinates)."""
        ok = (positions >= self.lower) & (positions <= self.upper)
        if self.periodic:
            ok[..., 0] = (positions[..., 0] >= self.lower[0]) & (positions[..., 0] < self.upper[0])
        return np.all(ok, axis=-1)

    def minimal_image(self, delta: np.ndarray) -> np.ndarray:
        """Separation vectors with the channel component wrapped when periodic."""
        if self.periodic:
            delta = delta.copy()
            delta[..., 0] -= np.round(delta[..., 0])
        return delta


def _fold(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """
    Specular reflection into [lo, hi], repeated until inside.

    Reflecting repeatedly is the triangle wave of period 2 (hi - lo), which
    is evaluated in one go so excursions of any size cost the same.
    """
    width = hi - lo
    outside = (x < lo) | (x > hi)
    if not outside.any():
        return x
    if width == 0.0:
        return np.where(outside, lo, x)
    u = np.mod(x - lo, 2.0 * width)
    folded = lo + width - np.abs(u - width)
    return np.where(outside, np.clip(folded, lo, hi), x)


def _wrap(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    outside = (x < lo) | (x >= hi)
    if not outside.any():
        return x
    length = hi - lo
    wrapped = lo + np.mod(x - lo, length)
    wrapped = np.where(wrapped >= hi, wrapped - length, wrapped)
    return np.where(outside, wrapped, x)


def reflect_walls(positions: np.ndarray, box: ChannelBox) -> np.ndarray:
    """
    Bring every centre back into the box, in place.

    Walls reflect specularly; a periodic channel axis wraps instead.
    Returns the same array.
    """
    for axis in range(box.dim):
        lo, hi = float(box.lower[axis]), float(box.upper[axis])
        col = positions[..., axis]
        if axis == 0 and box.periodic:
            positions[..., axis] = _wrap(col, lo, hi)
        else:
            positions[..., axis] = _fold(col, lo, hi)
    return positions
