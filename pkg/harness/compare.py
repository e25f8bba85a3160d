"""
Density Comparison

Two profiles along the channel are brought onto the finer of their two
grids by linear interpolation over the shared interval, then

  rel_l2 = ||a - b||_2 / ||b||_2     (trapezoid rule on the common nodes)
  linf   = max |a - b|
  z_k    = (a_k - b_k) / sqrt(se_a^2 + se_b^2)   on the histogram bins

z-scores exist only where at least one side carries standard errors
(Monte Carlo histograms); bins with zero combined error are left out.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.integrate import trapezoid

from effective_pde import DensityField
from errors import DomainError


@dataclass
class Profile:
    """Density samples at x over the interval [lo, hi]."""
    x: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray] = None
    lo: float = -0.5
    hi: float = 0.5
    periodic: bool = False

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.shape != self.values.shape or self.x.ndim != 1:
            raise ValueError(f"Profile needs matching 1D x and values, got {self.x.shape} and {self.values.shape}")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)

    @classmethod
    def from_field(cls, f: DensityField) -> "Profile":
        """Marginal along the channel (2D fields are integrated over y)."""
        g = f.grid
        return cls(g.nodes, f.marginal(), None, g.lo, g.hi, g.periodic)

    @classmethod
    def from_histogram(cls, edges, density, stderr=None, periodic: bool = False) -> "Profile":
        edges = np.asarray(edges, dtype=float)
        return cls(0.5 * (edges[:-1] + edges[1:]), density, stderr,
                   float(edges[0]), float(edges[-1]), periodic)

    def sample(self, x: np.ndarray, values: Optional[np.ndarray] = None) -> np.ndarray:
        v = self.values if values is None else values
        if self.periodic:
            return np.interp(x, self.x, v, period=self.hi - self.lo)
        return np.interp(x, self.x, v)

    def mean(self) -> float:
        return float(trapezoid(self.x * self.values, self.x) / trapezoid(self.values, self.x))

    def variance(self) -> float:
        m = self.mean()
        return float(trapezoid((self.x - m) ** 2 * self.values, self.x) / trapezoid(self.values, self.x))


@dataclass
class ComparisonReport:
    rel_l2: float
    linf: float
    z_scores: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def max_abs_z(self) -> float:
        finite = self.z_scores[np.isfinite(self.z_scores)]
        return float(np.max(np.abs(finite))) if finite.size else 0.0


def _as_profile(obj: Union[Profile, DensityField]) -> Profile:
    if isinstance(obj, Profile):
        return obj
    if isinstance(obj, DensityField):
        return Profile.from_field(obj)
    raise TypeError(f"Cannot compare a {type(obj).__name__}")


def compare_densities(a: Union[Profile, DensityField],
                      b: Union[Profile, DensityField]) -> ComparisonReport:
    """
    Distance of a from b (b is the reference for the relative norm).

    Raises DomainError when the two intervals do not overlap.
    """
    pa, pb = _as_profile(a), _as_profile(b)
    lo, hi = max(pa.lo, pb.lo), min(pa.hi, pb.hi)
    if not hi > lo:
        raise DomainError(f"Disjoint domains [{pa.lo:g}, {pa.hi:g}] and [{pb.lo:g}, {pb.hi:g}]")

    fine = pa if pa.x.size >= pb.x.size else pb
    x = fine.x[(fine.x >= lo) & (fine.x <= hi)]
    if x.size < 2:
        x = np.linspace(lo, hi, 2)
    va, vb = pa.sample(x), pb.sample(x)
    diff = va - vb
    norm_b = float(np.sqrt(trapezoid(vb * vb, x)))
    l2 = float(np.sqrt(trapezoid(diff * diff, x)))
    rel_l2 = l2 / norm_b if norm_b > 0.0 else (0.0 if l2 == 0.0 else float("inf"))
    linf = float(np.max(np.abs(diff)))

    z = np.zeros(0)
    if pa.stderr is not None or pb.stderr is not None:
        # per-bin on the coarser side (the histogram)
        coarse = pb if pa is fine else pa
        xb = coarse.x[(coarse.x >= lo) & (coarse.x <= hi)]
        ea = pa.sample(xb, pa.stderr) if pa.stderr is not None else np.zeros(xb.size)
        eb = pb.sample(xb, pb.stderr) if pb.stderr is not None else np.zeros(xb.size)
        se = np.sqrt(ea * ea + eb * eb)
        d = pa.sample(xb) - pb.sample(xb)
        z = np.full(xb.size, np.nan)
        ok = se > 0.0
        z[ok] = d[ok] / se[ok]
    return ComparisonReport(rel_l2=rel_l2, linf=linf, z_scores=z)


def profile_deviation(a: Union[Profile, DensityField], b: Union[Profile, DensityField]) -> float:
    """Largest pointwise gap between a and b as a fraction of the peak of b."""
    peak = float(np.max(np.abs(_as_profile(b).values)))
    if peak == 0.0:
        raise DomainError("Reference profile is identically zero")
    return compare_densities(a, b).linf / peak
