"""
Channel geometries and the coefficient bundle.

A geometry is a cross-section tag plus the confinement parameter h
(channel width available to particle centres, in diameters: H = eps * h).
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from errors import DomainError


class Case(str, Enum):
    """Cross-section of the confining domain."""
    NC2 = "nc2"      # two-dimensional channel, width h
    NC3 = "nc3"      # three-dimensional channel, h x h
    PP = "pp"        # parallel plates, gap h
    RECT = "rect"    # three-dimensional channel, h x m

    @classmethod
    def parse(cls, name: str) -> "Case":
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise DomainError(
                f"Unknown geometry case: {name}. Use 'nc2', 'nc3', 'pp' or 'rect'.") from None


@dataclass(frozen=True)
class Geometry:
    """Case tag with confinement parameter(s)."""
    case: Case
    h: float                 # confinement parameter (diameters)
    m: float = 1.0           # second side, Rect only (diameters)

    def __post_init__(self):
        if not isinstance(self.case, Case):
            object.__setattr__(self, "case", Case.parse(self.case))
        if not math.isfinite(self.h) or self.h < 0.0:
            raise DomainError(f"Confinement parameter must be finite and >= 0, got h={self.h}")
        if self.case is Case.RECT and (not math.isfinite(self.m) or self.m <= 0.0):
            raise DomainError(f"Rect second side must be finite and > 0, got m={self.m}")

    @property
    def effective_dim(self) -> int:
        """d_e: dimension of the effective domain."""
        return 2 if self.case is Case.PP else 1

    @property
    def confined_dims(self) -> int:
        """k: number of confined coordinates."""
        return 2 if self.case in (Case.NC3, Case.RECT) else 1

    @property
    def space_dim(self) -> int:
        """d = d_e + k."""
        return self.effective_dim + self.confined_dims

    @property
    def cross_section(self) -> float:
        """A: cross-section measure in diameters (h, h^2, h, h m)."""
        if self.case is Case.NC3:
            return self.h * self.h
        if self.case is Case.RECT:
            return self.h * self.m
        return self.h

    @property
    def alpha_bulk(self) -> float:
        """Unconfined excluded volume per eps^d: pi (discs), 4 pi / 3 (spheres)."""
        return math.pi if self.space_dim == 2 else 4.0 * math.pi / 3.0

    @property
    def g_per_alpha(self) -> float:
        """
        Ratio g_h / alpha_h.

        Physical channel volume over particle volume, per eps^{d_e}:
          NC2   4 (h+1) / pi
          NC3   6 (h+1)^2 / pi
          PP    6 (h+1) / pi
          Rect  6 (h+1)(m+1) / pi
        """
        h1 = self.h + 1.0
        if self.case is Case.NC2:
            return 4.0 * h1 / math.pi
        if self.case is Case.NC3:
            return 6.0 * h1 * h1 / math.pi
        if self.case is Case.PP:
            return 6.0 * h1 / math.pi
        return 6.0 * h1 * (self.m + 1.0) / math.pi

    def with_h(self, h: float) -> "Geometry":
        return Geometry(self.case, h, self.m)


@dataclass(frozen=True)
class CoefficientBundle:
    """Coefficients of the effective equation for one (geometry, N, eps)."""
    alpha: float             # alpha_h, excluded length/area per eps^{d_e}
    g: float                 # g_h, concentration-form nonlinearity
    phi: float               # total volume fraction
    excluded_volume: float   # alpha_h * A

    @property
    def gamma(self) -> float:
        """g_h * phi, the nonlinearity on the probability density (N-1 ~ N)."""
        return self.g * self.phi


@dataclass(frozen=True)
class LimitingCoefficients:
    """Concentration-form coefficients of the limiting models."""
    point: float = 0.0
    single_file: Optional[float] = 2.0   # None where no single-file limit exists (PP)
    bulk: float = 4.0
