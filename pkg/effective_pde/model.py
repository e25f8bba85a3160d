"""
Effective drift-diffusion models.

All kinds share the conservative form

  dp/dt = d/dx ( D(p) dp/dx - f p ),     f = -V'  (or a given force field)

  NARROW        D = 1 + gamma p,  gamma = (N-1) eps^{d_e} alpha_h
  POINT         D = 1             gamma = 0
  SINGLE_FILE   D = 1 + gamma p,  gamma = 2 (N-1) eps
  BULK          D = 1 + gamma p,  gamma = (N-1) eps^{d_e} alpha_bulk / A
  HARD_RODS     D = 1 / (1 - a p)^2,  a = N eps  (stored in `gamma`)

Each kind is the gradient flow of
  F[p] = ∫ p log p + gamma/2 p^2 + V p       (linear kinds)
  F[p] = ∫ p log(p / (1 - a p)) + V p        (hard rods)
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, Optional

import numpy as np

from coefficients import Case, Geometry, alpha
from errors import DomainError
from .grid import BoundaryKind


class ModelKind(str, Enum):
    NARROW = "narrow"
    POINT = "point"
    SINGLE_FILE = "singlefile"
    BULK = "bulk"
    HARD_RODS = "rods"

    @classmethod
    def parse(cls, name) -> "ModelKind":
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise ValueError(
                f"Unknown model: {name}. Use 'narrow', 'point', 'singlefile', "
                f"'bulk' or 'rods'.") from None


class Normalization(str, Enum):
    PROBABILITY = "probability"     # integral 1
    CONCENTRATION = "concentration"  # integral phi


@dataclass(frozen=True)
class ModelSpec:
    """One effective problem: coefficient, drift and boundary kind."""
    kind: ModelKind
    gamma: float                                        # coefficient on the field (a for HARD_RODS)
    bc: BoundaryKind = BoundaryKind.NO_FLUX
    potential: Optional[Callable[[np.ndarray], np.ndarray]] = None   # V(x) along the channel
    force: Optional[Callable[[np.ndarray], np.ndarray]] = None       # f(x), used when no potential
    dim: int = 1                                        # effective dimension d_e
    normalization: Normalization = Normalization.PROBABILITY
    mass: float = 1.0
    area: float = 1.0                                   # cross-section A, for volume_gamma

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind.parse(self.kind))
        object.__setattr__(self, "bc", BoundaryKind.parse(self.bc))
        if not np.isfinite(self.gamma) or self.gamma < 0.0:
            raise DomainError(f"Nonlinear coefficient must be finite and >= 0, got {self.gamma}")
        if self.potential is not None and self.force is not None:
            raise ValueError("Give either a potential or a force field, not both")
        if self.dim not in (1, 2):
            raise DomainError(f"Effective dimension must be 1 or 2, got {self.dim}")

    @property
    def nonlinear(self) -> bool:
        return self.kind is ModelKind.HARD_RODS or self.gamma > 0.0

    @property
    def volume_gamma(self) -> float:
        """gamma * A: the coefficient in units of the cross-section."""
        return self.gamma * self.area

    # =========================================================
    # Constitutive functions
    # =========================================================

    def diffusivity(self, p: np.ndarray) -> np.ndarray:
        if self.kind is ModelKind.HARD_RODS:
            return 1.0 / (1.0 - self.gamma * p) ** 2
        return 1.0 + self.gamma * p

    def excess_potential(self, p: np.ndarray) -> np.ndarray:
        """Chemical potential minus log p."""
        if self.kind is ModelKind.HARD_RODS:
            ap = self.gamma * p
            return -np.log1p(-ap) + ap / (1.0 - ap)
        return self.gamma * p

    def energy_density(self, p: np.ndarray) -> np.ndarray:
        """Integrand of F without the potential term; p > 0."""
        if self.kind is ModelKind.HARD_RODS:
            return p * (np.log(p) - np.log1p(-self.gamma * p))
        return p * np.log(p) + 0.5 * self.gamma * p * p

    def to_concentration(self, phi: float) -> "ModelSpec":
        """Same dynamics for c = phi p: coefficient gamma / phi, mass phi."""
        if not 0.0 < phi < 1.0:
            raise DomainError(f"Volume fraction must be in (0, 1), got phi={phi}")
        if self.normalization is Normalization.CONCENTRATION:
            return self
        return replace(self, gamma=self.gamma / phi, mass=phi,
                       normalization=Normalization.CONCENTRATION)


def build_model(kind, geom: Geometry, n_particles: int, epsilon: float,
                bc=BoundaryKind.NO_FLUX,
                potential: Optional[Callable] = None,
                force: Optional[Callable] = None) -> ModelSpec:
    """
    Model of the given kind for N particles of diameter eps in geom.

    SINGLE_FILE and HARD_RODS only exist on a one-dimensional effective domain.
    """
    kind = ModelKind.parse(kind)
    if n_particles < 1 or not epsilon > 0.0:
        raise DomainError(f"Need N >= 1 and eps > 0, got N={n_particles}, eps={epsilon}")
    d_e = geom.effective_dim
    others = n_particles - 1
    if kind is ModelKind.NARROW:
        gamma = others * epsilon ** d_e * alpha(geom)
    elif kind is ModelKind.POINT:
        gamma = 0.0
    elif kind is ModelKind.BULK:
        if geom.cross_section <= 0.0:
            raise DomainError("Bulk model needs a nonzero cross-section (h > 0)")
        gamma = others * epsilon ** d_e * geom.alpha_bulk / geom.cross_section
    else:
        if geom.case is Case.PP:
            raise DomainError(f"{kind.value} model has no parallel-plate counterpart")
        if kind is ModelKind.SINGLE_FILE:
            gamma = 2.0 * others * epsilon
        else:
            gamma = n_particles * epsilon
            if gamma >= 1.0:
                raise DomainError(f"Hard rods do not fit: N eps = {gamma} >= 1")
    return ModelSpec(
        kind=kind,
        gamma=gamma,
        bc=bc,
        potential=potential,
        force=force,
        dim=d_e,
        area=geom.cross_section,
    )
