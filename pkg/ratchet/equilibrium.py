"""Zero-flux counterpart of the ratchet: the closed cell in equilibrium."""

import config as CFG
from effective_pde import EquilibriumDensity, ModelKind, ModelSpec, steady_state_noflux
from errors import DomainError
from .potential import tilted


def equilibrium_profile(g_phi: float, f0: float,
                        n_points: int = CFG.PDE_GRID_POINTS) -> EquilibriumDensity:
    """
    Solution of log p + g_phi p + V(x, F0) = C on [-1/2, 1/2] with ∫ p = 1.

    This is the density a Metropolis–Hastings chain targeting exp(-sum V)
    samples; it carries no flux.
    """
    if g_phi < 0.0:
        raise DomainError(f"g_phi must be >= 0, got {g_phi}")
    model = ModelSpec(kind=ModelKind.NARROW, gamma=g_phi, bc="noflux", potential=tilted(f0))
    return steady_state_noflux(model, n_points)
