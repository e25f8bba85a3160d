"""
Transport-maximizing channel width and lane splitting.

g_h = (g_h / alpha_h) * alpha_h grows with h through the (h+1) volume
factor and decays through alpha_h; the product peaks just above h = 1.
"""

import logging
import math
from typing import Tuple

from scipy.optimize import minimize_scalar

import config as CFG
from errors import DomainError, InfeasibleSplitError
from .closed_forms import alpha
from .geometry import Case, Geometry

logger = logging.getLogger("confined_diffusion.coefficients")

_OPTIMIZABLE = (Case.NC2, Case.NC3, Case.PP)


def g_of_h(case: Case, h: float) -> float:
    """Concentration-form nonlinearity g_h (no N, eps dependence)."""
    geom = Geometry(case, h)
    return geom.g_per_alpha * alpha(geom)


def optimal_h(case) -> Tuple[float, float]:
    """
    Width h* that maximizes g_h, and g_max = g_{h*}.

    Golden-section search on -g_h over CFG.OPTIMAL_H_BRACKET.
    """
    case = Case.parse(case) if not isinstance(case, Case) else case
    if case not in _OPTIMIZABLE:
        raise DomainError(f"optimal_h is defined for nc2, nc3 and pp, got {case.value}")

    res = minimize_scalar(
        lambda h: -g_of_h(case, h),
        bracket=CFG.OPTIMAL_H_BRACKET,
        method="golden",
        tol=CFG.OPTIMAL_H_TOL,
    )
    h_star = float(res.x)
    g_max = -float(res.fun)
    logger.debug(f"optimal h ({case.value}): h*={h_star:.6f}, g_max={g_max:.6f}, nfev={res.nfev}")
    return h_star, g_max


def lane_width(case, h_total: float, n_lanes: int) -> float:
    """
    Confinement parameter of one lane after an equal split.

    The physical width eps (h+1) is cut into k equal pieces per confined
    side: k = n_lanes for NC2 and PP, k = sqrt(n_lanes) for NC3.
    """
    case = Case.parse(case) if not isinstance(case, Case) else case
    if int(n_lanes) != n_lanes or n_lanes < 1:
        raise DomainError(f"Lane count must be a positive integer, got {n_lanes}")
    if h_total < 0.0:
        raise DomainError(f"Confinement parameter must be >= 0, got h={h_total}")
    n_lanes = int(n_lanes)
    if case is Case.NC3:
        k = math.isqrt(n_lanes)
        if k * k != n_lanes:
            raise DomainError(
                f"NC3 splits into k x k lanes; {n_lanes} is not a perfect square")
    elif case in (Case.NC2, Case.PP):
        k = n_lanes
    else:
        raise DomainError(f"Lane splitting is defined for nc2, nc3 and pp, got {case.value}")

    h_lane = (h_total + 1.0) / k - 1.0
    if h_lane < 0.0:
        raise InfeasibleSplitError(
            f"{n_lanes} lanes of a channel with h={h_total} are narrower than one "
            f"diameter (h_lane={h_lane:.4f})")
    return h_lane


def subdivision_gain(case, h_total: float, n_lanes: int) -> float:
    """Relative change of g when the channel is split: g(h_lane)/g(h_total) - 1."""
    case = Case.parse(case) if not isinstance(case, Case) else case
    h_lane = lane_width(case, h_total, n_lanes)
    return g_of_h(case, h_lane) / g_of_h(case, h_total) - 1.0
