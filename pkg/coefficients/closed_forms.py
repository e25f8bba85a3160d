"""
Excluded-Volume Coefficients — Closed Forms

Piecewise closed forms of the effective excluded-volume coefficient:
  NC2   alpha = M1(h) / h^2
  NC3   alpha = [Theta(h-1) (4pi/3 h^2 - pi h + 8/15) + Theta(1-h) m(h)] / h^4
        m = s + sigma_a   on [0, (sqrt5-1)/2]
        m = s + sigma_b   on ((sqrt5-1)/2, 1/sqrt2]
        m = s             on (1/sqrt2, 1)
  PP    alpha = pi/(6h^2) [h^2 (6-h^2) Theta(1-h) + (8h-3) Theta(h-1)]
  Rect  alpha_hm for m >= 1, swapped by symmetry for m < 1

Both sides of each breakpoint are evaluated by the branch valid on that
side; at h = 1 the two NC3 pieces coincide, so only one is taken.

The h < 1 forms cancel down to ~2h^2 (NC2, Rect) or ~2h^4 (NC3). Below
CFG.SMALL_H_SWITCH they run on mpmath at raised precision. The kernels use
integer coefficients only so the same code runs on float and on mpf.
"""

import logging
import math
from typing import List, Sequence, Tuple

import mpmath

import config as CFG
from errors import DiluteRegimeError, DomainError
from .geometry import Case, CoefficientBundle, Geometry, LimitingCoefficients

logger = logging.getLogger("confined_diffusion.coefficients")

# NC3 sub-branch boundaries
GOLDEN_BREAK = (math.sqrt(5.0) - 1.0) / 2.0
HALF_SQRT2_BREAK = 1.0 / math.sqrt(2.0)

ALPHA_AT_ZERO = {
    Case.NC2: 2.0,
    Case.NC3: 2.0,
    Case.PP: math.pi,
}


# =========================================================
# Branch helpers (principal arccot, range (-pi/2, pi/2])
# =========================================================

def _arccot(num, den, M):
    """arccot(num/den) = arctan(den/num), one-sided at num = 0."""
    if num < 0:
        num, den = -num, -den
    return M.atan2(den, num)


def _arctan(num, den, M):
    """arctan(num/den), one-sided at den = 0."""
    if den < 0:
        num, den = -num, -den
    return M.atan2(num, den)


# =========================================================
# Kernels: return alpha; M is the math backend (math or mpmath)
# =========================================================

def _nc2_branch(h, M, lower: bool):
    value = 3 * M.pi * h - 4
    if lower:
        value += 2 * (2 + h * h) * M.sqrt(1 - h * h) - 6 * h * M.acos(h)
    return value / (3 * h * h)


def _nc2(h, M):
    return _nc2_branch(h, M, h < 1)


def _s(h, M):
    h2 = h * h
    value = (8
             + 2 * M.sqrt(1 - h2) * (2 * h2 * h2 - 9 * h2 - 8)
             - 5 * M.pi * h * (h2 * h2 - 6 * h2 + 4 * h - 3)
             - 30 * h * M.asin(h))
    return value / 15


def _sigma_a(h, M):
    h2 = h * h
    h4 = h2 * h2
    r1 = M.sqrt(1 - h2)
    r2 = M.sqrt(max(0, 1 - 2 * h2))
    acot1 = _arccot(2 * h * r2, 1 - 3 * h2, M)
    acot2 = _arccot(1 - 2 * h2 - h4, 2 * h2 * r2, M)
    acot3 = _arccot(2 * h * r2 ** 3 + 2 * h * r1 * (3 * h2 - 1),
                    1 - 5 * h2 + 6 * h4 + 4 * h2 * r2 * r1, M)
    value = (8 * r2 * (h4 + 9 * h2 + 4)
             + 5 * M.pi * h * (3 * h4 - 18 * h2 + 16 * h - 9)
             + 10 * h2 * h * (h2 - 6) * acot1
             - 80 * h2 * acot2
             - 30 * h * acot3
             + 60 * h * M.asin(h)
             - 20 * h * (h4 - 6 * h2 - 3) * M.asin(h / r1))
    return value / 60


def _sigma_b(h, M):
    h2 = h * h
    h4 = h2 * h2
    r2 = M.sqrt(max(0, 1 - 2 * h2))
    acot1 = _arccot(2 * h * r2, 1 - 3 * h2, M)
    atan2 = _arctan(1 - 2 * h2 - h4, 2 * h2 * r2, M)
    acot4 = _arccot(4 * h * r2 * (3 * h2 - 1), 1 - 10 * h2 + 17 * h4, M)
    value = (8 * r2 * (h4 + 9 * h2 + 4)
             + 5 * M.pi * h * (2 * h4 - 12 * h2 + 8 * h - 3)
             + 20 * h2 * h * (h2 - 6) * acot1
             + 80 * h2 * atan2
             + 30 * h * acot4)
    return value / 60


def _nc3_lower(h, M, branch: str):
    """m(h) / h^4 with an explicit sigma branch ('a', 'b' or '0')."""
    value = _s(h, M)
    if branch == "a":
        value += _sigma_a(h, M)
    elif branch == "b":
        value += _sigma_b(h, M)
    return value / (h * h * h * h)


def _nc3_upper(h, M):
    return (20 * M.pi * h * h - 15 * M.pi * h + 8) / (15 * h * h * h * h)


def _nc3(h, M):
    if h >= 1:
        return _nc3_upper(h, M)
    if h <= GOLDEN_BREAK:
        return _nc3_lower(h, M, "a")
    if h <= HALF_SQRT2_BREAK:
        return _nc3_lower(h, M, "b")
    return _nc3_lower(h, M, "0")


def _rect(h, m, M):
    """alpha_hm for m >= 1."""
    if h >= 1:
        value = 16 + 40 * M.pi * h * m - 15 * M.pi * (h + m)
    else:
        h2 = h * h
        value = (16
                 + 5 * M.pi * m * h2 * (6 - h2)
                 - 30 * h * M.asin(h)
                 + 2 * M.sqrt(1 - h2) * (2 * h2 * h2 - 9 * h2 - 8))
    return value / (30 * h * h * m * m)


def _pp_branch(h, lower: bool):
    if lower:
        return math.pi * (6.0 - h * h) / 6.0
    return math.pi * (8.0 * h - 3.0) / (6.0 * h * h)


def _pp(h):
    return _pp_branch(h, h < 1.0)


def _evaluate(kernel, h: float, *args) -> float:
    """Run a kernel on floats, or on mpmath below the small-h switch."""
    if h >= CFG.SMALL_H_SWITCH:
        return float(kernel(h, *args, math))
    decades = math.log10(CFG.SMALL_H_SWITCH / h)
    dps = CFG.MPMATH_BASE_DPS + int(math.ceil(CFG.MPMATH_DPS_PER_DECADE * decades))
    with mpmath.workdps(dps):
        extra = [mpmath.mpf(a) if isinstance(a, float) else a for a in args]
        return float(kernel(mpmath.mpf(h), *extra, mpmath))


# =========================================================
# Public API
# =========================================================

def alpha(geom: Geometry) -> float:
    """
    Excluded-volume coefficient alpha_h (alpha_hm for Rect).

    h = 0 returns the analytic limit. Rect with m < 1 is evaluated with the
    sides swapped; with both sides below one it is only defined for h = m
    (the square channel).
    """
    h = float(geom.h)
    if geom.case is Case.RECT:
        return _alpha_rect(h, float(geom.m))
    if h == 0.0:
        return ALPHA_AT_ZERO[geom.case]
    if geom.case is Case.PP:
        return _pp(h)
    if geom.case is Case.NC2:
        return _evaluate(_nc2, h)
    return _evaluate(_nc3, h)


def _alpha_rect(h: float, m: float) -> float:
    if m < 1.0:
        if h >= 1.0:
            h, m = m, h
        elif h == m:
            return alpha(Geometry(Case.NC3, h))
        else:
            raise DomainError(
                f"Rect alpha is defined when h >= 1 or m >= 1, or for a square section h == m; "
                f"got h={h}, m={m} with both sides below one")
    if h == 0.0:
        return (math.pi * m - 4.0 / 3.0) / (m * m)
    return _evaluate(_rect, h, m)


def branch_values(case: Case, h: float) -> Tuple[float, float]:
    """
    Both one-sided closed-form values at a breakpoint h.

    Breakpoints: h = 1 for every case, plus (sqrt5-1)/2 and 1/sqrt2 for NC3.
    Returns (left, right) where left is the branch valid just below h.
    """
    case = Case.parse(case) if not isinstance(case, Case) else case
    M = math
    if math.isclose(h, 1.0, rel_tol=1e-12):
        if case is Case.NC2:
            return _nc2_branch(1.0, M, True), _nc2_branch(1.0, M, False)
        if case is Case.PP:
            return _pp_branch(1.0, True), _pp_branch(1.0, False)
        if case is Case.NC3:
            return _nc3_lower(1.0, M, "0"), _nc3_upper(1.0, M)
    if case is Case.NC3 and math.isclose(h, GOLDEN_BREAK, rel_tol=1e-12):
        return _nc3_lower(GOLDEN_BREAK, M, "a"), _nc3_lower(GOLDEN_BREAK, M, "b")
    if case is Case.NC3 and math.isclose(h, HALF_SQRT2_BREAK, rel_tol=1e-12):
        return _nc3_lower(HALF_SQRT2_BREAK, M, "b"), _nc3_lower(HALF_SQRT2_BREAK, M, "0")
    raise DomainError(f"h={h} is not a breakpoint of {case.value}")


def volume_fraction(geom: Geometry, n_particles: int, epsilon: float) -> float:
    """phi = N eps^{d_e} / (g_h / alpha_h)."""
    return n_particles * epsilon ** geom.effective_dim / geom.g_per_alpha


def bundle(geom: Geometry, n_particles: int, epsilon: float) -> CoefficientBundle:
    """alpha, g, phi and alpha*A for N particles of diameter eps."""
    if int(n_particles) != n_particles or n_particles < 1:
        raise DomainError(f"Particle count must be a positive integer, got {n_particles}")
    if not epsilon > 0.0:
        raise DomainError(f"Particle diameter must be > 0, got eps={epsilon}")
    phi = volume_fraction(geom, int(n_particles), epsilon)
    if phi >= 1.0:
        raise DiluteRegimeError(
            f"Volume fraction phi={phi:.4f} >= 1 for N={n_particles}, eps={epsilon}, h={geom.h}")
    a = alpha(geom)
    return CoefficientBundle(
        alpha=a,
        g=geom.g_per_alpha * a,
        phi=phi,
        excluded_volume=a * geom.cross_section,
    )


def limiting_coefficients(case: Case) -> LimitingCoefficients:
    """
    Concentration-form coefficients of the point, single-file and bulk
    models. These are not the h -> 0 / h -> inf limits of g_h: the
    single-file value uses rod-length volume fraction (g_0 of NC2 is 8/pi).
    """
    case = Case.parse(case) if not isinstance(case, Case) else case
    if case is Case.NC2:
        return LimitingCoefficients(point=0.0, single_file=2.0, bulk=4.0)
    if case is Case.PP:
        return LimitingCoefficients(point=0.0, single_file=None, bulk=8.0)
    return LimitingCoefficients(point=0.0, single_file=2.0, bulk=8.0)


def coefficient_table(geom: Geometry, h_values: Sequence[float], n_particles: int,
                      epsilon: float) -> List[Tuple[float, CoefficientBundle]]:
    """Bundle along a sweep in h (other parameters of geom kept)."""
    rows = []
    for h in h_values:
        rows.append((float(h), bundle(geom.with_h(float(h)), n_particles, epsilon)))
    logger.debug(f"coefficient table: {geom.case.value}, {len(rows)} rows")
    return rows
