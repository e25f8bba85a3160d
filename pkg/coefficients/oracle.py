"""
Excluded-Volume Oracle — Surface Quadrature

Independent check of the closed forms: alpha is the integral of x^2 over
the part of the unit contact sphere (circle in 2D) centred at each admissible
centre offset that stays inside the walls, averaged over the cross-section:

  alpha = (1 / Lambda^2) * integral over centres of mu1,   mu1 = ∫ x^2 dS

with Lambda = h (NC2, PP), h^2 (NC3) and h m (Rect).

  NC2   mu1(y)   = ∫ cos^2(theta) over the arcs with |y + sin theta| <= h/2
  PP    mu1(z)   = pi ∫ (1 - u^2) du over the admissible band of u = s_z
  NC3,  the centre integral is taken first: for a contact point at x with
  Rect  transverse displacement (rho cos phi, rho sin phi) the admissible
        centre area is (h - rho|cos phi|)+ (m - rho|sin phi|)+, and
        dS = dx dphi (Archimedes)

Integrals are composite Gauss–Legendre, split at every kink of the
integrand that is known in closed form. The level is doubled until
successive values agree to CFG.ORACLE_RTOL; SolverError is raised if
CFG.ORACLE_MAX_LEVEL is reached first.
"""

import logging
import math
from typing import Callable, Sequence

import numpy as np

import config as CFG
from errors import DomainError, SolverError
from .geometry import Case, Geometry

logger = logging.getLogger("confined_diffusion.coefficients")

_HALF_PI = 0.5 * math.pi


def _gauss_nodes(breaks: Sequence[float], nodes: int):
    """Composite Gauss–Legendre nodes/weights over the sorted breakpoints."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    xs, ws = [], []
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi <= lo:
            continue
        half = 0.5 * (hi - lo)
        xs.append(lo + half * (t + 1.0))
        ws.append(half * w)
    return np.concatenate(xs), np.concatenate(ws)


def _panel_breaks(lo: float, hi: float, kinks: Sequence[float], panels: int):
    """Equal panels on [lo, hi] plus the kinks that fall inside."""
    pts = set(np.linspace(lo, hi, panels + 1).tolist())
    pts.update(k for k in kinks if lo < k < hi)
    return sorted(pts)


# =========================================================
# NC2 and PP — one transverse coordinate
# =========================================================

def _mu1_nc2(y: np.ndarray, h: float, nodes: int) -> np.ndarray:
    """Quadrature in theta over the right half-circle, doubled by symmetry."""
    l1 = np.maximum(-1.0, -0.5 * h - y)
    l2 = np.minimum(1.0, 0.5 * h - y)
    a = np.arcsin(l1)
    b = np.arcsin(l2)
    t, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (b - a)
    theta = a[:, None] + half[:, None] * (t[None, :] + 1.0)
    return 2.0 * np.sum(np.cos(theta) ** 2 * w[None, :], axis=1) * half


def _mu1_pp(z: np.ndarray, h: float, nodes: int) -> np.ndarray:
    l1 = np.maximum(-1.0, -0.5 * h - z)
    l2 = np.minimum(1.0, 0.5 * h - z)
    t, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (l2 - l1)
    u = l1[:, None] + half[:, None] * (t[None, :] + 1.0)
    return math.pi * np.sum((1.0 - u * u) * w[None, :], axis=1) * half


def _one_transverse(mu1: Callable, h: float, level: int) -> float:
    n = CFG.ORACLE_NODES * 2 ** level
    panels = max(1, n // CFG.ORACLE_SUB_NODES)
    # integrand is even in the offset: integrate [0, h/2] and double
    breaks = _panel_breaks(0.0, 0.5 * h, [abs(1.0 - 0.5 * h)], panels)
    y, wy = _gauss_nodes(breaks, CFG.ORACLE_SUB_NODES)
    total = 2.0 * float(np.dot(wy, mu1(y, h, CFG.ORACLE_SUB_NODES * 2 ** level)))
    return total / (h * h)


# =========================================================
# NC3 and Rect — two transverse coordinates
# =========================================================

def _section_overlap(rho: np.ndarray, h: float, m: float, nodes: int) -> np.ndarray:
    """
    Centre area that keeps both particles inside, integrated over the
    direction phi of a transverse displacement of length rho.

    For one direction the admissible area is (h - rho|cos|)+ (m - rho|sin|)+;
    on the first quadrant it is nonzero only for phi in [arccos(h/rho), arcsin(m/rho)].
    """
    lo = np.arccos(np.minimum(1.0, h / rho))
    hi = np.maximum(lo, np.arcsin(np.minimum(1.0, m / rho)))
    t, w = np.polynomial.legendre.leggauss(nodes)
    half = 0.5 * (hi - lo)
    phi = lo[:, None] + half[:, None] * (t[None, :] + 1.0)
    r = rho[:, None]
    area = (h - r * np.cos(phi)) * (m - r * np.sin(phi))
    return 4.0 * np.sum(area * w[None, :], axis=1) * half


def _two_transverse(h: float, m: float, level: int) -> float:
    # contact point x = cos(theta), transverse radius rho = sin(theta), dS = dx dphi
    n = CFG.ORACLE_NODES * 2 ** level
    panels = max(1, n // CFG.ORACLE_SUB_NODES)
    kinks = [math.asin(r) for r in (h, m, math.hypot(h, m)) if r < 1.0]
    theta, wt = _gauss_nodes(_panel_breaks(0.0, _HALF_PI, kinks, panels), CFG.ORACLE_SUB_NODES)
    x, rho = np.cos(theta), np.sin(theta)
    section = _section_overlap(rho, h, m, CFG.ORACLE_SUB_NODES * 2 ** level)
    # x in [-1, 1] by symmetry
    total = 2.0 * float(np.dot(wt, x * x * rho * section))
    return total / (h * h * m * m)


def _level_value(geom: Geometry, level: int) -> float:
    h = float(geom.h)
    if geom.case is Case.NC2:
        return _one_transverse(_mu1_nc2, h, level)
    if geom.case is Case.PP:
        return _one_transverse(_mu1_pp, h, level)
    if geom.case is Case.NC3:
        return _two_transverse(h, h, level)
    return _two_transverse(h, float(geom.m), level)


# =========================================================
# Public API
# =========================================================

def alpha_oracle(geom: Geometry) -> float:
    """
    Brute-force surface quadrature of alpha (independent of the closed forms).

    Rect is integrated directly for any m > 0, so it also checks the
    side-swap rule used by the closed form.
    """
    h = float(geom.h)
    if h <= 0.0:
        raise DomainError(f"Oracle needs h > 0, got h={h}")

    previous = _level_value(geom, 0)
    change = math.inf
    for level in range(1, CFG.ORACLE_MAX_LEVEL + 1):
        current = _level_value(geom, level)
        change = abs(current - previous) / abs(current)
        if change < CFG.ORACLE_RTOL:
            logger.debug(f"alpha oracle ({geom.case.value}, h={h:g}) converged at level {level}")
            return current
        previous = current
    raise SolverError(
        f"alpha oracle ({geom.case.value}, h={h:g}) not converged after "
        f"{CFG.ORACLE_MAX_LEVEL} doublings: last relative change {change:.2e} > {CFG.ORACLE_RTOL:g}",
        status=CFG.ORACLE_MAX_LEVEL)
