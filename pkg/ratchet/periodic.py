"""
Ratchet Stationary Solver — Spectral Collocation with Continuation

Constant-flux form of the stationary effective equation on the periodic cell:

  (1 + g p) p' + V'(x, F0) p + J = 0,      ∫ p = 1,   p periodic

Unknowns: nodal p_i on a uniform periodic grid and the flux J. p' is the
Fourier derivative (Nyquist mode dropped); the normalization row closes
the system. Newton uses the analytic Jacobian

  dR_i/dp_j = (1 + g p_i) D_ij + delta_ij (g (D p)_i + V'_i),   dR_i/dJ = 1

Starting point is the Boltzmann density at (g, F0) = (0, 0); the path goes
out in F0 first (steps <= CFG.RATCHET_F0_STEP) and then in g
(steps <= CFG.RATCHET_GPHI_STEP). A failed step is halved before giving up.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import fft

import config as CFG
from effective_pde import DensityField, Grid
from errors import DomainError, NewtonDivergence
from .potential import potential_sf, potential_sf_derivative

logger = logging.getLogger("confined_diffusion.ratchet")

_MAX_HALVINGS = 4


@dataclass(frozen=True)
class RatchetProblem:
    g_phi: float                            # concentration-form nonlinearity g_h * phi
    f0: float                               # tilt
    n_points: int = CFG.RATCHET_GRID_POINTS

    def __post_init__(self):
        if not math.isfinite(self.g_phi) or self.g_phi < 0.0:
            raise DomainError(f"g_phi must be finite and >= 0, got {self.g_phi}")
        if not math.isfinite(self.f0):
            raise DomainError(f"Tilt must be finite, got F0={self.f0}")
        if self.n_points < CFG.PDE_MIN_GRID_POINTS or self.n_points % 2:
            raise DomainError(f"Ratchet grid needs an even size >= {CFG.PDE_MIN_GRID_POINTS}, "
                              f"got {self.n_points}")


@dataclass
class RatchetSolution:
    problem: RatchetProblem
    density: DensityField                   # periodic grid on [-1/2, 1/2)
    j0: float                               # stationary flux
    residual: float = 0.0                   # L-inf residual of the collocated relation
    iterations: int = 0


@lru_cache(maxsize=8)
def spectral_derivative(n_points: int) -> np.ndarray:
    """Dense Fourier differentiation matrix on n equispaced points of [0, 1)."""
    k = 2.0 * math.pi * fft.fftfreq(n_points, d=1.0 / n_points)
    k[n_points // 2] = 0.0
    eye = np.eye(n_points)
    d = np.real(fft.ifft(1j * k[:, None] * fft.fft(eye, axis=0), axis=0))
    d.setflags(write=False)
    return d


def _grid(n_points: int) -> Grid:
    return Grid(n_points, "periodic")


def _residual(p: np.ndarray, j: float, g: float, dv: np.ndarray, d: np.ndarray, dx: float):
    dp = d @ p
    r = np.empty(p.size + 1)
    r[:-1] = (1.0 + g * p) * dp + dv * p + j
    r[-1] = dx * p.sum() - 1.0
    return r, dp


def _newton(prob: RatchetProblem, p0: np.ndarray, j0: float):
    """Newton from (p0, j0). Returns (p, j, residual, iterations) or raises."""
    grid = _grid(prob.n_points)
    d = spectral_derivative(prob.n_points)
    dv = potential_sf_derivative(grid.nodes, prob.f0)
    dx = grid.dx
    g = prob.g_phi
    m = prob.n_points

    p = p0.copy()
    j = float(j0)
    jac = np.empty((m + 1, m + 1))
    jac[:-1, -1] = 1.0
    jac[-1, :-1] = dx
    jac[-1, -1] = 0.0
    r, dp = _residual(p, j, g, dv, d, dx)
    norm = float(np.max(np.abs(r)))
    for iteration in range(1, CFG.RATCHET_MAX_ITER + 1):
        jac[:-1, :-1] = (1.0 + g * p)[:, None] * d
        jac[np.arange(m), np.arange(m)] += g * dp + dv
        step = np.linalg.solve(jac, -r)
        p += step[:-1]
        j += step[-1]
        r, dp = _residual(p, j, g, dv, d, dx)
        norm = float(np.max(np.abs(r)))
        if not math.isfinite(norm):
            break
        if norm < CFG.RATCHET_NEWTON_TOL:
            return p, j, norm, iteration
    raise NewtonDivergence(
        f"Ratchet Newton failed at g_phi={prob.g_phi:g}, F0={prob.f0:g}; "
        f"use smaller continuation steps",
        last_iterate=p, residual=norm, iterations=CFG.RATCHET_MAX_ITER)


def _boltzmann(n_points: int) -> np.ndarray:
    grid = _grid(n_points)
    w = np.exp(-potential_sf(grid.nodes, 0.0))
    return w / grid.integrate(w)


def _march(start: RatchetSolution, g_phi: float, f0: float,
           max_step: float, along: str) -> RatchetSolution:
    """Natural-parameter continuation from `start` to (g_phi, f0) along one parameter."""
    current = start
    origin = current.problem.f0 if along == "f0" else current.problem.g_phi
    target = f0 if along == "f0" else g_phi
    n = max(1, int(math.ceil(abs(target - origin) / max_step - 1e-12)))
    values = list(np.linspace(origin, target, n + 1)[1:])
    while values:
        value = float(values[0])
        if along == "f0":
            prob = RatchetProblem(current.problem.g_phi, value, current.problem.n_points)
        else:
            prob = RatchetProblem(value, current.problem.f0, current.problem.n_points)
        try:
            p, j, res, its = _newton(prob, current.density.values, current.j0)
        except NewtonDivergence:
            prev = current.problem.f0 if along == "f0" else current.problem.g_phi
            if abs(value - prev) < max_step / 2 ** _MAX_HALVINGS:
                raise
            values.insert(0, 0.5 * (prev + value))
            logger.debug(f"continuation in {along}: halving step towards {value:g}")
            continue
        values.pop(0)
        current = RatchetSolution(prob, DensityField(_grid(prob.n_points), p), j, res, its)
        logger.debug(f"ratchet step g_phi={prob.g_phi:g}, F0={prob.f0:g}: J0={j:.10g}, "
                     f"{its} Newton steps")
    return current


def boltzmann_solution(n_points: int = CFG.RATCHET_GRID_POINTS) -> RatchetSolution:
    """Exact start of every path: (g_phi, F0) = (0, 0), J = 0."""
    prob = RatchetProblem(0.0, 0.0, n_points)
    return RatchetSolution(prob, DensityField(_grid(n_points), _boltzmann(n_points)), 0.0)


def solve_periodic_stationary(prob: RatchetProblem,
                              start: Optional[RatchetSolution] = None) -> RatchetSolution:
    """
    Stationary periodic density and flux for one (g_phi, F0).

    Without `start` the continuation path begins at the Boltzmann density;
    with `start` (same grid) it continues from that solution.
    """
    if start is not None and start.problem.n_points != prob.n_points:
        raise DomainError(f"Warm start has {start.problem.n_points} points, problem has {prob.n_points}")
    if start is None:
        current = _march(boltzmann_solution(prob.n_points), 0.0, prob.f0,
                         CFG.RATCHET_F0_STEP, "f0")
        return _march(current, prob.g_phi, prob.f0, CFG.RATCHET_GPHI_STEP, "g")
    current = _march(start, start.problem.g_phi, prob.f0, CFG.RATCHET_F0_STEP, "f0")
    return _march(current, prob.g_phi, prob.f0, CFG.RATCHET_GPHI_STEP, "g")


def sweep_solutions(g_phi: float, f0_values: Sequence[float],
                    n_points: int = CFG.RATCHET_GRID_POINTS) -> List[RatchetSolution]:
    """
    One solution per F0, in input order.

    The nonlinearity is switched on at F0 = 0 and the tilts are then visited
    outward (positive values ascending, negative values descending), each
    warm-started from its neighbour.
    """
    values = [float(f) for f in f0_values]
    if not all(math.isfinite(f) for f in values):
        raise DomainError(f"Tilts must be finite, got {values}")
    base = solve_periodic_stationary(RatchetProblem(g_phi, 0.0, n_points))
    solved = {}
    for branch in (sorted(f for f in set(values) if f >= 0.0),
                   sorted((f for f in set(values) if f < 0.0), reverse=True)):
        current = base
        for f0 in branch:
            try:
                current = solve_periodic_stationary(RatchetProblem(g_phi, f0, n_points), current)
            except NewtonDivergence as exc:
                raise NewtonDivergence(
                    f"flux curve g_phi={g_phi:g} failed at F0={f0:g}: {exc}",
                    last_iterate=exc.last_iterate, residual=exc.residual,
                    iterations=exc.iterations) from exc
            solved[f0] = current
    return [solved[f] for f in values]


def flux_curve(g_phi: float, f0_values: Sequence[float],
               n_points: int = CFG.RATCHET_GRID_POINTS) -> List[Tuple[float, float]]:
    """(F0, J0) pairs in input order."""
    return [(s.problem.f0, s.j0) for s in sweep_solutions(g_phi, f0_values, n_points)]


def nonlinearity(points: Sequence[Tuple[float, float]]) -> float:
    """
    Largest deviation of J0(F0) from its least-squares line, over max |J0|.
    """
    f0 = np.array([p[0] for p in points], dtype=float)
    j0 = np.array([p[1] for p in points], dtype=float)
    slope, intercept = np.polyfit(f0, j0, 1)
    scale = float(np.max(np.abs(j0)))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(j0 - (slope * f0 + intercept)))) / scale
