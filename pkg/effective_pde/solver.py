"""
Method-of-Lines Solver — Conservative Finite Volumes

Nodal values are control-volume averages; each face carries a flux and

  dp_i/dt = -(F_{i+1/2} - F_{i-1/2}) / w_i

with F = 0 on no-flux end faces, so sum(w p) is conserved by every
Jacobian-consistent integrator step.

Face fluxes:
  central         F = -D(p_mean) dp/dx + f_face p_mean          (upwind: f p_donor)
  gradient_flow   F = -dp/dx - L(p_i, p_j) (d(mu - log p) + dV)/dx

L is the logarithmic mean, so the gradient_flow flux is -L d(mu + V)/dx.
Its discrete equilibria satisfy mu + V = C exactly and its discrete free
energy never increases. The central scheme is the default.

In 2D the same face rule is applied along both axes; the drift acts
along the channel (axis 0) only.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp

import config as CFG
from errors import SolverError
from .field import DensityField
from .grid import Grid
from .model import ModelSpec

logger = logging.getLogger("confined_diffusion.pde")

SCHEMES = ("central", "gradient_flow")
_LOG_MEAN_FLOOR = 1e-300


@dataclass
class SolverOptions:
    """Grid size, integrator tolerances and output times of one solve."""
    n_points: int = CFG.PDE_GRID_POINTS
    atol: float = CFG.PDE_ATOL
    rtol: float = CFG.PDE_RTOL
    times: List[float] = field(default_factory=lambda: [CFG.DEFAULT_T_END])
    scheme: str = CFG.PDE_SCHEME
    upwind: bool = False                  # first-order donor-cell drift (central only)
    method: str = CFG.PDE_METHOD

    def __post_init__(self):
        if self.n_points < CFG.PDE_MIN_GRID_POINTS:
            raise ValueError(f"Grid size must be >= {CFG.PDE_MIN_GRID_POINTS}, got {self.n_points}")
        if not (self.atol > 0.0 and self.rtol > 0.0):
            raise ValueError(f"Tolerances must be > 0, got atol={self.atol}, rtol={self.rtol}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"Unknown scheme: {self.scheme}. Use 'central' or 'gradient_flow'.")
        if not self.times:
            raise ValueError("At least one output time is required")
        self.times = sorted(float(t) for t in self.times)


def log_mean(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """(b - a) / (log b - log a), with L(a, a) = a."""
    a = np.maximum(a, _LOG_MEAN_FLOOR)
    b = np.maximum(b, _LOG_MEAN_FLOOR)
    d = np.log(b) - np.log(a)
    small = np.abs(d) < 1e-8
    safe = np.where(small, 1.0, d)
    return np.where(small, a * (1.0 + 0.5 * d), a * np.expm1(safe) / safe)


# =========================================================
# Discretisation
# =========================================================

class MethodOfLines:
    """Right-hand side and Jacobian pattern for one (model, grid, scheme)."""

    def __init__(self, model: ModelSpec, grid: Grid, scheme: str = "central",
                 upwind: bool = False):
        if model.bc is not grid.bc:
            raise ValueError(f"Model boundary '{model.bc.value}' does not match grid '{grid.bc.value}'")
        if model.dim != grid.dim:
            raise ValueError(f"Model dimension {model.dim} does not match grid dimension {grid.dim}")
        self.model = model
        self.grid = grid
        self.scheme = scheme
        self.upwind = upwind
        self._dx = grid.dx
        self._w = grid.weights
        self._drift = self._face_drift()

    def _face_drift(self) -> np.ndarray:
        """Force f at the faces along the channel (length M-1, or M if periodic)."""
        g = self.grid
        left = g.nodes if g.periodic else g.nodes[:-1]
        if self.model.potential is not None:
            # right neighbour unwrapped, so a tilt contributes across the seam
            dv = self.model.potential(left + self._dx) - self.model.potential(left)
            return -np.asarray(dv, dtype=float) / self._dx
        if self.model.force is not None:
            return np.asarray(self.model.force(left + 0.5 * self._dx), dtype=float)
        return np.zeros_like(left)

    def _neighbours(self, p: np.ndarray):
        """Left/right node values of every face along axis 0."""
        if self.grid.periodic:
            return p, np.roll(p, -1, axis=0)
        return p[:-1], p[1:]

    def _flux(self, p: np.ndarray, drift: Optional[np.ndarray]) -> np.ndarray:
        pl, pr = self._neighbours(p)
        dp = pr - pl
        if self.scheme == "gradient_flow":
            model = self.model
            d_excess = model.excess_potential(pr) - model.excess_potential(pl)
            lm = log_mean(pl, pr)
            flux = -dp / self._dx - lm * d_excess / self._dx
            if drift is not None:
                flux += lm * drift
            return flux
        mean = 0.5 * (pl + pr)
        flux = -self.model.diffusivity(mean) * dp / self._dx
        if drift is not None:
            if self.upwind:
                flux += np.where(drift > 0.0, drift * pl, drift * pr)
            else:
                flux += drift * mean
        return flux

    def _divergence(self, flux: np.ndarray) -> np.ndarray:
        """-(F_right - F_left) / w along axis 0."""
        if self.grid.periodic:
            out = flux - np.roll(flux, 1, axis=0)
        else:
            zero = np.zeros((1,) + flux.shape[1:])
            padded = np.concatenate([zero, flux, zero], axis=0)
            out = padded[1:] - padded[:-1]
        w = self._w.reshape((-1,) + (1,) * (flux.ndim - 1))
        return -out / w

    def rhs(self, t: float, y: np.ndarray) -> np.ndarray:
        p = y.reshape(self.grid.shape)
        drift = self._drift if p.ndim == 1 else self._drift[:, None]
        dpdt = self._divergence(self._flux(p, drift))
        if self.grid.dim == 2:
            # transverse axis: diffusion only
            pt = np.moveaxis(p, 1, 0)
            dpdt += np.moveaxis(self._divergence(self._flux(pt, None)), 0, 1)
        return dpdt.ravel()

    def jacobian_pattern(self) -> sp.csr_matrix:
        """Nearest-neighbour stencil (with wrap-around when periodic)."""
        m = self.grid.n_points
        one_d = sp.diags([1, 1, 1], [-1, 0, 1], shape=(m, m), format="lil")
        if self.grid.periodic:
            one_d[0, m - 1] = 1
            one_d[m - 1, 0] = 1
        one_d = one_d.tocsr()
        if self.grid.dim == 1:
            return one_d
        eye = sp.identity(m, format="csr")
        return (sp.kron(one_d, eye) + sp.kron(eye, one_d)).tocsr()


# =========================================================
# Public API
# =========================================================

def solve_transient(model: ModelSpec, init: DensityField,
                    opts: Optional[SolverOptions] = None) -> List[DensityField]:
    """
    Integrate the effective equation from `init` to every time in opts.times.

    Returns one DensityField per output time. Raises SolverError when the
    integrator stops early.
    """
    opts = opts or SolverOptions(n_points=init.grid.n_points)
    if init.grid.n_points != opts.n_points:
        raise ValueError(
            f"Initial field has {init.grid.n_points} points, options ask for {opts.n_points}")
    t0 = float(init.time)
    if opts.times[0] < t0:
        raise ValueError(f"Output time {opts.times[0]} precedes the initial time {t0}")

    mol = MethodOfLines(model, init.grid, opts.scheme, opts.upwind)
    if opts.scheme == "gradient_flow" and init.min() <= 0.0:
        logger.warning("gradient_flow scheme started from a density with nonpositive values")

    extra = {}
    if opts.method in ("BDF", "Radau"):
        extra["jac_sparsity"] = mol.jacobian_pattern()

    t_end = opts.times[-1]
    if t_end == t0:
        return [init.copy() for _ in opts.times]

    mass0 = init.mass()
    logger.debug(
        f"solve_transient: {model.kind.value}, gamma={model.gamma:.6g}, bc={model.bc.value}, "
        f"M={init.grid.n_points}, dim={init.grid.dim}, scheme={opts.scheme}, t=[{t0:g}, {t_end:g}]")
    sol = solve_ivp(
        mol.rhs,
        (t0, t_end),
        init.values.ravel(),
        method=opts.method,
        t_eval=opts.times,
        atol=opts.atol,
        rtol=opts.rtol,
        **extra,
    )
    if not sol.success or sol.y.shape[1] != len(opts.times):
        t_reached = float(sol.t[-1]) if sol.t.size else t0
        raise SolverError(f"{opts.method} integration failed: {sol.message}",
                          t_reached=t_reached, status=sol.status, nfev=sol.nfev)

    fields = [DensityField(init.grid, sol.y[:, k].reshape(init.grid.shape), float(t))
              for k, t in enumerate(sol.t)]
    lowest = min(f.min() for f in fields)
    if lowest < CFG.NEGATIVE_FLAG:
        logger.warning(f"Density undershoot {lowest:.3e} (below {CFG.NEGATIVE_FLAG:g})")
    drift = abs(fields[-1].mass() - mass0)
    logger.debug(f"solve_transient done: nfev={sol.nfev}, njev={sol.njev}, mass drift={drift:.2e}")
    return fields
