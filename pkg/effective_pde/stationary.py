"""
Zero-flux equilibria and the free-energy functional.

With no flux the chemical potential plus V is constant:

  log p + gamma p + V = C                  p = W(gamma e^{C-V}) / gamma
  log(p/(1-ap)) + ap/(1-ap) + V = C        q = W(a e^{C-V}),  p = q / (a (1+q))

W is the principal Lambert function. C is found by Newton on the mass,
d mass / dC = ∫ p / D(p).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import lambertw

import config as CFG
from errors import FreeEnergyError, NewtonDivergence
from .field import DensityField
from .grid import Grid
from .model import ModelKind, ModelSpec

logger = logging.getLogger("confined_diffusion.pde")

_MAX_NEWTON_STEP = 10.0


@dataclass
class EquilibriumDensity:
    """Stationary field together with its chemical-potential constant C."""
    field: DensityField
    constant: float


def _potential_on(model: ModelSpec, grid: Grid) -> np.ndarray:
    """V at the nodes, broadcast to the grid shape."""
    if model.potential is None:
        if model.force is not None:
            raise ValueError("Zero-flux equilibrium needs a potential, not a bare force field")
        return np.zeros(grid.shape)
    v = np.asarray(model.potential(grid.nodes), dtype=float)
    if grid.dim == 2:
        v = np.repeat(v[:, None], grid.n_points, axis=1)
    return v


def density_from_potential(model: ModelSpec, y: np.ndarray) -> np.ndarray:
    """Invert mu(p) = y pointwise."""
    if model.kind is ModelKind.HARD_RODS:
        a = model.gamma
        if a == 0.0:
            return np.exp(y)
        q = lambertw(a * np.exp(y)).real
        return q / (a * (1.0 + q))
    if model.gamma == 0.0:
        return np.exp(y)
    return lambertw(model.gamma * np.exp(y)).real / model.gamma


def steady_state_noflux(model: ModelSpec, n_points: int = CFG.PDE_GRID_POINTS,
                        grid: Optional[Grid] = None) -> EquilibriumDensity:
    """
    Stationary density with zero flux and the model's mass.

    The grid is no-flux regardless of model.bc (the closed cell).
    Raises NewtonDivergence with the last density when C does not converge.
    """
    grid = grid or Grid(n_points, "noflux", model.dim)
    v = _potential_on(model, grid)
    target = model.mass

    boltzmann = grid.integrate(np.exp(-(v - v.min())))
    c = math.log(target / boltzmann) + v.min() + model.gamma * target
    residual = float("nan")
    for iteration in range(1, CFG.STEADY_MAX_ITER + 1):
        p = density_from_potential(model, c - v)
        residual = grid.integrate(p) - target
        if abs(residual) < CFG.STEADY_NEWTON_TOL * max(1.0, target):
            logger.debug(f"steady state: C={c:.12g} after {iteration} Newton steps")
            return EquilibriumDensity(DensityField(grid, p), c)
        slope = grid.integrate(p / model.diffusivity(p))
        step = -residual / slope
        c += max(-_MAX_NEWTON_STEP, min(_MAX_NEWTON_STEP, step))
    raise NewtonDivergence(
        "Zero-flux equilibrium: mass constraint not met",
        last_iterate=p, residual=abs(residual), iterations=CFG.STEADY_MAX_ITER)


def free_energy(field: DensityField, model: ModelSpec) -> float:
    """∫ e(p) + V p over the domain (trapezoid rule)."""
    p = field.values
    if np.any(p <= 0.0):
        raise FreeEnergyError(
            f"Free energy needs a positive density, min value {p.min():.3e} at t={field.time:g}")
    if model.kind is ModelKind.HARD_RODS and np.any(model.gamma * p >= 1.0):
        raise FreeEnergyError(f"Hard-rod density exceeds close packing (a p >= 1) at t={field.time:g}")
    integrand = model.energy_density(p) + _potential_on(model, field.grid) * p
    return field.grid.integrate(integrand)
