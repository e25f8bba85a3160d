"""
Flux of the linear (g_phi = 0) periodic problem by quadrature.

With the integrating factor e^V and V(b) = V(a) - F0 on the cell [a, b]:

  1/J = I e^{F0} / expm1(F0) * ∫_a^b e^{-V}  -  ∫_a^b e^{-V(x)} ∫_a^x e^{V(s)} ds dx
  I   = ∫_a^b e^{V}

and J = 0 at F0 = 0.
"""

import math

from scipy.integrate import dblquad, quad

import config as CFG
from .potential import potential_sf

CELL = (-0.5, 0.5)


def linear_flux_oracle(f0: float) -> float:
    if f0 == 0.0:
        return 0.0
    a, b = CELL
    tol = CFG.RATCHET_ORACLE_TOL
    v = lambda x: potential_sf(x, f0)
    growth, _ = quad(lambda x: math.exp(v(x)), a, b, epsabs=tol, epsrel=tol, limit=200)
    decay, _ = quad(lambda x: math.exp(-v(x)), a, b, epsabs=tol, epsrel=tol, limit=200)
    nested, _ = dblquad(lambda s, x: math.exp(v(s) - v(x)), a, b, lambda x: a, lambda x: x,
                        epsabs=tol, epsrel=tol)
    return 1.0 / (growth * math.exp(f0) / math.expm1(f0) * decay - nested)
