"""
Tilted Smoluchowski–Feynman potential on the unit cell.

  V(x, F0)  = sin(2 pi x) + 0.25 sin(4 pi x) - F0 x
  V'(x, F0) = 2 pi cos(2 pi x) + pi cos(4 pi x) - F0

V(x + 1) = V(x) - F0, so the force -V' is periodic.
"""

import math
from functools import partial
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


def potential_sf(x, f0: float = 0.0):
    return np.sin(TWO_PI * x) + 0.25 * np.sin(2.0 * TWO_PI * x) - f0 * x


def potential_sf_derivative(x, f0: float = 0.0):
    return TWO_PI * np.cos(TWO_PI * x) + math.pi * np.cos(2.0 * TWO_PI * x) - f0


def tilted(f0: float) -> Callable:
    """V(., F0) as a one-argument callable (what ModelSpec expects)."""
    return partial(potential_sf, f0=float(f0))
