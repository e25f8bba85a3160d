"""
Cosine-series solution of the heat equation on [-1/2, 1/2] with no-flux
ends, for initial data uniform on [lo, hi] with unit mass:

  p(x, t) = 1 + sum_k a_k exp(-k^2 pi^2 t) cos(k pi (x + 1/2))
  a_k     = 2 / (k pi (hi - lo)) [sin(k pi (hi + 1/2)) - sin(k pi (lo + 1/2))]
"""

import numpy as np

import config as CFG


def heat_series(x: np.ndarray, t: float, lo: float = -0.5 * CFG.INITIAL_SEGMENT,
                hi: float = 0.5 * CFG.INITIAL_SEGMENT, modes: int = 200) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    k = np.arange(1, modes + 1)
    kp = k * np.pi
    a = 2.0 / (kp * (hi - lo)) * (np.sin(kp * (hi + 0.5)) - np.sin(kp * (lo + 0.5)))
    decay = np.exp(-kp * kp * t)
    return 1.0 + np.cos(np.outer(x + 0.5, kp)) @ (a * decay)
