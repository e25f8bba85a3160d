"""
Particle ensembles: R independent realizations of N hard spheres.

positions has shape (R, N, d). Every realization evolves independently; the
arrays are shared only so numpy can vectorize across realizations.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

import config as CFG
from errors import SetupError
from .box import ChannelBox, reflect_walls

logger = logging.getLogger("confined_diffusion.particles")


@dataclass
class OverlapCounters:
    """Bookkeeping of pairs still overlapping after the separation passes."""
    unresolved_pairs: int = 0          # pair-steps above the tolerance
    unresolved_steps: int = 0          # realization-steps with any such pair
    checked_steps: int = 0             # realization-steps examined
    max_penetration: float = 0.0       # eps - distance, worst seen

    @property
    def unresolved_fraction(self) -> float:
        return self.unresolved_steps / self.checked_steps if self.checked_steps else 0.0

    def merge(self, other: "OverlapCounters") -> None:
        self.unresolved_pairs += other.unresolved_pairs
        self.unresolved_steps += other.unresolved_steps
        self.checked_steps += other.checked_steps
        self.max_penetration = max(self.max_penetration, other.max_penetration)


@dataclass
class ParticleEnsemble:
    """Centres, diameter and generator of a block of realizations."""
    positions: np.ndarray              # (R, N, d)
    box: ChannelBox
    rng: np.random.Generator
    time: float = 0.0
    steps: int = 0
    image: Optional[np.ndarray] = None         # (R, N) channel-axis wraps, periodic only
    origin: Optional[np.ndarray] = None        # (R, N) channel coordinate at t = 0
    counters: OverlapCounters = field(default_factory=OverlapCounters)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[2] != self.box.dim:
            raise ValueError(
                f"positions must have shape (R, N, {self.box.dim}), got {self.positions.shape}")
        if self.image is None:
            self.image = np.zeros(self.positions.shape[:2])
        if self.origin is None:
            self.origin = self.positions[..., 0].copy()

    @property
    def epsilon(self) -> float:
        return self.box.epsilon

    @property
    def n_realizations(self) -> int:
        return self.positions.shape[0]

    @property
    def n_particles(self) -> int:
        return self.positions.shape[1]

    def confine(self) -> None:
        """Reflect/wrap into the box, recording channel-axis wraps."""
        if self.box.periodic:
            before = self.positions[..., 0].copy()
            reflect_walls(self.positions, self.box)
            self.image += np.round(before - self.positions[..., 0])
        else:
            reflect_walls(self.positions, self.box)

    def unwrapped_x(self) -> np.ndarray:
        return self.positions[..., 0] + self.image

    def squared_displacement(self) -> np.ndarray:
        """(R, N) squared channel-axis displacement since t = 0."""
        return (self.unwrapped_x() - self.origin) ** 2


def sample_initial(box: ChannelBox, n_particles: int, n_realizations: int,
                   rng: np.random.Generator,
                   segment: Tuple[float, float] = (-0.5 * CFG.INITIAL_SEGMENT,
                                                   0.5 * CFG.INITIAL_SEGMENT)) -> np.ndarray:
    """
    Overlap-free uniform centres with the channel coordinate in `segment`.

    Particles are placed one at a time; a candidate overlapping an earlier
    particle is redrawn. Raises SetupError after
    CFG.REJECTION_ATTEMPTS_PER_PARTICLE * N attempts in any realization.
    """
    lo = box.lower.copy()
    hi = box.upper.copy()
    lo[0] = max(lo[0], segment[0])
    hi[0] = min(hi[0], segment[1])
    if not hi[0] > lo[0]:
        raise SetupError(f"Initial segment {segment} does not intersect the channel")
    d = box.dim
    eps2 = box.epsilon ** 2
    limit = CFG.REJECTION_ATTEMPTS_PER_PARTICLE * n_particles
    positions = np.empty((n_realizations, n_particles, d))
    attempts = np.zeros(n_realizations, dtype=np.int64)

    for i in range(n_particles):
        pending = np.arange(n_realizations)
        while pending.size:
            trial = lo + (hi - lo) * rng.random((pending.size, d))
            attempts[pending] += 1
            if i > 0 and eps2 > 0.0:
                delta = box.minimal_image(positions[pending, :i] - trial[:, None, :])
                ok = np.all(np.einsum("rnd,rnd->rn", delta, delta) >= eps2, axis=1)
            else:
                ok = np.ones(pending.size, dtype=bool)
            positions[pending[ok], i] = trial[ok]
            pending = pending[~ok]
            if pending.size and attempts[pending].max() > limit:
                raise SetupError(
                    f"Rejection sampling gave up placing particle {i + 1} of {n_particles} "
                    f"after {limit} attempts (initial region too dense)")
    logger.debug(f"initial configuration: {n_realizations} x {n_particles} particles, "
                 f"{attempts.sum()} draws")
    return positions
