"""
Euler–Maruyama Ensembles

  X <- X + f(X) dt + sqrt(2 dt) xi,   xi ~ N(0, I)

followed by wall reflection and overlap separation. Realizations are run
in blocks of CFG.REALIZATIONS_PER_BLOCK; block b draws from
Philox(SeedSequence([seed, b])), so results do not depend on the number of
worker processes. Blocks return partial sums that are merged in block order.
"""

import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

import config as CFG
from coefficients import Case, Geometry
from ratchet.potential import potential_sf_derivative
from .box import ChannelBox
from .ensemble import OverlapCounters, ParticleEnsemble, sample_initial
from .overlaps import resolve_overlaps

logger = logging.getLogger("confined_diffusion.particles")

ForceField = Callable[[np.ndarray], np.ndarray]


# =========================================================
# Force fields (module level so they pickle into workers)
# =========================================================

@dataclass(frozen=True)
class TiltedForce:
    """f = -V'(x, F0) along the channel, zero across it."""
    f0: float

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        out = np.zeros_like(positions)
        out[..., 0] = -potential_sf_derivative(positions[..., 0], self.f0)
        return out


@dataclass(frozen=True)
class ConstantForce:
    vector: Tuple[float, ...]

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.vector, dtype=float), positions.shape)


# =========================================================
# One step
# =========================================================

def em_step(ens: ParticleEnsemble, dt: float, force: Optional[ForceField] = None,
            noise: Union[None, float, np.ndarray] = None,
            passes: int = CFG.OVERLAP_PASSES) -> ParticleEnsemble:
    """
    Advance every realization by dt, in place.

    `noise` replaces the Gaussian draw when given (0.0 gives the
    deterministic drift step); otherwise ens.rng is advanced.
    """
    if not dt > 0.0:
        raise ValueError(f"Time step must be > 0, got dt={dt}")
    xi = ens.rng.standard_normal(ens.positions.shape) if noise is None else noise
    if force is not None:
        ens.positions += force(ens.positions) * dt
    ens.positions += math.sqrt(2.0 * dt) * xi
    ens.confine()
    resolve_overlaps(ens, passes)
    ens.time += dt
    ens.steps += 1
    return ens


# =========================================================
# Ensemble runs
# =========================================================

@dataclass(frozen=True)
class ParticleSetup:
    """Physical configuration of one Monte Carlo experiment."""
    geom: Geometry
    n_particles: int
    epsilon: float
    periodic: bool = False
    segment: Tuple[float, float] = (-0.5 * CFG.INITIAL_SEGMENT, 0.5 * CFG.INITIAL_SEGMENT)
    force: Optional[ForceField] = None
    passes: int = CFG.OVERLAP_PASSES

    def box(self) -> ChannelBox:
        return ChannelBox(self.geom, self.epsilon, self.periodic)


@dataclass(frozen=True)
class HistogramSpec:
    bins: int = CFG.DEFAULT_BINS                 # along the channel
    realizations: int = CFG.DEFAULT_REALIZATIONS
    times: Tuple[float, ...] = (0.0, CFG.DEFAULT_T_END)
    ybins: int = 0                               # transverse bins over y/eps, 0 = off

    def __post_init__(self):
        if self.bins < 4:
            raise ValueError(f"Histogram needs at least 4 bins, got {self.bins}")
        if self.realizations < 1:
            raise ValueError(f"Need at least one realization, got {self.realizations}")
        if not self.times or min(self.times) < 0.0:
            raise ValueError(f"Output times must be nonnegative, got {self.times}")
        object.__setattr__(self, "times", tuple(sorted(float(t) for t in self.times)))


@dataclass
class _BlockSums:
    sum_h: np.ndarray
    sum_h2: np.ndarray
    sum_msd: np.ndarray
    sum_msd2: np.ndarray
    sum_y: Optional[np.ndarray]
    sum_plane: Optional[np.ndarray]
    counters: OverlapCounters
    realizations: int


@dataclass
class EnsembleResult:
    """Ensemble-averaged histograms at the output times."""
    times: List[float]
    edges: np.ndarray
    density: np.ndarray                  # (T, bins), each row integrates to 1
    stderr: np.ndarray                   # (T, bins) Monte Carlo standard errors
    realizations: int
    counters: OverlapCounters = field(default_factory=OverlapCounters)
    msd: Optional[np.ndarray] = None     # (T,) channel-axis mean-squared displacement
    msd_stderr: Optional[np.ndarray] = None
    y_edges: Optional[np.ndarray] = None
    transverse: Optional[np.ndarray] = None   # (T, ybins) density of y/eps
    plane: Optional[np.ndarray] = None        # (T, bins, bins) PP only, over (x, y)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])


def _transverse_axis(case: Case) -> int:
    return 2 if case is Case.PP else 1


def _output_steps(times: Sequence[float], dt: float) -> List[int]:
    steps = []
    for t in times:
        k = int(round(t / dt))
        if abs(k * dt - t) > 1e-9 * max(1.0, t):
            raise ValueError(f"Output time {t} is not a multiple of dt={dt}")
        steps.append(k)
    return steps


def _bin_index(x: np.ndarray, lo: float, width: float, bins: int) -> np.ndarray:
    return np.clip(np.floor((x - lo) / width * bins).astype(np.int64), 0, bins - 1)


def _run_block(task) -> _BlockSums:
    setup, spec, dt, seed, block, size = task
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    box = setup.box()
    ens = ParticleEnsemble(sample_initial(box, setup.n_particles, size, rng, setup.segment), box, rng)

    n_t = len(spec.times)
    n = setup.n_particles
    bw = 1.0 / spec.bins
    sums = _BlockSums(
        sum_h=np.zeros((n_t, spec.bins)), sum_h2=np.zeros((n_t, spec.bins)),
        sum_msd=np.zeros(n_t), sum_msd2=np.zeros(n_t),
        sum_y=np.zeros((n_t, spec.ybins)) if spec.ybins and setup.geom.h > 0 else None,
        sum_plane=np.zeros((n_t, spec.bins, spec.bins)) if setup.geom.case is Case.PP else None,
        counters=ens.counters, realizations=size)
    rows = np.repeat(np.arange(size, dtype=np.int64), n)

    for k, target in enumerate(_output_steps(spec.times, dt)):
        while ens.steps < target:
            em_step(ens, dt, setup.force, passes=setup.passes)
        x = ens.positions[..., 0].ravel()
        idx = _bin_index(x, -0.5, 1.0, spec.bins)
        counts = np.bincount(rows * spec.bins + idx, minlength=size * spec.bins)
        h = counts.reshape(size, spec.bins) / (n * bw)
        sums.sum_h[k] += h.sum(axis=0)
        sums.sum_h2[k] += (h * h).sum(axis=0)

        per_real = ens.squared_displacement().mean(axis=1)
        sums.sum_msd[k] += per_real.sum()
        sums.sum_msd2[k] += (per_real * per_real).sum()

        if sums.sum_y is not None:
            half = 0.5 * setup.geom.h
            y = ens.positions[..., _transverse_axis(setup.geom.case)].ravel() / setup.epsilon
            sums.sum_y[k] += np.bincount(_bin_index(y, -half, 2.0 * half, spec.ybins),
                                         minlength=spec.ybins)
        if sums.sum_plane is not None:
            iy = _bin_index(ens.positions[..., 1].ravel(), -0.5, 1.0, spec.bins)
            sums.sum_plane[k] += np.bincount(idx * spec.bins + iy,
                                             minlength=spec.bins ** 2).reshape(spec.bins, spec.bins)
    return sums


def run_ensemble(setup: ParticleSetup, spec: HistogramSpec, dt: float = CFG.DEFAULT_DT,
                 seed: int = 0, workers: Optional[int] = CFG.MAX_WORKERS) -> EnsembleResult:
    """
    Histograms of the channel coordinate, averaged over spec.realizations runs.

    Deterministic for a given seed. Raises SetupError when the initial
    region cannot hold N non-overlapping particles.
    """
    if not dt > 0.0:
        raise ValueError(f"Time step must be > 0, got dt={dt}")
    per_block = CFG.REALIZATIONS_PER_BLOCK
    n_blocks = -(-spec.realizations // per_block)
    tasks = [(setup, spec, dt, int(seed), b, min(per_block, spec.realizations - b * per_block))
             for b in range(n_blocks)]
    workers = workers or os.cpu_count() or 1
    logger.info(f"run_ensemble: {setup.geom.case.value} h={setup.geom.h:g}, N={setup.n_particles}, "
                f"eps={setup.epsilon:g}, R={spec.realizations} in {n_blocks} blocks, "
                f"{min(workers, n_blocks)} workers")
    if workers == 1 or n_blocks == 1:
        partials = [_run_block(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, n_blocks)) as pool:
            partials = list(pool.map(_run_block, tasks))

    total = partials[0]
    counters = OverlapCounters()
    for part in partials:
        counters.merge(part.counters)
    for part in partials[1:]:
        total.sum_h += part.sum_h
        total.sum_h2 += part.sum_h2
        total.sum_msd += part.sum_msd
        total.sum_msd2 += part.sum_msd2
        if total.sum_y is not None:
            total.sum_y += part.sum_y
        if total.sum_plane is not None:
            total.sum_plane += part.sum_plane

    r = spec.realizations
    mean = total.sum_h / r
    msd = total.sum_msd / r
    if r > 1:
        var = np.maximum(total.sum_h2 - r * mean * mean, 0.0) / (r - 1)
        msd_var = np.maximum(total.sum_msd2 - r * msd * msd, 0.0) / (r - 1)
    else:
        var = np.zeros_like(mean)
        msd_var = np.zeros_like(msd)

    result = EnsembleResult(
        times=list(spec.times),
        edges=np.linspace(-0.5, 0.5, spec.bins + 1),
        density=mean,
        stderr=np.sqrt(var / r),
        realizations=r,
        counters=counters,
        msd=msd,
        msd_stderr=np.sqrt(msd_var / r),
    )
    if total.sum_y is not None:
        half = 0.5 * setup.geom.h
        result.y_edges = np.linspace(-half, half, spec.ybins + 1)
        result.transverse = total.sum_y / (r * setup.n_particles * (2.0 * half / spec.ybins))
    if total.sum_plane is not None:
        result.plane = total.sum_plane / (r * setup.n_particles * (1.0 / spec.bins) ** 2)

    if counters.unresolved_pairs:
        logger.warning(
            f"{counters.unresolved_pairs} overlapping pairs left after {setup.passes} passes in "
            f"{counters.unresolved_steps} of {counters.checked_steps} realization-steps "
            f"(max penetration {counters.max_penetration:.3e}, eps={setup.epsilon:g})")
    return result
