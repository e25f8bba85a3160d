"""
Metropolis–Hastings Sampler — Hard Discs in a Narrow Channel

Target: exp(-sum_i V(x_i)) on non-overlapping configurations of N discs of
diameter eps in the two-dimensional channel. The chain works in the
narrow-domain variables

  x in [-1/2, 1/2)  (periodic, for the overlap image)
  y = Y / eps in [-h/2, h/2]

where discs i, j overlap when dx^2 + eps^2 dy^2 < eps^2.

Single-particle proposals are uniform in a square of half-width delta.
During burn-in delta is rescaled every CFG.MH_TUNE_INTERVAL proposals to
keep acceptance in [CFG.MH_ACCEPT_LOW, CFG.MH_ACCEPT_HIGH]. After burn-in
all N positions are recorded once every N proposals.

Hot path is a pure-Python loop over Python floats; random numbers are
drawn from numpy in chunks.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

import config as CFG
from errors import DomainError, SetupError

logger = logging.getLogger("confined_diffusion.mh")


@dataclass
class MHResult:
    counts: np.ndarray            # (bins, ybins) recorded positions
    batch_counts: np.ndarray      # (batches, bins, ybins)
    x_edges: np.ndarray
    y_edges: np.ndarray
    acceptance: float             # after burn-in
    delta: float                  # tuned proposal half-width
    samples: int                  # recorded configurations

    def marginal(self) -> np.ndarray:
        """Density along the channel (integrates to 1 over x)."""
        line = self.counts.sum(axis=1).astype(float)
        return line / (line.sum() * np.diff(self.x_edges))

    def marginal_stderr(self) -> np.ndarray:
        """Batch-means standard error of marginal()."""
        line = self.batch_counts.sum(axis=2).astype(float)
        totals = line.sum(axis=1, keepdims=True)
        dens = line / (np.where(totals > 0, totals, 1.0) * np.diff(self.x_edges))
        b = dens.shape[0]
        return dens.std(axis=0, ddof=1) / math.sqrt(b) if b > 1 else np.zeros(dens.shape[1])

    def transverse(self) -> np.ndarray:
        """Density of y over [-h/2, h/2] (integrates to 1)."""
        col = self.counts.sum(axis=0).astype(float)
        return col / (col.sum() * np.diff(self.y_edges))

    def transverse_stderr(self) -> np.ndarray:
        col = self.batch_counts.sum(axis=1).astype(float)
        totals = col.sum(axis=1, keepdims=True)
        dens = col / (np.where(totals > 0, totals, 1.0) * np.diff(self.y_edges))
        b = dens.shape[0]
        return dens.std(axis=0, ddof=1) / math.sqrt(b) if b > 1 else np.zeros(dens.shape[1])

    @property
    def x_centers(self) -> np.ndarray:
        return 0.5 * (self.x_edges[:-1] + self.x_edges[1:])


class _Uniforms:
    """Chunked uniform draws as a Python list (cheap to index)."""

    def __init__(self, rng: np.random.Generator):
        self._rng = rng
        self._buf = []
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._rng.random(CFG.MH_RNG_CHUNK).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u


class _CellList:
    """Particles bucketed by x into cells at least eps wide (periodic)."""

    def __init__(self, eps: float):
        self.n = max(1, int(math.floor(1.0 / eps))) if eps > 0.0 else 1
        self.cells = [set() for _ in range(self.n)]

    def cell(self, x: float) -> int:
        c = int((x + 0.5) * self.n)
        return c if c < self.n else self.n - 1

    def neighbours(self, c: int):
        n = self.n
        if n < 3:
            for s in self.cells:
                yield from s
            return
        yield from self.cells[c - 1]
        yield from self.cells[c]
        yield from self.cells[(c + 1) % n]


def _wrap(x: float) -> float:
    x = (x + 0.5) % 1.0 - 0.5
    return x - 1.0 if x >= 0.5 else x


def _initial(n: int, eps: float, h: float, uni: _Uniforms, cells: _CellList):
    xs, ys = [], []
    eps2 = eps * eps
    limit = CFG.REJECTION_ATTEMPTS_PER_PARTICLE * n
    attempts = 0
    for k in range(n):
        while True:
            attempts += 1
            if attempts > limit:
                raise SetupError(f"Could not place {n} discs of diameter {eps} without overlap")
            x = uni.next() - 0.5
            y = (uni.next() - 0.5) * h
            c = cells.cell(x)
            clash = False
            if eps > 0.0:
                for q in cells.neighbours(c):
                    dx = xs[q] - x
                    dx -= round(dx)
                    dy = ys[q] - y
                    if dx * dx + eps2 * dy * dy < eps2:
                        clash = True
                        break
            if not clash:
                break
        xs.append(x)
        ys.append(y)
        cells.cells[c].add(k)
    return xs, ys


def mh_sample(potential: Optional[Callable[[float], float]], n_particles: int, epsilon: float,
              h: float, steps: int = CFG.MH_DEFAULT_STEPS, seed: int = 0,
              bins: int = CFG.DEFAULT_BINS, ybins: int = CFG.MH_DEFAULT_YBINS) -> MHResult:
    """
    Run one chain and histogram the recorded positions over (x, y/eps).

    `potential` is V(x) along the channel (None for V = 0).
    """
    if n_particles < 1 or steps < 1:
        raise DomainError(f"Need N >= 1 and steps >= 1, got N={n_particles}, steps={steps}")
    if epsilon < 0.0 or not h > 0.0:
        raise DomainError(f"Need eps >= 0 and h > 0, got eps={epsilon}, h={h}")
    if n_particles * epsilon >= 1.0:
        raise DomainError(f"{n_particles} discs of diameter {epsilon} do not fit along the channel")

    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed])))
    uni = _Uniforms(rng)
    cells = _CellList(epsilon)
    xs, ys = _initial(n_particles, epsilon, h, uni, cells)
    v = potential if potential is not None else (lambda x: 0.0)
    energies = [float(v(x)) for x in xs]

    n = n_particles
    half_h = 0.5 * h
    eps2 = epsilon * epsilon
    delta = CFG.MH_INITIAL_DELTA
    burn = int(CFG.MH_BURN_FRACTION * steps)
    counts = np.zeros((bins, ybins), dtype=np.int64)
    n_batches = CFG.MH_BATCHES
    batch_counts = np.zeros((n_batches, bins, ybins), dtype=np.int64)
    sample_steps = steps - burn
    records_total = max(1, sample_steps // n)

    window_accepts = 0
    accepted = 0
    recorded = 0

    for step in range(steps):
        k = int(uni.next() * n)
        if k == n:
            k = n - 1
        x_old = xs[k]
        y_old = ys[k]
        x_new = _wrap(x_old + delta * (2.0 * uni.next() - 1.0))
        y_new = y_old + delta * (2.0 * uni.next() - 1.0)
        u = uni.next()
        ok = -half_h <= y_new <= half_h
        if ok and epsilon > 0.0:
            c_new = cells.cell(x_new)
            for q in cells.neighbours(c_new):
                if q == k:
                    continue
                dx = xs[q] - x_new
                dx -= round(dx)
                dy = ys[q] - y_new
                if dx * dx + eps2 * dy * dy < eps2:
                    ok = False
                    break
        if ok:
            e_new = float(v(x_new))
            d_e = e_new - energies[k]
            if d_e > 0.0 and u >= math.exp(-d_e):
                ok = False
        if ok:
            c_old = cells.cell(x_old)
            c_new = cells.cell(x_new)
            if c_old != c_new:
                cells.cells[c_old].discard(k)
                cells.cells[c_new].add(k)
            xs[k] = x_new
            ys[k] = y_new
            energies[k] = e_new
            window_accepts += 1
            if step >= burn:
                accepted += 1

        if step < burn:
            if (step + 1) % CFG.MH_TUNE_INTERVAL == 0:
                rate = window_accepts / CFG.MH_TUNE_INTERVAL
                if rate < CFG.MH_ACCEPT_LOW:
                    delta /= CFG.MH_TUNE_FACTOR
                elif rate > CFG.MH_ACCEPT_HIGH:
                    delta = min(delta * CFG.MH_TUNE_FACTOR, CFG.MH_MAX_DELTA)
                logger.debug(f"MH tuning at step {step + 1}: acceptance {rate:.3f}, delta={delta:.4g}")
                window_accepts = 0
        elif (step - burn + 1) % n == 0:
            batch = min(recorded * n_batches // records_total, n_batches - 1)
            for x, y in zip(xs, ys):
                ix = int((x + 0.5) * bins)
                iy = int((y + half_h) / h * ybins)
                ix = ix if ix < bins else bins - 1
                iy = min(max(iy, 0), ybins - 1)
                batch_counts[batch, ix, iy] += 1
            recorded += 1

    counts[...] = batch_counts.sum(axis=0)
    acceptance = accepted / sample_steps if sample_steps else 0.0
    logger.info(f"MH chain: N={n}, eps={epsilon:g}, h={h:g}, {steps} steps, "
                f"acceptance {acceptance:.3f}, delta={delta:.4g}, {recorded} recorded sweeps")
    return MHResult(
        counts=counts,
        batch_counts=batch_counts,
        x_edges=np.linspace(-0.5, 0.5, bins + 1),
        y_edges=np.linspace(-half_h, half_h, ybins + 1),
        acceptance=acceptance,
        delta=delta,
        samples=recorded,
    )
