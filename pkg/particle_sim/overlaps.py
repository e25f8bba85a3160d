"""
Overlap detection and symmetric separation.

A pair closer than eps is pushed apart along the line of centres, each
particle by half the penetration. One pass handles the overlapping pairs of
every realization in lexicographic (i, j) order, re-measuring each pair when
its turn comes; walls are re-applied after each pass. Chains of contacts
shrink geometrically per pass, so a fixed pass count leaves a small residual that
is counted, never fatal.

Candidate pairs come from all i < j for small N and from a uniform cell list
(cells no smaller than eps, periodic wrap on the channel axis) otherwise.
"""

import itertools
import logging
from functools import lru_cache
from typing import Tuple

import numpy as np

import config as CFG
from .box import ChannelBox
from .ensemble import ParticleEnsemble

logger = logging.getLogger("confined_diffusion.particles")

PairArrays = Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


@lru_cache(maxsize=16)
def _dense_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    i, j = np.triu_indices(n, k=1)
    i.setflags(write=False)
    j.setflags(write=False)
    return i, j


def cell_list_pairs(positions: np.ndarray, box: ChannelBox) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Candidate pairs (r, i, j), i < j, from same or adjacent cells.

    Sorted lexicographically, without duplicates.
    """
    n_real, n, d = positions.shape
    n_cells = np.maximum(1, np.floor(box.widths / box.epsilon).astype(np.int64))
    widths = np.where(box.widths > 0.0, box.widths, 1.0)
    scaled = (positions.reshape(-1, d) - box.lower) / widths * n_cells
    idx = np.clip(np.floor(scaled).astype(np.int64), 0, n_cells - 1)
    total_cells = int(np.prod(n_cells))
    realization = np.repeat(np.arange(n_real, dtype=np.int64), n)
    key = realization * total_cells + np.ravel_multi_index(idx.T, n_cells)

    order = np.argsort(key, kind="stable")
    counts = np.bincount(key, minlength=n_real * total_cells)
    starts = np.cumsum(counts) - counts
    particle = np.arange(n_real * n, dtype=np.int64)

    firsts, seconds = [], []
    for offset in itertools.product((-1, 0, 1), repeat=d):
        nb = idx + np.asarray(offset)
        valid = np.ones(len(nb), dtype=bool)
        for axis in range(d):
            if axis == 0 and box.periodic:
                nb[:, 0] %= n_cells[0]
            else:
                valid &= (nb[:, axis] >= 0) & (nb[:, axis] < n_cells[axis])
        nkey = realization[valid] * total_cells + np.ravel_multi_index(nb[valid].T, n_cells)
        cnt = counts[nkey]
        p = np.repeat(particle[valid], cnt)
        within = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        q = order[np.repeat(starts[nkey], cnt) + within]
        keep = p < q
        firsts.append(p[keep])
        seconds.append(q[keep])

    span = n_real * n
    codes = np.unique(np.concatenate(firsts) * span + np.concatenate(seconds))
    p, q = np.divmod(codes, span)
    return p // n, p % n, q % n


def overlapping_pairs(positions: np.ndarray, box: ChannelBox,
                      tol: float = CFG.OVERLAP_TOL) -> PairArrays:
    """(r, i, j, penetration) of every pair with eps - distance > tol."""
    n_real, n, _ = positions.shape
    eps = box.epsilon
    if n < 2 or eps == 0.0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty, np.empty(0)
    if n <= CFG.DENSE_PAIR_LIMIT:
        i, j = _dense_pairs(n)
        delta = box.minimal_image(positions[:, j] - positions[:, i])
        penetration = eps - np.sqrt(np.einsum("rpd,rpd->rp", delta, delta))
        r, p = np.nonzero(penetration > tol)
        return r, i[p], j[p], penetration[r, p]
    r, i, j = cell_list_pairs(positions, box)
    delta = box.minimal_image(positions[r, j] - positions[r, i])
    penetration = eps - np.sqrt(np.einsum("pd,pd->p", delta, delta))
    hit = penetration > tol
    return r[hit], i[hit], j[hit], penetration[hit]


def _separate(positions: np.ndarray, box: ChannelBox, r: np.ndarray, i: np.ndarray,
              j: np.ndarray, tol: float) -> None:
    """One sequential sweep over the listed pairs; realizations advance together."""
    eps = box.epsilon
    rank = np.arange(r.size) - np.searchsorted(r, r, side="left")
    for k in range(int(rank.max()) + 1):
        sel = rank == k
        rr, ii, jj = r[sel], i[sel], j[sel]
        delta = box.minimal_image(positions[rr, jj] - positions[rr, ii])
        dist = np.sqrt(np.einsum("pd,pd->p", delta, delta))
        act = eps - dist > tol
        if not act.any():
            continue
        rr, ii, jj, delta, dist = rr[act], ii[act], jj[act], delta[act], dist[act]
        unit = np.zeros_like(delta)
        unit[:, 0] = 1.0                      # coincident centres split along the channel
        moving = dist > 0.0
        unit[moving] = delta[moving] / dist[moving, None]
        shift = 0.5 * (eps - dist)[:, None] * unit
        positions[rr, ii] -= shift
        positions[rr, jj] += shift


def resolve_overlaps(ens: ParticleEnsemble, passes: int = CFG.OVERLAP_PASSES,
                     tol: float = CFG.OVERLAP_TOL) -> ParticleEnsemble:
    """
    Up to `passes` separation sweeps with wall handling after each.

    Pairs still overlapping afterwards are added to ens.counters.
    """
    ens.counters.checked_steps += ens.n_realizations
    if ens.n_particles < 2 or ens.epsilon == 0.0:
        return ens
    r = np.empty(0)
    for _ in range(passes):
        r, i, j, _ = overlapping_pairs(ens.positions, ens.box, tol)
        if r.size == 0:
            return ens
        _separate(ens.positions, ens.box, r, i, j, tol)
        ens.confine()
    r, i, j, penetration = overlapping_pairs(ens.positions, ens.box, tol)
    if r.size:
        ens.counters.unresolved_pairs += int(r.size)
        ens.counters.unresolved_steps += int(np.unique(r).size)
        ens.counters.max_penetration = max(ens.counters.max_penetration, float(penetration.max()))
        logger.debug(f"step {ens.steps}: {r.size} pairs still overlapping after {passes} passes "
                     f"(max penetration {penetration.max():.3e})")
    return ens
