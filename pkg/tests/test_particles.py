import numpy as np
import pytest

import config
from coefficients import Case, Geometry
from errors import SetupError
from particle_sim import (
    ChannelBox, ConstantForce, HistogramSpec, ParticleEnsemble, ParticleSetup, TiltedForce,
    cell_list_pairs, em_step, overlapping_pairs, reflect_walls, resolve_overlaps, run_ensemble,
    sample_initial,
)


def _ensemble(points, box: ChannelBox, rng) -> ParticleEnsemble:
    return ParticleEnsemble(np.array([points], dtype=float), box, rng)


# =========================================================
# Box and walls
# =========================================================

def test_box_extents() -> None:
    assert ChannelBox(Geometry(Case.NC2, 3.0), 0.01).widths == pytest.approx([1.0, 0.03])
    assert ChannelBox(Geometry(Case.NC3, 2.0), 0.01).widths == pytest.approx([1.0, 0.02, 0.02])
    assert ChannelBox(Geometry(Case.PP, 2.0), 0.01).widths == pytest.approx([1.0, 1.0, 0.02])
    assert ChannelBox(Geometry(Case.RECT, 2.0, 4.0), 0.01).widths == pytest.approx([1.0, 0.02, 0.04])


def test_reflect_walls() -> None:
    box = ChannelBox(Geometry(Case.NC2, 1.0), 0.1)    # walls at y = +-0.05
    pos = np.array([[[0.0, 0.06], [0.1, -0.07], [0.2, 0.16], [0.3, 0.01]]])
    reflect_walls(pos, box)
    np.testing.assert_allclose(pos[0, :, 1], [0.04, -0.03, -0.04, 0.01], atol=1e-12)
    np.testing.assert_allclose(pos[0, :, 0], [0.0, 0.1, 0.2, 0.3])


def test_channel_ends_reflect_or_wrap() -> None:
    closed = ChannelBox(Geometry(Case.NC2, 1.0), 0.1)
    pos = np.array([[[0.6, 0.0], [-0.55, 0.0]]])
    reflect_walls(pos, closed)
    np.testing.assert_allclose(pos[0, :, 0], [0.4, -0.45], atol=1e-12)

    periodic = ChannelBox(Geometry(Case.NC2, 1.0), 0.1, periodic=True)
    pos = np.array([[[0.6, 0.0], [-0.55, 0.0]]])
    reflect_walls(pos, periodic)
    np.testing.assert_allclose(pos[0, :, 0], [-0.4, 0.45], atol=1e-12)


def test_zero_width_walls_pin_the_coordinate() -> None:
    box = ChannelBox(Geometry(Case.NC2, 0.0), 0.1)
    pos = np.array([[[0.0, 0.02]]])
    reflect_walls(pos, box)
    assert pos[0, 0, 1] == 0.0


def test_periodic_wraps_are_tracked(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 1.0), 0.0, periodic=True)
    ens = _ensemble([[0.45, 0.0]], box, rng)
    ens.positions[0, 0, 0] += 0.1
    ens.confine()
    assert ens.positions[0, 0, 0] == pytest.approx(-0.45)
    assert ens.unwrapped_x()[0, 0] == pytest.approx(0.55)
    assert ens.squared_displacement()[0, 0] == pytest.approx(0.01)


# =========================================================
# Overlaps
# =========================================================

def test_pair_is_separated_symmetrically(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 3.0), 0.1)
    ens = _ensemble([[0.0, 0.0], [0.06, 0.0]], box, rng)
    resolve_overlaps(ens)
    x = ens.positions[0, :, 0]
    assert x[1] - x[0] == pytest.approx(0.1, abs=1e-12)
    assert x.mean() == pytest.approx(0.03, abs=1e-12)
    assert ens.counters.unresolved_pairs == 0


def test_coincident_centres_split_along_channel(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 3.0), 0.1)
    ens = _ensemble([[0.0, 0.0], [0.0, 0.0]], box, rng)
    resolve_overlaps(ens)
    np.testing.assert_allclose(ens.positions[0, :, 0], [-0.05, 0.05], atol=1e-12)


def test_chain_converges_with_enough_passes(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 0.0), 0.1)
    ens = _ensemble([[0.0, 0.0], [0.08, 0.0], [0.16, 0.0]], box, rng)
    resolve_overlaps(ens, passes=60)
    r, _, _, _ = overlapping_pairs(ens.positions, box, tol=1e-9)
    assert r.size == 0


def test_unresolved_chain_is_counted(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 0.0), 0.1)
    ens = _ensemble([[0.0, 0.0], [0.05, 0.0], [0.1, 0.0], [0.15, 0.0]], box, rng)
    resolve_overlaps(ens, passes=1)
    assert ens.counters.unresolved_pairs > 0
    assert ens.counters.unresolved_steps == 1
    assert 0.0 < ens.counters.max_penetration < 0.1


def test_cell_list_finds_every_overlap(rng) -> None:
    for periodic in (False, True):
        box = ChannelBox(Geometry(Case.NC2, 3.0), 0.05, periodic=periodic)
        pos = box.lower + (box.upper - box.lower) * rng.random((3, 80, 2))
        r, i, j = cell_list_pairs(pos, box)
        candidates = set(zip(r.tolist(), i.tolist(), j.tolist()))
        assert all(a < b for _, a, b in candidates)
        for real in range(3):
            for a in range(80):
                for b in range(a + 1, 80):
                    d = box.minimal_image(pos[real, b] - pos[real, a])
                    if np.hypot(*d) < box.epsilon:
                        assert (real, a, b) in candidates


def test_dense_and_cell_list_paths_agree(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 3.0), 0.05)
    pos = box.lower + (box.upper - box.lower) * rng.random((2, 100, 2))
    r, i, j, pen = overlapping_pairs(pos, box)
    for real, a, b, p in zip(r, i, j, pen):
        d = pos[real, b] - pos[real, a]
        assert box.epsilon - np.hypot(*d) == pytest.approx(p)
    brute = sum(
        1 for real in range(2) for a in range(100) for b in range(a + 1, 100)
        if box.epsilon - np.hypot(*(pos[real, b] - pos[real, a])) > config.OVERLAP_TOL)
    assert r.size == brute


# =========================================================
# Initial data and stepping
# =========================================================

def test_initial_configuration(rng) -> None:
    box = ChannelBox(Geometry(Case.NC3, 2.0), 0.01)
    pos = sample_initial(box, 30, 20, rng)
    assert pos.shape == (20, 30, 3)
    assert np.all(np.abs(pos[..., 0]) <= 0.1)
    assert np.all(box.contains(pos))
    r, _, _, _ = overlapping_pairs(pos, box)
    assert r.size == 0


def test_initial_configuration_too_dense(rng, monkeypatch) -> None:
    monkeypatch.setattr(config, "REJECTION_ATTEMPTS_PER_PARTICLE", 20)
    box = ChannelBox(Geometry(Case.NC2, 0.0), 0.1)
    with pytest.raises(SetupError):
        sample_initial(box, 5, 2, rng)


def test_deterministic_drift_step(rng) -> None:
    box = ChannelBox(Geometry(Case.NC2, 3.0), 0.01)
    ens = _ensemble([[0.0, 0.0], [0.2, 0.01]], box, rng)
    em_step(ens, 0.01, ConstantForce((1.0, 0.0)), noise=0.0)
    np.testing.assert_allclose(ens.positions[0, :, 0], [0.01, 0.21])
    assert ens.steps == 1
    assert ens.time == pytest.approx(0.01)
    with pytest.raises(ValueError):
        em_step(ens, 0.0)


def test_tilted_force_acts_along_channel() -> None:
    pos = np.zeros((1, 1, 3))
    f = TiltedForce(2.0)(pos)
    # -V'(0) = -(2 pi + pi - 2)
    assert f[0, 0, 0] == pytest.approx(-(3.0 * np.pi - 2.0))
    assert f[0, 0, 1] == 0.0 and f[0, 0, 2] == 0.0


# =========================================================
# Ensembles
# =========================================================

def _small_setup(**kw) -> ParticleSetup:
    return ParticleSetup(geom=Geometry(Case.NC2, 3.0), n_particles=5, epsilon=0.01, **kw)


def test_ensemble_is_reproducible() -> None:
    spec = HistogramSpec(bins=10, realizations=150, times=(0.0, 0.001))
    a = run_ensemble(_small_setup(), spec, dt=1e-4, seed=5, workers=1)
    b = run_ensemble(_small_setup(), spec, dt=1e-4, seed=5, workers=1)
    c = run_ensemble(_small_setup(), spec, dt=1e-4, seed=6, workers=1)
    np.testing.assert_array_equal(a.density, b.density)
    assert not np.array_equal(a.density[-1], c.density[-1])


def test_ensemble_does_not_depend_on_worker_count() -> None:
    spec = HistogramSpec(bins=10, realizations=250, times=(0.001,))
    one = run_ensemble(_small_setup(), spec, dt=1e-4, seed=9, workers=1)
    two = run_ensemble(_small_setup(), spec, dt=1e-4, seed=9, workers=2)
    np.testing.assert_array_equal(one.density, two.density)
    np.testing.assert_array_equal(one.stderr, two.stderr)


def test_histograms_are_normalized() -> None:
    spec = HistogramSpec(bins=20, realizations=100, times=(0.0, 0.002), ybins=6)
    res = run_ensemble(_small_setup(), spec, dt=1e-4, seed=1, workers=1)
    width = np.diff(res.edges)
    for row in res.density:
        assert np.sum(row * width) == pytest.approx(1.0)
    assert np.sum(res.transverse[-1] * np.diff(res.y_edges)) == pytest.approx(1.0)
    # at t = 0 every centre sits in [-0.1, 0.1]
    assert np.all(res.density[0][np.abs(res.centers) > 0.1] == 0.0)
    assert res.msd[0] == 0.0


def test_parallel_plates_give_plane_histogram() -> None:
    setup = ParticleSetup(geom=Geometry(Case.PP, 1.0), n_particles=4, epsilon=0.01)
    spec = HistogramSpec(bins=8, realizations=20, times=(0.001,))
    res = run_ensemble(setup, spec, dt=1e-4, seed=2, workers=1)
    assert res.plane.shape == (1, 8, 8)
    assert np.sum(res.plane[0]) * (1.0 / 8) ** 2 == pytest.approx(1.0)


def test_free_mean_squared_displacement() -> None:
    setup = ParticleSetup(geom=Geometry(Case.NC2, 3.0), n_particles=1, epsilon=0.01, periodic=True)
    spec = HistogramSpec(bins=10, realizations=2000, times=(0.01,))
    res = run_ensemble(setup, spec, dt=1e-4, seed=4, workers=1)
    assert res.msd[0] == pytest.approx(0.02, rel=0.1)
    assert abs(res.msd[0] - 0.02) < 5.0 * res.msd_stderr[0]


def test_histogram_spec_validation() -> None:
    with pytest.raises(ValueError):
        HistogramSpec(bins=2)
    with pytest.raises(ValueError):
        HistogramSpec(realizations=0)
    with pytest.raises(ValueError):
        run_ensemble(_small_setup(), HistogramSpec(times=(0.00015,)), dt=1e-4, workers=1)
