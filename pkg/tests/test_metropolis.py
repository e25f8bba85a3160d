import numpy as np
import pytest
from scipy.integrate import trapezoid

from errors import DomainError
from particle_sim import mh_sample
from ratchet import potential_sf


def test_single_free_particle_is_uniform() -> None:
    chain = mh_sample(None, 1, 0.01, 1.0, steps=400_000, seed=3, bins=10, ybins=4)
    np.testing.assert_allclose(chain.marginal(), 1.0, atol=0.05)
    np.testing.assert_allclose(chain.transverse(), 1.0, atol=0.05)
    assert chain.samples == 360_000
    assert 0.0 < chain.acceptance < 1.0


def test_histograms_are_normalized() -> None:
    chain = mh_sample(None, 20, 0.01, 2.0, steps=50_000, seed=1, bins=12, ybins=5)
    assert np.sum(chain.marginal() * np.diff(chain.x_edges)) == pytest.approx(1.0)
    assert np.sum(chain.transverse() * np.diff(chain.y_edges)) == pytest.approx(1.0)
    assert chain.y_edges[0] == pytest.approx(-1.0) and chain.y_edges[-1] == pytest.approx(1.0)
    assert chain.counts.sum() == chain.samples * 20
    assert chain.marginal_stderr().shape == (12,)


def test_point_chain_runs() -> None:
    chain = mh_sample(None, 5, 0.0, 1.0, steps=10_000, seed=2)
    assert chain.counts.sum() == chain.samples * 5


def test_chain_is_reproducible() -> None:
    a = mh_sample(None, 10, 0.02, 1.5, steps=20_000, seed=11)
    b = mh_sample(None, 10, 0.02, 1.5, steps=20_000, seed=11)
    c = mh_sample(None, 10, 0.02, 1.5, steps=20_000, seed=12)
    np.testing.assert_array_equal(a.counts, b.counts)
    assert a.delta == b.delta
    assert not np.array_equal(a.counts, c.counts)


def test_rejects_impossible_packing() -> None:
    with pytest.raises(DomainError):
        mh_sample(None, 10, 0.1, 1.0, steps=100)
    with pytest.raises(DomainError):
        mh_sample(None, 0, 0.01, 1.0, steps=100)
    with pytest.raises(DomainError):
        mh_sample(None, 5, 0.01, 0.0, steps=100)


@pytest.mark.slow
def test_single_particle_follows_boltzmann() -> None:
    f0 = 2.5
    chain = mh_sample(lambda x: potential_sf(x, f0), 1, 0.0, 1.0, steps=1_000_000,
                      seed=5, bins=10, ybins=2)
    fine = np.linspace(-0.5, 0.5, 2001)
    z = trapezoid(np.exp(-potential_sf(fine, f0)), fine)
    expected = []
    for lo, hi in zip(chain.x_edges[:-1], chain.x_edges[1:]):
        x = np.linspace(lo, hi, 201)
        expected.append(trapezoid(np.exp(-potential_sf(x, f0)), x) / (z * (hi - lo)))
    expected = np.array(expected)
    np.testing.assert_allclose(chain.marginal(), expected, atol=0.1 * expected.max())
