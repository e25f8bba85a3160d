import math

import numpy as np
import pytest

from coefficients import (
    GOLDEN_BREAK, HALF_SQRT2_BREAK, Case, Geometry, alpha, branch_values, bundle,
    coefficient_table, g_of_h, limiting_coefficients, optimal_h, volume_fraction,
)
from errors import DiluteRegimeError, DomainError


def test_reference_channel_bundle() -> None:
    b = bundle(Geometry(Case.NC2, 3.0), 30, 0.01)
    assert b.phi == pytest.approx(0.0589, abs=5e-4)
    assert b.g == pytest.approx(4.58, abs=0.05)
    assert b.excluded_volume == pytest.approx(3.0 * b.alpha)
    assert b.gamma == pytest.approx(b.g * b.phi)


@pytest.mark.parametrize("case, value", [(Case.NC2, 2.0), (Case.NC3, 2.0), (Case.PP, math.pi)])
def test_zero_width_limits(case: Case, value: float) -> None:
    assert alpha(Geometry(case, 0.0)) == value
    assert alpha(Geometry(case, 1e-6)) == pytest.approx(value, rel=1e-4)


def test_nc2_small_width_expansion() -> None:
    # alpha = 2 - h^2/6 + O(h^4) below h = 1
    for h in (1e-4, 1e-2, 0.05):
        assert alpha(Geometry(Case.NC2, h)) == pytest.approx(2.0 - h * h / 6.0, abs=1e-6)


@pytest.mark.parametrize("case", [Case.NC2, Case.NC3, Case.PP])
def test_precision_switch_is_seamless(case: Case) -> None:
    below = alpha(Geometry(case, 0.1 - 1e-9))
    above = alpha(Geometry(case, 0.1))
    assert below == pytest.approx(above, rel=1e-7)


@pytest.mark.parametrize("case, h", [
    (Case.NC2, 1.0),
    (Case.PP, 1.0),
    (Case.NC3, 1.0),
    (Case.NC3, GOLDEN_BREAK),
    (Case.NC3, HALF_SQRT2_BREAK),
])
def test_branch_continuity(case: Case, h: float) -> None:
    left, right = branch_values(case, h)
    assert left == pytest.approx(right, abs=1e-10)


def test_branch_values_rejects_non_breakpoints() -> None:
    with pytest.raises(DomainError):
        branch_values(Case.NC2, 0.5)


def test_wide_channel_asymptotes() -> None:
    h = 1e6
    assert h * alpha(Geometry(Case.NC2, h)) == pytest.approx(math.pi, rel=1e-4)
    assert h * h * alpha(Geometry(Case.NC3, h)) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-4)
    assert h * alpha(Geometry(Case.PP, h)) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-4)


def test_asymptote_error_shrinks_with_width() -> None:
    limits = [(Case.NC2, 1, math.pi), (Case.NC3, 2, 4.0 * math.pi / 3.0), (Case.PP, 1, 4.0 * math.pi / 3.0)]
    for case, power, limit in limits:
        errors = [abs(h ** power * alpha(Geometry(case, h)) / limit - 1.0) for h in (1e3, 1e4, 1e5, 1e6)]
        assert errors[0] < 1e-2
        assert all(b < a for a, b in zip(errors, errors[1:]))
        assert errors[-1] < errors[0] / 100.0


@pytest.mark.parametrize("case", [Case.NC2, Case.NC3, Case.PP])
def test_alpha_positive_over_all_widths(case: Case) -> None:
    values = np.array([alpha(Geometry(case, float(h))) for h in np.logspace(-6, 6, 121)])
    assert np.all(values > 0.0)


@pytest.mark.parametrize("case, h_star", [(Case.NC2, 1.475), (Case.NC3, 1.275), (Case.PP, 1.2)])
def test_g_has_single_interior_maximum(case: Case, h_star: float) -> None:
    grid = np.geomspace(1e-3, 100.0, 400)
    g = np.array([g_of_h(case, float(h)) for h in grid])
    peak = int(np.argmax(g))
    assert 0 < peak < grid.size - 1
    steps = np.diff(g)
    assert np.all(steps[:peak] > 0.0)
    assert np.all(steps[peak:] < 0.0)
    assert grid[peak - 1] < optimal_h(case)[0] < grid[peak + 1]
    assert optimal_h(case)[0] == pytest.approx(h_star, abs=0.01)


def test_alpha_positive_and_decreasing_past_one() -> None:
    for case in (Case.NC2, Case.NC3, Case.PP):
        values = [alpha(Geometry(case, h)) for h in (1.0, 1.5, 2.0, 4.0, 8.0)]
        assert all(v > 0.0 for v in values)
        assert all(b < a for a, b in zip(values, values[1:]))


def test_rect_square_matches_nc3() -> None:
    for h in (0.4, 2.0, 3.5):
        assert alpha(Geometry(Case.RECT, h, h)) == pytest.approx(alpha(Geometry(Case.NC3, h)), rel=1e-12)


def test_rect_side_swap() -> None:
    assert alpha(Geometry(Case.RECT, 2.0, 0.5)) == alpha(Geometry(Case.RECT, 0.5, 2.0))


def test_rect_both_sides_below_one_rejected() -> None:
    with pytest.raises(DomainError, match=r"h >= 1 or m >= 1, or for a square section h == m"):
        alpha(Geometry(Case.RECT, 0.5, 0.7))


def test_rect_long_side_tends_to_parallel_plates() -> None:
    h, m = 0.8, 1e3
    assert alpha(Geometry(Case.RECT, h, m)) * m == pytest.approx(alpha(Geometry(Case.PP, h)), rel=1e-3)


def test_rect_zero_width_limit() -> None:
    m = 2.0
    assert alpha(Geometry(Case.RECT, 0.0, m)) == pytest.approx((math.pi * m - 4.0 / 3.0) / (m * m))


def test_invalid_geometry() -> None:
    with pytest.raises(DomainError):
        Geometry(Case.NC2, -1.0)
    with pytest.raises(DomainError):
        Geometry(Case.RECT, 1.0, 0.0)
    with pytest.raises(DomainError):
        Case.parse("hexagon")
    assert Case.parse(" NC3 ") is Case.NC3


def test_dilute_regime_guard() -> None:
    with pytest.raises(DiluteRegimeError):
        bundle(Geometry(Case.NC2, 0.0), 1000, 0.01)
    with pytest.raises(DomainError):
        bundle(Geometry(Case.NC2, 1.0), 10, 0.0)


def test_volume_fraction_formulas() -> None:
    n, eps = 20, 0.01
    assert volume_fraction(Geometry(Case.NC2, 2.0), n, eps) == pytest.approx(n * eps * math.pi / 12.0)
    assert volume_fraction(Geometry(Case.NC3, 2.0), n, eps) == pytest.approx(n * eps * math.pi / 54.0)
    assert volume_fraction(Geometry(Case.PP, 2.0), n, eps) == pytest.approx(n * eps ** 2 * math.pi / 18.0)
    assert volume_fraction(Geometry(Case.RECT, 2.0, 3.0), n, eps) == pytest.approx(
        n * eps * math.pi / 72.0)


def test_limiting_coefficients() -> None:
    nc2 = limiting_coefficients(Case.NC2)
    assert (nc2.point, nc2.single_file, nc2.bulk) == (0.0, 2.0, 4.0)
    pp = limiting_coefficients("pp")
    assert pp.single_file is None
    assert pp.bulk == 8.0
    assert limiting_coefficients(Case.NC3).bulk == 8.0


def test_narrowest_channel_g_tends_to_eight_over_pi() -> None:
    b = bundle(Geometry(Case.NC2, 0.0), 10, 0.01)
    assert b.g == pytest.approx(8.0 / math.pi)


def test_coefficient_table_rows() -> None:
    rows = coefficient_table(Geometry(Case.PP, 1.0), [0.5, 1.0, 2.0], 30, 0.01)
    assert [h for h, _ in rows] == [0.5, 1.0, 2.0]
    assert rows[1][1].alpha == pytest.approx(alpha(Geometry(Case.PP, 1.0)))
