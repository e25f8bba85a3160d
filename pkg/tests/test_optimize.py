import pytest

from coefficients import Case, g_of_h, lane_width, optimal_h, subdivision_gain
from errors import DomainError, InfeasibleSplitError


@pytest.mark.parametrize("case, expected", [(Case.NC2, 1.47), (Case.NC3, 1.28), (Case.PP, 1.2)])
def test_optimal_width(case: Case, expected: float) -> None:
    h_star, g_max = optimal_h(case)
    assert h_star == pytest.approx(expected, abs=0.01)
    assert g_max == pytest.approx(g_of_h(case, h_star))
    assert g_max > g_of_h(case, h_star - 0.2)
    assert g_max > g_of_h(case, h_star + 0.2)


def test_optimal_width_rejects_rect() -> None:
    with pytest.raises(DomainError):
        optimal_h(Case.RECT)


def test_lane_widths() -> None:
    assert lane_width(Case.NC2, 4.0, 2) == pytest.approx(1.5)
    assert lane_width(Case.NC3, 3.6, 4) == pytest.approx(1.3)
    assert lane_width(Case.PP, 2.0, 1) == pytest.approx(2.0)


def test_subdivision_gains() -> None:
    assert subdivision_gain(Case.NC2, 4.0, 2) == pytest.approx(0.07, abs=0.01)
    assert subdivision_gain(Case.NC3, 3.6, 4) == pytest.approx(0.19, abs=0.01)


def test_split_errors() -> None:
    with pytest.raises(DomainError):
        lane_width(Case.NC3, 3.6, 3)
    with pytest.raises(InfeasibleSplitError):
        lane_width(Case.NC2, 0.5, 2)
    with pytest.raises(DomainError):
        lane_width(Case.NC2, 2.0, 0)
