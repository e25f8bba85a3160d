import numpy as np
import pytest

from coefficients import Case, Geometry, alpha, alpha_oracle
import config as CFG
from errors import DomainError, SolverError


@pytest.mark.parametrize("case, h", [
    (Case.NC2, 0.3), (Case.NC2, 0.9), (Case.NC2, 1.5), (Case.NC2, 4.0),
    (Case.PP, 0.3), (Case.PP, 0.9), (Case.PP, 1.5), (Case.PP, 4.0),
    (Case.NC3, 0.5), (Case.NC3, 0.65), (Case.NC3, 0.8), (Case.NC3, 1.6),
])
def test_oracle_matches_closed_form(case: Case, h: float) -> None:
    geom = Geometry(case, h)
    assert alpha_oracle(geom) == pytest.approx(alpha(geom), rel=1e-3)


@pytest.mark.parametrize("h, m", [(1.5, 2.5), (0.5, 2.0), (2.0, 0.5)])
def test_oracle_rect(h: float, m: float) -> None:
    geom = Geometry(Case.RECT, h, m)
    assert alpha_oracle(geom) == pytest.approx(alpha(geom), rel=1e-3)


def test_oracle_needs_positive_width() -> None:
    with pytest.raises(DomainError):
        alpha_oracle(Geometry(Case.NC2, 0.0))


@pytest.mark.slow
@pytest.mark.parametrize("case", [Case.NC2, Case.NC3, Case.PP])
def test_oracle_twenty_widths(case: Case) -> None:
    for h in np.linspace(0.1, 5.0, 20):
        geom = Geometry(case, float(h))
        assert alpha_oracle(geom) == pytest.approx(alpha(geom), rel=1e-3)


@pytest.mark.parametrize("geom", [
    Geometry(Case.NC2, 1.5), Geometry(Case.PP, 0.9),
    Geometry(Case.NC3, 0.8), Geometry(Case.RECT, 0.7, 1.2),
])
def test_oracle_refines_to_tolerance(geom: Geometry) -> None:
    assert alpha_oracle(geom) == pytest.approx(alpha(geom), rel=1e-5)


def test_oracle_raises_when_refinement_stalls(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setattr(CFG, "ORACLE_RTOL", 0.0)
    monkeypatch.setattr(CFG, "ORACLE_MAX_LEVEL", 2)
    with pytest.raises(SolverError, match="not converged after 2 doublings") as info:
        alpha_oracle(Geometry(Case.NC3, 1.2))
    assert info.value.status == 2
