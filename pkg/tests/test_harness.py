from pathlib import Path

import numpy as np
import pytest

import harness.runner
from coefficients import bundle
from errors import ConfigError, DomainError, StageError
from harness import (
    Profile, bundled_configs, compare_densities, load_config, parse_float_list, read_csv,
    run_experiment, schema_line, write_csv,
)


def _write_cfg(tmp_path: Path, text: str, name: str = "exp.cfg") -> Path:
    path = tmp_path / name
    path.write_text("[experiment]\n" + text, encoding="utf-8")
    return path


# =========================================================
# Configs
# =========================================================

def test_bundled_configs_load(configs_dir) -> None:
    paths = bundled_configs()
    assert [p.name for p in paths] == sorted(p.name for p in configs_dir.glob("*.cfg"))
    assert len(paths) >= 9
    for path in paths:
        cfg = load_config(path)
        assert cfg.name == path.stem
        assert cfg.source == path


def test_parse_float_list() -> None:
    assert parse_float_list("0:1:3") == pytest.approx([0.0, 0.5, 1.0])
    assert parse_float_list("1, 2.5") == [1.0, 2.5]
    assert parse_float_list("4:9:1") == [4.0]
    assert parse_float_list("") == []
    with pytest.raises(ConfigError):
        parse_float_list("1:2")
    with pytest.raises(ConfigError):
        parse_float_list("a, b")


def test_config_defaults_and_labels(tmp_path) -> None:
    cfg = load_config(_write_cfg(tmp_path, "name = t\nkind = transient\nmodels = narrow, point, narrow\n"))
    assert cfg.labels() == ["narrow", "point", "narrow#2"]
    assert cfg.h == [3.0]
    assert not cfg.checks_requested()


def test_volume_fraction_fixes_diameter(tmp_path) -> None:
    cfg = load_config(_write_cfg(
        tmp_path, "name = s\nkind = sweep\nh = 1, 3\nn_particles = 100\nphi = 0.05\n"
                  "models = narrow, bulk\n"))
    for h in cfg.h:
        assert bundle(cfg.geometry(h), 100, cfg.epsilon_for(h)).phi == pytest.approx(0.05)


@pytest.mark.parametrize("text", [
    "name = x\nkind = transient\ncolour = red\n",
    "name = x\n",
    "name = x\nkind = teleport\n",
    "name = x\nkind = transient\nmodels = narrow, magic\n",
    "name = x\nkind = sweep\nmodels = point, bulk\n",
    "name = x\nkind = ratchet\ng_phi = 0\n",
    "name = x\nkind = equilibrium\ncase = nc3\n",
    "name = x\nkind = transient\nmodels = sde\ntimes = 0, 0.000015\ndt = 1e-5\n",
    "name = x\nkind = transient\nreference = sde\n",
    "name = x\nkind = transient\nh = -1\n",
    "name = x\nkind = transient\nbest_model = maybe\n",
    "name = x\nkind = ratchet\ng_phi = 0\nf0_values = -6, 2.5\nprofile_f0 = -6, 2.5\nprofile_agree_tol = 0.05\n",
])
def test_invalid_configs(tmp_path, text) -> None:
    with pytest.raises(ConfigError):
        load_config(_write_cfg(tmp_path, text))


def test_config_file_problems(tmp_path) -> None:
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")
    path = tmp_path / "extra.cfg"
    path.write_text("[experiment]\nname = x\nkind = transient\n[other]\na = 1\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(path)


# =========================================================
# Comparison
# =========================================================

def test_identical_profiles() -> None:
    x = np.linspace(-0.5, 0.5, 51)
    p = Profile(x, 1.0 + 0.3 * np.cos(2 * np.pi * x))
    rep = compare_densities(p, p)
    assert rep.rel_l2 == 0.0 and rep.linf == 0.0
    assert rep.z_scores.size == 0


def test_constant_offset() -> None:
    x = np.linspace(-0.5, 0.5, 11)
    rep = compare_densities(Profile(x, np.full(11, 1.01)), Profile(x, np.ones(11)))
    assert rep.linf == pytest.approx(0.01)
    assert rep.rel_l2 == pytest.approx(0.01)


def test_disjoint_domains() -> None:
    a = Profile(np.linspace(1.0, 2.0, 5), np.ones(5), lo=1.0, hi=2.0)
    b = Profile(np.linspace(-0.5, 0.5, 5), np.ones(5))
    with pytest.raises(DomainError):
        compare_densities(a, b)


def test_z_scores_on_histogram_bins() -> None:
    edges = np.linspace(-0.5, 0.5, 11)
    se = np.full(10, 0.1)
    se[0] = 0.0
    hist = Profile.from_histogram(edges, np.full(10, 1.2), se)
    fine = Profile(np.linspace(-0.5, 0.5, 101), np.ones(101))
    rep = compare_densities(hist, fine)
    assert rep.z_scores.shape == (10,)
    assert np.isnan(rep.z_scores[0])
    np.testing.assert_allclose(rep.z_scores[1:], 2.0)
    assert rep.max_abs_z == pytest.approx(2.0)


def test_profile_moments() -> None:
    x = np.linspace(-0.5, 0.5, 201)
    p = Profile(x, np.ones(201))
    assert p.mean() == pytest.approx(0.0, abs=1e-14)
    assert p.variance() == pytest.approx(1.0 / 12.0, rel=1e-4)


# =========================================================
# CSV
# =========================================================

def test_csv_header_and_read_back(tmp_path) -> None:
    path = write_csv(tmp_path / "sub" / "t.csv", ["a", "b", "c"],
                     [[1, 0.1, "x"], [True, 1.0 / 3.0, "y"]])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == schema_line() == "# confined-diffusion v1.0.0"
    assert lines[1:] == ["a,b,c", "1,0.1,x", "1,0.333333333333,y"]
    columns, rows = read_csv(path)
    assert columns == ["a", "b", "c"]
    assert rows == [[1.0, 0.1, "x"], [1.0, 0.333333333333, "y"]]


def test_csv_rejects_ragged_rows_and_foreign_files(tmp_path) -> None:
    with pytest.raises(ValueError):
        write_csv(tmp_path / "r.csv", ["a", "b"], [[1]])
    foreign = tmp_path / "f.csv"
    foreign.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_csv(foreign)


# =========================================================
# Runs
# =========================================================

def test_selfcheck_passes_and_replays(configs_dir, tmp_path) -> None:
    cfg = load_config(configs_dir / "selfcheck.cfg")
    first = run_experiment(cfg, tmp_path / "a")
    second = run_experiment(cfg, tmp_path / "b")
    assert first.passed and second.passed
    assert first.comparisons[-1].report.rel_l2 == 0.0
    for path in first.artifacts:
        twin = tmp_path / "b" / "selfcheck" / path.name
        assert path.read_bytes() == twin.read_bytes()
    assert "result: PASS" in (tmp_path / "a" / "selfcheck" / "report.txt").read_text()


def test_small_coefficients_run(tmp_path) -> None:
    cfg = load_config(_write_cfg(
        tmp_path, "name = coef\nkind = coefficients\ncase = nc3\nh = 0.5:3:6\nn_particles = 30\n"
                  "epsilon = 0.01\noracle_points = 3\noracle_rtol = 1e-3\n"
                  "continuity_tol = 1e-10\nh_star = 1.28\n"))
    report = run_experiment(cfg, tmp_path / "out")
    assert report.passed
    assert {c.name for c in report.checks} == {"h_star", "alpha vs oracle", "branch continuity"}
    columns, rows = read_csv(tmp_path / "out" / "coef" / "coefficients.csv")
    assert columns == ["h", "alpha", "excluded_volume", "g", "phi"]
    assert len(rows) == 6


def test_small_ratchet_run(tmp_path) -> None:
    cfg = load_config(_write_cfg(
        tmp_path, "name = r\nkind = ratchet\ng_phi = 0, 1\nf0_values = -6:6:25\n"
                  "profile_f0 = 2.5\nzero_flux_tol = 1e-8\noracle_rtol = 1e-6\nlinearizing = true\n"))
    report = run_experiment(cfg, tmp_path / "out")
    assert report.passed
    columns, rows = read_csv(tmp_path / "out" / "r" / "flux.csv")
    assert columns == ["g_phi", "f0", "j0"]
    assert len(rows) == 50
    assert [row.label for row in report.comparisons] == ["g_phi=1 F0=2.5"]


def test_ratchet_profile_checks(configs_dir, tmp_path) -> None:
    report = run_experiment(load_config(configs_dir / "ratchet_profiles.cfg"), tmp_path)
    assert report.passed
    names = [c.name for c in report.checks]
    assert names == ["linf/max(g_phi=0.15 vs 0, F0=-6)", "linf/max(g_phi=0.15 vs 0, F0=2.5) above"]
    agree, differ = report.checks
    assert agree.value < 0.05 < 0.10 < differ.value


def test_narrow_sweep_sits_between_single_file_and_bulk(tmp_path) -> None:
    cfg = load_config(_write_cfg(
        tmp_path, "name = s\nkind = sweep\ncase = nc2\nh = 0.5, 1\nn_particles = 100\nphi = 0.05\n"
                  "models = narrow, singlefile, bulk\nreference = narrow\ntimes = 0, 0.05\n"
                  "max_rel_l2 = 0.02\nmin_rel_l2_bulk = 0.10\n"))
    report = run_experiment(cfg, tmp_path / "out")
    names = {c.name for c in report.checks}
    assert names == {"rel_l2(singlefile vs narrow, h=0.5)", "rel_l2(bulk vs narrow, h=0.5) above"}
    assert report.passed


def test_failing_stage_is_named(tmp_path, monkeypatch) -> None:
    def boom(*args, **kwargs):
        raise RuntimeError("no table today")

    monkeypatch.setattr(harness.runner, "coefficient_table", boom)
    cfg = load_config(_write_cfg(tmp_path, "name = c\nkind = coefficients\nh = 1, 2\n"))
    with pytest.raises(StageError) as info:
        run_experiment(cfg, tmp_path / "out")
    assert info.value.stage == "table"
    assert isinstance(info.value.cause, RuntimeError)


@pytest.mark.slow
def test_width_sweep(configs_dir, tmp_path) -> None:
    report = run_experiment(load_config(configs_dir / "width_sweep.cfg"), tmp_path)
    assert report.passed


@pytest.mark.slow
def test_transient_against_particles(configs_dir, tmp_path) -> None:
    report = run_experiment(load_config(configs_dir / "transient_noflux.cfg"), tmp_path)
    assert report.passed


@pytest.mark.slow
def test_metropolis_equilibrium(configs_dir, tmp_path) -> None:
    report = run_experiment(load_config(configs_dir / "mh_equilibrium.cfg"), tmp_path)
    assert report.passed
