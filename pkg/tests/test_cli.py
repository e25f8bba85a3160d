import pytest

from app import main
from harness import read_csv, schema_line


def test_coef_single_width(tmp_path) -> None:
    out = tmp_path / "coef.csv"
    assert main(["-q", "coef", "--h", "1.47", "--n", "30", "--eps", "0.01", "--out", str(out)]) == 0
    columns, rows = read_csv(out)
    assert columns == ["h", "alpha", "g", "phi", "excluded_volume"]
    assert len(rows) == 1
    assert rows[0][0] == pytest.approx(1.47)


def test_coef_table_to_stdout(capsys) -> None:
    assert main(["-q", "coef", "--case", "nc3", "--table", "0.5:2:4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == schema_line()
    assert len(lines) == 2 + 4


def test_invalid_input_exits_2() -> None:
    assert main(["-q", "coef", "--h", "-1"]) == 2
    assert main(["-q", "ratchet", "--gphi=-0.5", "--f0", "1"]) == 2


def test_pde(tmp_path) -> None:
    out = tmp_path / "pde.csv"
    assert main(["-q", "pde", "--tend", "0.01", "--grid", "51", "--out", str(out)]) == 0
    columns, rows = read_csv(out)
    assert columns == ["t", "x", "p"]
    assert len(rows) == 2 * 51


def test_ratchet(tmp_path) -> None:
    out, prof = tmp_path / "j.csv", tmp_path / "p.csv"
    assert main(["-q", "ratchet", "--gphi", "0,0.5", "--f0=-1,1", "--grid", "64",
                 "--out", str(out), "--profiles", str(prof)]) == 0
    _, rows = read_csv(out)
    assert [(r[0], r[1]) for r in rows] == [(0.0, -1.0), (0.0, 1.0), (0.5, -1.0), (0.5, 1.0)]
    _, profile_rows = read_csv(prof)
    assert len(profile_rows) == 4 * 64


def test_mh(tmp_path) -> None:
    out, marg = tmp_path / "mh.csv", tmp_path / "m.csv"
    assert main(["-q", "mh", "--n", "5", "--eps", "0.01", "--h", "1", "--steps", "2000",
                 "--bins", "8", "--ybins", "2", "--out", str(out), "--marginal-out", str(marg)]) == 0
    columns, rows = read_csv(out)
    assert columns == ["x", "y", "count"]
    assert len(rows) == 16
    _, marginal = read_csv(marg)
    assert len(marginal) == 8


def test_list_configs(capsys) -> None:
    assert main(["-q", "list-configs"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert "selfcheck.cfg\ttransient\tselfcheck" in lines


def test_run_selfcheck(configs_dir, tmp_path) -> None:
    assert main(["-q", "run", "--config", str(configs_dir / "selfcheck.cfg"),
                 "--out", str(tmp_path)]) == 0
    assert (tmp_path / "selfcheck" / "report.txt").exists()


def test_run_failing_check_exits_1(tmp_path) -> None:
    cfg = tmp_path / "strict.cfg"
    cfg.write_text("[experiment]\nname = strict\nkind = transient\nh = 3\n"
                   "models = narrow, point\nreference = narrow\ntimes = 0, 0.05\n"
                   "max_rel_l2 = 1e-12\n", encoding="utf-8")
    assert main(["-q", "run", "--config", str(cfg), "--out", str(tmp_path)]) == 1
