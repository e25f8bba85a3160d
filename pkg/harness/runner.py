"""
Experiment Runner

Runs the stages of one ExperimentConfig in order, writes plot-ready CSV
files under <out_dir>/<name>/ and collects comparisons and acceptance
checks into an ExperimentReport. A failing stage raises StageError naming
the stage; nothing after it runs.

Stages per kind:
  coefficients  table, optimum, oracle, continuity
  transient     one stage per model run, then compare
  sweep         one stage per width, then compare
  ratchet       flux curves, oracle, profiles
  equilibrium   mh, mh-point, stationary, compare
"""

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

import config as CFG
from coefficients import (
    GOLDEN_BREAK, HALF_SQRT2_BREAK, Case, alpha, alpha_oracle, branch_values,
    coefficient_table, optimal_h,
)
from effective_pde import (
    Grid, ModelKind, SolverOptions, build_model, solve_transient, steady_state_noflux, top_hat,
)
from errors import StageError
from particle_sim import HistogramSpec, ParticleSetup, TiltedForce, mh_sample, run_ensemble
from ratchet import (
    equilibrium_profile, linear_flux_oracle, nonlinearity, potential_sf, sweep_solutions, tilted,
)
from .compare import ComparisonReport, Profile, compare_densities, profile_deviation
from .csvio import write_csv
from .experiment import ExperimentConfig

logger = logging.getLogger("confined_diffusion.harness")


# =========================================================
# Report
# =========================================================

@dataclass
class CheckResult:
    name: str
    value: float
    threshold: float
    passed: bool


@dataclass
class ComparisonRow:
    label: str
    reference: str
    time: float
    h: float
    report: ComparisonReport


@dataclass
class ExperimentReport:
    name: str
    artifacts: List[Path] = field(default_factory=list)
    comparisons: List[ComparisonRow] = field(default_factory=list)
    checks: List[CheckResult] = field(default_factory=list)
    variances: List[tuple] = field(default_factory=list)    # (label, h, t, mean, variance)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str, value: float, threshold: float, passed: bool) -> None:
        self.checks.append(CheckResult(name, float(value), float(threshold), bool(passed)))
        level = logging.INFO if passed else logging.WARNING
        logger.log(level, f"check {name}: value={value:.6g} threshold={threshold:.6g} "
                          f"{'PASS' if passed else 'FAIL'}")

    def to_text(self) -> str:
        lines = [f"experiment: {self.name}"]
        for row in self.comparisons:
            lines.append(
                f"compare {row.label} vs {row.reference} h={row.h:g} t={row.time:g}: "
                f"rel_l2={row.report.rel_l2:.6g} linf={row.report.linf:.6g} "
                f"max|z|={row.report.max_abs_z:.4g}")
        for label, h, t, mean, var in self.variances:
            lines.append(f"moments {label} h={h:g} t={t:g}: mean={mean:.6g} variance={var:.6g}")
        for c in self.checks:
            lines.append(f"check {c.name}: {c.value:.6g} (threshold {c.threshold:.6g}) "
                         f"{'PASS' if c.passed else 'FAIL'}")
        lines.append(f"result: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines) + "\n"


@contextmanager
def _stage(name: str):
    logger.info(f"stage {name}: start")
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        logger.error(f"stage {name}: {type(exc).__name__}: {exc}")
        raise StageError(name, exc) from exc
    logger.info(f"stage {name}: done")


def _potential(cfg: ExperimentConfig):
    return tilted(cfg.f0) if cfg.potential == "sf" else None


def _base(label: str) -> str:
    return label.split("#", 1)[0]


# =========================================================
# Transient runs (shared by transient and sweep)
# =========================================================

def _pde_profiles(cfg: ExperimentConfig, kind: str, h: float, eps: float) -> List[Profile]:
    geom = cfg.geometry(h)
    model = build_model(kind, geom, cfg.n_particles, eps, cfg.bc, _potential(cfg))
    grid_points = cfg.grid if model.dim == 1 else min(cfg.grid, CFG.PDE_GRID_POINTS_2D)
    grid = Grid(grid_points, cfg.bc, model.dim)
    opts = SolverOptions(n_points=grid_points, times=tuple(cfg.times), scheme=cfg.scheme)
    fields = solve_transient(model, top_hat(grid), opts)
    return [Profile.from_field(f) for f in fields]


def _sde_profiles(cfg: ExperimentConfig, h: float, eps: float) -> List[Profile]:
    setup = ParticleSetup(
        geom=cfg.geometry(h),
        n_particles=cfg.n_particles,
        epsilon=eps,
        periodic=cfg.bc.value == "periodic",
        force=TiltedForce(cfg.f0) if cfg.potential == "sf" else None,
    )
    spec = HistogramSpec(bins=cfg.bins, realizations=cfg.realizations, times=tuple(cfg.times))
    result = run_ensemble(setup, spec, cfg.dt, cfg.seed, cfg.workers)
    return [Profile.from_histogram(result.edges, result.density[k], result.stderr[k], setup.periodic)
            for k in range(len(result.times))]


def _run_models(cfg: ExperimentConfig, h: float, report: ExperimentReport,
                stage_prefix: str = "") -> Dict[str, List[Profile]]:
    eps = cfg.epsilon_for(h)
    runs = {}
    for label in cfg.labels():
        kind = _base(label)
        with _stage(f"{stage_prefix}{label}"):
            if kind == "sde":
                runs[label] = _sde_profiles(cfg, h, eps)
            else:
                runs[label] = _pde_profiles(cfg, kind, h, eps)
        for t, prof in zip(sorted(cfg.times), runs[label]):
            report.variances.append((label, h, t, prof.mean(), prof.variance()))
    return runs


def _reference(cfg: ExperimentConfig) -> str:
    if cfg.reference is not None:
        return cfg.reference
    labels = cfg.labels()
    if cfg.kind == "sweep":
        return "narrow"
    return "sde" if "sde" in labels else labels[0]


def _write_profiles(path: Path, runs: Dict[str, List[Profile]], times: Sequence[float],
                    h: Optional[float] = None) -> Path:
    columns = (["h"] if h is not None else []) + ["model", "t", "x", "density", "stderr"]
    rows = []
    for label, profiles in runs.items():
        for t, prof in zip(times, profiles):
            se = prof.stderr if prof.stderr is not None else np.zeros_like(prof.values)
            for x, p, e in zip(prof.x, prof.values, se):
                rows.append(([h] if h is not None else []) + [label, t, x, p, e])
    return write_csv(path, columns, rows)


def _run_transient(cfg: ExperimentConfig, out: Path, report: ExperimentReport) -> None:
    h = cfg.h[0]
    times = sorted(cfg.times)
    runs = _run_models(cfg, h, report)
    report.artifacts.append(_write_profiles(out / "profiles.csv", runs, times))

    ref = _reference(cfg)
    with _stage("compare"):
        for label in cfg.labels():
            if label == ref:
                continue
            for k, t in enumerate(times):
                rep = compare_densities(runs[label][k], runs[ref][k])
                report.comparisons.append(ComparisonRow(label, ref, t, h, rep))
        report.artifacts.append(_write_comparisons(out / "comparisons.csv", report.comparisons))
        report.artifacts.append(_write_moments(out / "moments.csv", report.variances))

    final = [row for row in report.comparisons if row.time == times[-1]]
    if not final:
        return
    primary = final[0]
    if cfg.max_rel_l2 is not None:
        report.check(f"rel_l2({primary.label} vs {ref})", primary.report.rel_l2,
                     cfg.max_rel_l2, primary.report.rel_l2 <= cfg.max_rel_l2)
    if cfg.best_model and len(final) > 1:
        runner_up = min(row.report.rel_l2 for row in final[1:])
        report.check(f"best_model({primary.label})", primary.report.rel_l2, runner_up,
                     primary.report.rel_l2 < runner_up)


def _write_comparisons(path: Path, rows: Sequence[ComparisonRow]) -> Path:
    return write_csv(path, ["model", "reference", "h", "t", "rel_l2", "linf", "max_abs_z"],
                     [[r.label, r.reference, r.h, r.time, r.report.rel_l2, r.report.linf,
                       r.report.max_abs_z] for r in rows])


def _write_moments(path: Path, rows) -> Path:
    return write_csv(path, ["model", "h", "t", "mean", "variance"], [list(r) for r in rows])


# =========================================================
# Width sweep at fixed volume fraction
# =========================================================

def _is_monotone(values: Sequence[float], increasing: bool) -> bool:
    pairs = zip(values[:-1], values[1:])
    return all(b > a for a, b in pairs) if increasing else all(b < a for a, b in pairs)


def _run_sweep(cfg: ExperimentConfig, out: Path, report: ExperimentReport) -> None:
    times = sorted(cfg.times)
    ref = _reference(cfg)
    profile_rows = []
    for h in cfg.h:
        runs = _run_models(cfg, h, report, stage_prefix=f"h={h:g}/")
        for label, profiles in runs.items():
            prof = profiles[-1]
            profile_rows.extend([h, label, times[-1], x, p] for x, p in zip(prof.x, prof.values))
        with _stage(f"h={h:g}/compare"):
            for label in cfg.labels():
                if label != ref:
                    rep = compare_densities(runs[label][-1], runs[ref][-1])
                    report.comparisons.append(ComparisonRow(label, ref, times[-1], h, rep))
    report.artifacts.append(write_csv(out / "profiles.csv", ["h", "model", "t", "x", "density"],
                                      profile_rows))
    report.artifacts.append(_write_comparisons(out / "comparisons.csv", report.comparisons))
    report.artifacts.append(_write_moments(out / "moments.csv", report.variances))

    if cfg.monotone:
        for label, increasing in (("singlefile", True), ("bulk", False)):
            dist = [row.report.rel_l2 for row in report.comparisons if row.label == label]
            if len(dist) < 2:
                continue
            ok = _is_monotone(dist, increasing)
            trend = "increasing" if increasing else "decreasing"
            worst = min(np.diff(dist)) if increasing else -max(np.diff(dist))
            report.check(f"{trend}_in_h({label} vs {ref})", worst, 0.0, ok)
    if cfg.max_rel_l2 is not None:
        narrowest = [row for row in report.comparisons
                     if row.h == min(cfg.h) and row.label == "singlefile"]
        for row in narrowest:
            report.check(f"rel_l2(singlefile vs {ref}, h={row.h:g})", row.report.rel_l2,
                         cfg.max_rel_l2, row.report.rel_l2 <= cfg.max_rel_l2)
    if cfg.min_rel_l2_bulk is not None:
        narrowest = [row for row in report.comparisons
                     if row.h == min(cfg.h) and row.label == "bulk"]
        for row in narrowest:
            report.check(f"rel_l2(bulk vs {ref}, h={row.h:g}) above", row.report.rel_l2,
                         cfg.min_rel_l2_bulk, row.report.rel_l2 > cfg.min_rel_l2_bulk)


# =========================================================
# Ratchet
# =========================================================

def _run_ratchet(cfg: ExperimentConfig, out: Path, report: ExperimentReport) -> None:
    f0_all = sorted(set(cfg.f0_values) | set(cfg.profile_f0) | {0.0})
    flux_rows, profile_rows, r_rows = [], [], []
    curves: Dict[float, Dict[float, float]] = {}
    profiles: Dict[tuple, Profile] = {}
    for g in cfg.g_phi:
        with _stage(f"flux g_phi={g:g}"):
            sols = sweep_solutions(g, f0_all, CFG.RATCHET_GRID_POINTS)
        curves[g] = {s.problem.f0: s.j0 for s in sols}
        for s in sols:
            if s.problem.f0 in cfg.f0_values:
                flux_rows.append([g, s.problem.f0, s.j0])
            if s.problem.f0 in cfg.profile_f0:
                prof = Profile.from_field(s.density)
                profiles[(g, s.problem.f0)] = prof
                profile_rows.extend([g, s.problem.f0, x, p] for x, p in zip(prof.x, prof.values))
        r_rows.append([g, nonlinearity([(f, curves[g][f]) for f in cfg.f0_values])])

    report.artifacts.append(write_csv(out / "flux.csv", ["g_phi", "f0", "j0"], flux_rows))
    report.artifacts.append(write_csv(out / "nonlinearity.csv", ["g_phi", "R"], r_rows))
    if profile_rows:
        report.artifacts.append(write_csv(out / "profiles.csv", ["g_phi", "f0", "x", "density"],
                                          profile_rows))

    if cfg.zero_flux_tol is not None:
        worst = max(abs(curves[g][0.0]) for g in cfg.g_phi)
        report.check("max|J0(F0=0)|", worst, cfg.zero_flux_tol, worst < cfg.zero_flux_tol)
    if cfg.oracle_rtol is not None and 0.0 in curves:
        with _stage("oracle"):
            worst = 0.0
            for f0 in cfg.f0_values:
                exact = linear_flux_oracle(f0)
                err = abs(curves[0.0][f0] - exact)
                worst = max(worst, err / abs(exact) if exact != 0.0 else err)
        report.check("J0 vs oracle (g_phi=0)", worst, cfg.oracle_rtol, worst < cfg.oracle_rtol)
    if cfg.linearizing:
        ordered = [row[1] for row in sorted(r_rows)]
        ok = _is_monotone(ordered, increasing=False)
        worst = -max(np.diff(ordered)) if len(ordered) > 1 else 0.0
        report.check("R(g_phi) decreasing", worst, 0.0, ok)

    # profiles at each tilt against the first g_phi
    base = cfg.g_phi[0]
    for (g, f0), prof in sorted(profiles.items()):
        if g != base:
            rep = compare_densities(prof, profiles[(base, f0)])
            report.comparisons.append(ComparisonRow(f"g_phi={g:g} F0={f0:g}", f"g_phi={base:g}", 0.0, 0.0, rep))
    if profiles and len(cfg.g_phi) > 1:
        other = cfg.g_phi[1]
        agree_f0, differ_f0 = cfg.profile_f0[0], cfg.profile_f0[-1]
        if cfg.profile_agree_tol is not None:
            dev = profile_deviation(profiles[(other, agree_f0)], profiles[(base, agree_f0)])
            report.check(f"linf/max(g_phi={other:g} vs {base:g}, F0={agree_f0:g})", dev,
                         cfg.profile_agree_tol, dev < cfg.profile_agree_tol)
        if cfg.profile_differ_min is not None:
            dev = profile_deviation(profiles[(other, differ_f0)], profiles[(base, differ_f0)])
            report.check(f"linf/max(g_phi={other:g} vs {base:g}, F0={differ_f0:g}) above", dev,
                         cfg.profile_differ_min, dev > cfg.profile_differ_min)


# =========================================================
# Metropolis–Hastings equilibrium
# =========================================================

def _flat_sigma(transverse: np.ndarray, stderr: np.ndarray, h: float) -> float:
    """(chi^2 - dof) / sqrt(2 dof) of the transverse profile against 1/h."""
    ok = stderr > 0.0
    dof = int(ok.sum())
    if dof == 0:
        return 0.0
    chi2 = float(np.sum(((transverse[ok] - 1.0 / h) / stderr[ok]) ** 2))
    return (chi2 - dof) / math.sqrt(2.0 * dof)


def _run_equilibrium(cfg: ExperimentConfig, out: Path, report: ExperimentReport) -> None:
    h = cfg.h[0]
    eps = cfg.epsilon
    potential = (lambda x: potential_sf(x, cfg.f0)) if cfg.potential == "sf" else None
    with _stage("mh"):
        chain = mh_sample(potential, cfg.n_particles, eps, h, cfg.steps, cfg.seed,
                          cfg.bins, cfg.ybins)
    point = None
    if cfg.point_chain:
        with _stage("mh-point"):
            point = mh_sample(potential, cfg.n_particles, 0.0, h, cfg.steps, cfg.seed + 1,
                              cfg.bins, cfg.ybins)

    with _stage("stationary"):
        geom = cfg.geometry(h)
        narrow_gamma = build_model(ModelKind.NARROW, geom, cfg.n_particles, eps).gamma
        f0 = cfg.f0 if cfg.potential == "sf" else 0.0
        narrow = equilibrium_profile(narrow_gamma, f0, cfg.grid)
        sf_model = build_model(ModelKind.SINGLE_FILE, geom, cfg.n_particles, eps,
                               potential=_potential(cfg))
        single = steady_state_noflux(sf_model, cfg.grid)

    x_rows = []
    marg, marg_se = chain.marginal(), chain.marginal_stderr()
    narrow_p = Profile.from_field(narrow.field)
    single_p = Profile.from_field(single.field)
    for x, p, e, pn, ps in zip(chain.x_centers, marg, marg_se,
                               narrow_p.sample(chain.x_centers), single_p.sample(chain.x_centers)):
        x_rows.append([x, p, e, pn, ps])
    report.artifacts.append(write_csv(out / "marginal.csv",
                                      ["x", "mh", "mh_stderr", "narrow", "singlefile"], x_rows))
    y_centers = 0.5 * (chain.y_edges[:-1] + chain.y_edges[1:])
    t_fin, t_fin_se = chain.transverse(), chain.transverse_stderr()
    if point is not None:
        t_pt, t_pt_se = point.transverse(), point.transverse_stderr()
    else:
        t_pt = t_pt_se = np.full(y_centers.size, np.nan)
    report.artifacts.append(write_csv(
        out / "transverse.csv", ["y", "finite", "finite_stderr", "point", "point_stderr"],
        [list(r) for r in zip(y_centers, t_fin, t_fin_se, t_pt, t_pt_se)]))
    report.artifacts.append(write_csv(
        out / "stationary.csv", ["x", "narrow", "singlefile"],
        [list(r) for r in zip(narrow_p.x, narrow_p.values, single_p.sample(narrow_p.x))]))

    with _stage("compare"):
        mh_prof = Profile.from_histogram(chain.x_edges, marg, marg_se)
        rep = compare_densities(mh_prof, narrow.field)
        report.comparisons.append(ComparisonRow("mh", "narrow", 0.0, h, rep))
        rep_sf = compare_densities(mh_prof, single.field)
        report.comparisons.append(ComparisonRow("mh", "singlefile", 0.0, h, rep_sf))
    logger.info(f"MH acceptance {chain.acceptance:.3f}, {chain.samples} recorded sweeps")

    if cfg.max_rel_l2 is not None:
        report.check("rel_l2(mh vs narrow)", rep.rel_l2, cfg.max_rel_l2, rep.rel_l2 <= cfg.max_rel_l2)
    if cfg.flat_point_sigma is not None and point is not None:
        z = _flat_sigma(t_pt, t_pt_se, h)
        report.check("point transverse flat (sigma)", z, cfg.flat_point_sigma,
                     z <= cfg.flat_point_sigma)
    if cfg.wall_excess:
        n = t_fin.size
        wall = 0.5 * (t_fin[0] + t_fin[-1])
        centre = float(np.mean(t_fin[(n - 1) // 2:n // 2 + 1]))
        report.check("wall excess (wall - centre)", wall - centre, 0.0, wall > centre)
    if cfg.singlefile_flatter:
        spread_sf = float(np.ptp(single.field.values))
        spread = min(float(np.ptp(narrow.field.values)), float(np.ptp(marg)))
        report.check("singlefile spread below narrow and mh", spread_sf, spread, spread_sf < spread)


# =========================================================
# Coefficient tables
# =========================================================

def _run_coefficients(cfg: ExperimentConfig, out: Path, report: ExperimentReport) -> None:
    geom = cfg.geometry()
    with _stage("table"):
        table = coefficient_table(geom, cfg.h, cfg.n_particles, cfg.epsilon)
    report.artifacts.append(write_csv(
        out / "coefficients.csv", ["h", "alpha", "excluded_volume", "g", "phi"],
        [[h, b.alpha, b.excluded_volume, b.g, b.phi] for h, b in table]))

    if cfg.case is not Case.RECT:
        with _stage("optimum"):
            h_star, g_max = optimal_h(cfg.case)
        report.artifacts.append(write_csv(out / "optimum.csv", ["case", "h_star", "g_max"],
                                          [[cfg.case.value, h_star, g_max]]))
        if cfg.h_star is not None:
            report.check("h_star", h_star, cfg.h_star, abs(h_star - cfg.h_star) <= cfg.h_star_tol)

    if cfg.oracle_points > 0:
        with _stage("oracle"):
            lo, hi = min(cfg.h), max(cfg.h)
            rows = []
            for h in np.linspace(lo, hi, cfg.oracle_points):
                g = geom.with_h(float(h))
                closed, brute = alpha(g), alpha_oracle(g)
                rows.append([float(h), closed, brute, abs(closed - brute) / abs(brute)])
        report.artifacts.append(write_csv(out / "oracle.csv",
                                          ["h", "alpha", "alpha_oracle", "rel_err"], rows))
        if cfg.oracle_rtol is not None:
            worst = max(r[3] for r in rows)
            report.check("alpha vs oracle", worst, cfg.oracle_rtol, worst < cfg.oracle_rtol)

    if cfg.continuity_tol is not None and cfg.case is not Case.RECT:
        with _stage("continuity"):
            breaks = [1.0] + ([GOLDEN_BREAK, HALF_SQRT2_BREAK] if cfg.case is Case.NC3 else [])
            jumps = [abs(left - right) for left, right in (branch_values(cfg.case, b) for b in breaks)]
        report.check("branch continuity", max(jumps), cfg.continuity_tol,
                     max(jumps) < cfg.continuity_tol)


_KINDS = {
    "coefficients": _run_coefficients,
    "transient": _run_transient,
    "sweep": _run_sweep,
    "ratchet": _run_ratchet,
    "equilibrium": _run_equilibrium,
}


def run_experiment(cfg: ExperimentConfig, out_dir=CFG.OUTPUT_DIR) -> ExperimentReport:
    """
    Run every stage of cfg and write its artifacts under out_dir/cfg.name.

    Raises StageError for the first failing stage. The returned report's
    `passed` is False when any acceptance check fails.
    """
    out = Path(out_dir) / cfg.name
    out.mkdir(parents=True, exist_ok=True)
    report = ExperimentReport(cfg.name)
    logger.info(f"experiment {cfg.name} ({cfg.kind}): output in {out}")
    _KINDS[cfg.kind](cfg, out, report)

    text = report.to_text()
    path = out / "report.txt"
    path.write_text(text, encoding="utf-8")
    report.artifacts.append(path)
    for line in text.splitlines():
        logger.info(line)
    return report
