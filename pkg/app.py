"""
Confined Diffusion - Command Line
argparse front end over the library packages.

Commands:
  coef          : alpha, g, phi and alpha*A for one width or a table
  pde           : transient effective equation from the centred top hat
  ratchet       : stationary periodic flux J0 over tilts (and profiles)
  sde           : Euler-Maruyama ensemble histograms
  mh            : Metropolis-Hastings equilibrium in the two-dimensional channel
  run           : one bundled or user experiment recipe
  list-configs  : bundled recipes

CSV goes to --out when given, to stdout otherwise. Exit code 2 on invalid
input or a failed computation; `run` exits 1 when an acceptance check fails.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import config as CFG
from coefficients import Case, Geometry, bundle, coefficient_table
from effective_pde import Grid, SolverOptions, build_model, solve_transient, top_hat
from harness import (
    bundled_configs, load_config, parse_float_list, run_experiment, write_csv, write_rows,
)
from particle_sim import HistogramSpec, ParticleSetup, TiltedForce, mh_sample, run_ensemble
from ratchet import potential_sf, sweep_solutions, tilted

logger = logging.getLogger("confined_diffusion")


def _emit(out: Optional[Path], columns, rows) -> None:
    if out is None:
        write_rows(sys.stdout, columns, rows)
    else:
        write_csv(out, columns, rows)
        logger.info(f"wrote {out}")


# =========================================================
# Subcommands
# =========================================================

def cmd_coef(args) -> int:
    geom = Geometry(Case.parse(args.case), args.h, args.m)
    if args.table:
        rows = coefficient_table(geom, parse_float_list(args.table), args.n, args.eps)
    else:
        rows = [(args.h, bundle(geom, args.n, args.eps))]
    _emit(args.out, ["h", "alpha", "g", "phi", "excluded_volume"],
          [[h, b.alpha, b.g, b.phi, b.excluded_volume] for h, b in rows])
    return 0


def cmd_pde(args) -> int:
    geom = Geometry(Case.parse(args.case), args.h, args.m)
    potential = tilted(args.f0) if args.potential == "sf" else None
    model = build_model(args.model, geom, args.n, args.eps, args.bc, potential)
    grid = Grid(args.grid, args.bc, model.dim)
    opts = SolverOptions(n_points=args.grid, times=[0.0, args.tend],
                         scheme=args.scheme, upwind=args.upwind)
    fields = solve_transient(model, top_hat(grid), opts)
    rows = []
    for f in fields:
        rows.extend([f.time, x, p] for x, p in zip(grid.nodes, f.marginal()))
        logger.info(f"t={f.time:g}: mass={f.mass():.12g} variance={f.variance():.6g}")
    _emit(args.out, ["t", "x", "p"], rows)
    return 0


def cmd_ratchet(args) -> int:
    g_values = parse_float_list(args.gphi)
    f0_values = parse_float_list(args.f0)
    flux_rows, profile_rows = [], []
    for g in g_values:
        for s in sweep_solutions(g, f0_values, args.grid):
            flux_rows.append([g, s.problem.f0, s.j0])
            if args.profiles is not None:
                profile_rows.extend([g, s.problem.f0, x, p]
                                    for x, p in zip(s.density.grid.nodes, s.density.values))
    _emit(args.out, ["gphi", "f0", "j0"], flux_rows)
    if args.profiles is not None:
        write_csv(args.profiles, ["gphi", "f0", "x", "p"], profile_rows)
        logger.info(f"wrote {args.profiles}")
    return 0


def cmd_sde(args) -> int:
    setup = ParticleSetup(
        geom=Geometry(Case.parse(args.case), args.h, args.m),
        n_particles=args.n,
        epsilon=args.eps,
        periodic=args.bc == "periodic",
        force=TiltedForce(args.f0) if args.f0 is not None else None,
    )
    spec = HistogramSpec(bins=args.bins, realizations=args.reals, times=(0.0, args.tend))
    result = run_ensemble(setup, spec, args.dt, args.seed, args.workers)
    rows = []
    for k, t in enumerate(result.times):
        rows.extend([t, x, p, e] for x, p, e in
                    zip(result.centers, result.density[k], result.stderr[k]))
    _emit(args.out, ["t", "x", "p", "stderr"], rows)
    return 0


def cmd_mh(args) -> int:
    potential = (lambda x: potential_sf(x, args.f0)) if args.f0 is not None else None
    chain = mh_sample(potential, args.n, args.eps, args.h, args.steps, args.seed,
                      args.bins, args.ybins)
    xc = chain.x_centers
    yc = 0.5 * (chain.y_edges[:-1] + chain.y_edges[1:])
    rows = [[xc[i], yc[j], int(chain.counts[i, j])]
            for i in range(xc.size) for j in range(yc.size)]
    _emit(args.out, ["x", "y", "count"], rows)
    if args.marginal_out is not None:
        write_csv(args.marginal_out, ["x", "p"], [list(r) for r in zip(xc, chain.marginal())])
        logger.info(f"wrote {args.marginal_out}")
    return 0


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    report = run_experiment(cfg, args.out)
    return 0 if report.passed else 1


def cmd_list_configs(args) -> int:
    for path in bundled_configs():
        cfg = load_config(path)
        print(f"{path.name}\t{cfg.kind}\t{cfg.name}")
    return 0


# =========================================================
# Parser
# =========================================================

def _geometry_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--case", default="nc2", choices=[c.value for c in Case])
    p.add_argument("--h", type=float, default=CFG.DEFAULT_H)
    p.add_argument("--m", type=float, default=1.0, help="second side of a rect cross-section")
    p.add_argument("--n", type=int, default=CFG.DEFAULT_N)
    p.add_argument("--eps", type=float, default=CFG.DEFAULT_EPS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="confined-diffusion",
        description="Finite-size Brownian particles in narrow channels")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coef", help="excluded-volume coefficients")
    _geometry_flags(p)
    p.add_argument("--table", help="h_min:h_max:steps or a comma list")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_coef)

    p = sub.add_parser("pde", help="transient effective equation")
    _geometry_flags(p)
    p.add_argument("--model", default="narrow", choices=["narrow", "point", "singlefile", "bulk", "rods"])
    p.add_argument("--bc", default="noflux", choices=["noflux", "periodic"])
    p.add_argument("--potential", default="none", choices=["none", "sf"])
    p.add_argument("--f0", type=float, default=0.0)
    p.add_argument("--tend", type=float, default=CFG.DEFAULT_T_END)
    p.add_argument("--grid", type=int, default=CFG.PDE_GRID_POINTS)
    p.add_argument("--scheme", default=CFG.PDE_SCHEME, choices=["central", "gradient_flow"])
    p.add_argument("--upwind", action="store_true", help="donor-cell drift (central scheme)")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_pde)

    p = sub.add_parser("ratchet", help="periodic stationary flux")
    p.add_argument("--gphi", default="0", help="value or comma list")
    p.add_argument("--f0", default="-6:6:25", help="value, comma list or min:max:steps")
    p.add_argument("--grid", type=int, default=CFG.RATCHET_GRID_POINTS)
    p.add_argument("--out", type=Path)
    p.add_argument("--profiles", type=Path, help="also write x,p of every solution here")
    p.set_defaults(func=cmd_ratchet)

    p = sub.add_parser("sde", help="Euler-Maruyama ensemble")
    _geometry_flags(p)
    p.add_argument("--bc", default="noflux", choices=["noflux", "periodic"])
    p.add_argument("--dt", type=float, default=CFG.DEFAULT_DT)
    p.add_argument("--tend", type=float, default=CFG.DEFAULT_T_END)
    p.add_argument("--reals", type=int, default=CFG.DEFAULT_REALIZATIONS)
    p.add_argument("--f0", type=float, help="tilted ratchet force (off when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=CFG.DEFAULT_BINS)
    p.add_argument("--workers", type=int, default=CFG.MAX_WORKERS)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_sde)

    p = sub.add_parser("mh", help="Metropolis-Hastings equilibrium")
    p.add_argument("--n", type=int, default=133)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--h", type=float, default=1.47)
    p.add_argument("--steps", type=int, default=CFG.MH_DEFAULT_STEPS)
    p.add_argument("--f0", type=float, help="tilted ratchet potential (V = 0 when omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=CFG.DEFAULT_BINS)
    p.add_argument("--ybins", type=int, default=CFG.MH_DEFAULT_YBINS)
    p.add_argument("--out", type=Path)
    p.add_argument("--marginal-out", type=Path)
    p.set_defaults(func=cmd_mh)

    p = sub.add_parser("run", help="run an experiment recipe")
    p.add_argument("--config", type=Path, required=True)
    p.add_argument("--out", type=Path, default=Path(CFG.OUTPUT_DIR))
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("list-configs", help="bundled experiment recipes")
    p.set_defaults(func=cmd_list_configs)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point."""
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except (ValueError, RuntimeError) as exc:
        logger.error(f"{args.command}: {exc}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
