"""
Experiment recipes.

One flat `[experiment]` section per file, read with configparser:

  [experiment]
  name        = transient_noflux
  kind        = transient
  case        = nc2
  h           = 3
  models      = narrow, point, singlefile, bulk, sde
  times       = 0, 0.05
  max_rel_l2  = 0.05

Lists are comma separated; float lists also accept `lo:hi:steps` (steps
evenly spaced values including both ends). Keys that are not listed in
FIELDS raise ConfigError; missing keys take the config.py defaults.
"""

import configparser
import logging
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

import config as CFG
from coefficients import Case, Geometry, bundle
from effective_pde import BoundaryKind, ModelKind
from errors import ConfigError

logger = logging.getLogger("confined_diffusion.harness")

SECTION = "experiment"
KINDS = ("coefficients", "transient", "sweep", "ratchet", "equilibrium")
SIMULATORS = ("sde",)
POTENTIALS = ("none", "sf")


def parse_float_list(text: str) -> List[float]:
    """'0.5, 1, 2' or 'lo:hi:steps'."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"Range must be lo:hi:steps, got '{text}'")
        try:
            lo, hi, steps = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise ConfigError(f"Bad range '{text}'") from None
        if steps < 1:
            raise ConfigError(f"Range needs at least one step, got '{text}'")
        return [float(v) for v in np.linspace(lo, hi, steps)] if steps > 1 else [lo]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"Bad number list '{text}'") from None


def parse_str_list(text: str) -> List[str]:
    return [v.strip().lower() for v in text.split(",") if v.strip()]


def parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "yes", "true", "on"):
        return True
    if value in ("0", "no", "false", "off"):
        return False
    raise ConfigError(f"Bad boolean '{text}'. Use 'true' or 'false'.")


def _optional_float(text: str) -> Optional[float]:
    return None if text.strip().lower() in ("", "none") else float(text)


@dataclass
class ExperimentConfig:
    """Everything one `run` needs; validated by load_config."""
    name: str
    kind: str
    case: Case = Case.NC2
    h: List[float] = field(default_factory=lambda: [CFG.DEFAULT_H])
    m: float = 1.0
    n_particles: int = CFG.DEFAULT_N
    epsilon: float = CFG.DEFAULT_EPS
    phi: Optional[float] = None                 # fixes eps per h when given
    models: List[str] = field(default_factory=lambda: ["narrow"])
    reference: Optional[str] = None             # label every other run is compared with
    bc: BoundaryKind = BoundaryKind.NO_FLUX
    potential: str = "none"
    f0: float = 0.0
    f0_values: List[float] = field(default_factory=list)
    g_phi: List[float] = field(default_factory=list)
    profile_f0: List[float] = field(default_factory=list)
    times: List[float] = field(default_factory=lambda: [0.0, CFG.DEFAULT_T_END])
    dt: float = CFG.DEFAULT_DT
    realizations: int = CFG.DEFAULT_REALIZATIONS
    bins: int = CFG.DEFAULT_BINS
    ybins: int = CFG.MH_DEFAULT_YBINS
    grid: int = CFG.PDE_GRID_POINTS
    scheme: str = CFG.PDE_SCHEME
    seed: int = 0
    steps: int = CFG.MH_DEFAULT_STEPS
    workers: Optional[int] = CFG.MAX_WORKERS
    point_chain: bool = False
    oracle_points: int = 0
    # acceptance thresholds (None = not checked)
    max_rel_l2: Optional[float] = None
    min_rel_l2_bulk: Optional[float] = None
    best_model: bool = False
    monotone: bool = False
    oracle_rtol: Optional[float] = None
    zero_flux_tol: Optional[float] = None
    linearizing: bool = False
    wall_excess: bool = False
    singlefile_flatter: bool = False
    flat_point_sigma: Optional[float] = None
    continuity_tol: Optional[float] = None
    h_star: Optional[float] = None
    h_star_tol: float = 0.01
    profile_agree_tol: Optional[float] = None
    profile_differ_min: Optional[float] = None
    source: Optional[Path] = None

    def geometry(self, h: Optional[float] = None) -> Geometry:
        return Geometry(self.case, self.h[0] if h is None else h, self.m)

    def epsilon_for(self, h: float) -> float:
        """eps at width h: the configured value, or the one giving volume fraction phi."""
        if self.phi is None:
            return self.epsilon
        geom = self.geometry(h)
        return (self.phi * geom.g_per_alpha / self.n_particles) ** (1.0 / geom.effective_dim)

    def labels(self) -> List[str]:
        """Run labels: model names, with #2, #3 ... for repeats."""
        seen = {}
        out = []
        for model in self.models:
            seen[model] = seen.get(model, 0) + 1
            out.append(model if seen[model] == 1 else f"{model}#{seen[model]}")
        return out

    def checks_requested(self) -> bool:
        return any([
            self.max_rel_l2 is not None, self.best_model, self.monotone,
            self.oracle_rtol is not None, self.zero_flux_tol is not None, self.linearizing,
            self.wall_excess, self.singlefile_flatter, self.flat_point_sigma is not None,
            self.continuity_tol is not None, self.h_star is not None,
            self.min_rel_l2_bulk is not None, self.profile_agree_tol is not None,
            self.profile_differ_min is not None,
        ])


_PARSERS = {
    "name": str.strip,
    "kind": lambda s: s.strip().lower(),
    "case": Case.parse,
    "h": parse_float_list,
    "m": float,
    "n_particles": int,
    "epsilon": float,
    "phi": _optional_float,
    "models": parse_str_list,
    "reference": lambda s: s.strip().lower() or None,
    "bc": BoundaryKind.parse,
    "potential": lambda s: s.strip().lower(),
    "f0": float,
    "f0_values": parse_float_list,
    "g_phi": parse_float_list,
    "profile_f0": parse_float_list,
    "times": parse_float_list,
    "dt": float,
    "realizations": int,
    "bins": int,
    "ybins": int,
    "grid": int,
    "scheme": lambda s: s.strip().lower(),
    "seed": int,
    "steps": int,
    "workers": lambda s: None if s.strip().lower() in ("", "none", "auto") else int(s),
    "point_chain": parse_bool,
    "oracle_points": int,
    "max_rel_l2": _optional_float,
    "min_rel_l2_bulk": _optional_float,
    "best_model": parse_bool,
    "monotone": parse_bool,
    "oracle_rtol": _optional_float,
    "zero_flux_tol": _optional_float,
    "linearizing": parse_bool,
    "wall_excess": parse_bool,
    "singlefile_flatter": parse_bool,
    "flat_point_sigma": _optional_float,
    "continuity_tol": _optional_float,
    "h_star": _optional_float,
    "h_star_tol": float,
    "profile_agree_tol": _optional_float,
    "profile_differ_min": _optional_float,
}

FIELDS = tuple(_PARSERS)


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.kind not in KINDS:
        raise ConfigError(f"Unknown experiment kind: {cfg.kind}. Use one of {', '.join(KINDS)}.")
    if not cfg.h or any(h < 0.0 or not math.isfinite(h) for h in cfg.h):
        raise ConfigError(f"h must be a nonempty list of finite values >= 0, got {cfg.h}")
    if cfg.n_particles < 1:
        raise ConfigError(f"n_particles must be >= 1, got {cfg.n_particles}")
    if cfg.phi is not None and not 0.0 < cfg.phi < 1.0:
        raise ConfigError(f"phi must lie in (0, 1), got {cfg.phi}")
    if cfg.potential not in POTENTIALS:
        raise ConfigError(f"Unknown potential: {cfg.potential}. Use 'none' or 'sf'.")
    if cfg.scheme not in ("central", "gradient_flow"):
        raise ConfigError(f"Unknown scheme: {cfg.scheme}. Use 'central' or 'gradient_flow'.")
    if cfg.dt <= 0.0 or cfg.realizations < 1 or cfg.steps < 1:
        raise ConfigError("dt, realizations and steps must be positive")
    if cfg.grid < CFG.PDE_MIN_GRID_POINTS or cfg.bins < 4:
        raise ConfigError(f"Need grid >= {CFG.PDE_MIN_GRID_POINTS} and bins >= 4")
    if any(t < 0.0 for t in cfg.times):
        raise ConfigError(f"Output times must be >= 0, got {cfg.times}")

    for model in cfg.models:
        if model not in SIMULATORS:
            try:
                ModelKind.parse(model)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
    if cfg.reference is not None and cfg.reference not in cfg.labels():
        raise ConfigError(f"Reference '{cfg.reference}' is not one of the runs {cfg.labels()}")

    if cfg.kind in ("transient", "sweep"):
        if not cfg.models:
            raise ConfigError(f"{cfg.kind} experiment needs at least one model")
        if "sde" in cfg.models:
            for t in cfg.times:
                k = round(t / cfg.dt)
                if abs(k * cfg.dt - t) > 1e-9 * max(1.0, t):
                    raise ConfigError(f"Output time {t} is not a multiple of dt={cfg.dt}")
    if cfg.kind == "sweep" and ("narrow" not in cfg.models or len(cfg.models) < 2):
        raise ConfigError("sweep compares 'narrow' with at least one other model")
    if cfg.kind == "ratchet" and (not cfg.g_phi or not cfg.f0_values):
        raise ConfigError("ratchet experiment needs g_phi and f0_values")
    if cfg.kind == "ratchet" and any(g < 0.0 for g in cfg.g_phi):
        raise ConfigError(f"g_phi values must be >= 0, got {cfg.g_phi}")
    if cfg.kind == "ratchet" and (cfg.profile_agree_tol is not None or cfg.profile_differ_min is not None):
        if len(cfg.g_phi) < 2 or len(cfg.profile_f0) < 2:
            raise ConfigError("profile checks compare the first two g_phi at the first and last profile_f0")
    if cfg.kind == "equilibrium" and cfg.case is not Case.NC2:
        raise ConfigError("equilibrium sampling runs in the two-dimensional channel (case = nc2)")

    # coefficient preconditions for every width the experiment touches
    if cfg.kind != "ratchet":
        for h in cfg.h:
            try:
                bundle(cfg.geometry(h), cfg.n_particles, cfg.epsilon_for(h))
            except ValueError as exc:
                raise ConfigError(f"h={h}: {exc}") from None


def load_config(path) -> ExperimentConfig:
    """Parse and validate one recipe. Raises ConfigError on any problem."""
    path = Path(path)
    parser = configparser.ConfigParser(interpolation=None)
    try:
        read = parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    if not read:
        raise ConfigError(f"Config file not found: {path}")
    if not parser.has_section(SECTION):
        raise ConfigError(f"{path}: missing [{SECTION}] section")
    extra = [s for s in parser.sections() if s != SECTION]
    if extra:
        raise ConfigError(f"{path}: unexpected sections {extra}")

    raw = dict(parser.items(SECTION))
    unknown = sorted(set(raw) - set(FIELDS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {unknown}")
    for required in ("name", "kind"):
        if required not in raw:
            raise ConfigError(f"{path}: missing required key '{required}'")

    values = {}
    for key, text in raw.items():
        try:
            values[key] = _PARSERS[key](text)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}: bad value for '{key}': {exc}") from None
    cfg = ExperimentConfig(**values, source=path)
    _validate(cfg)
    logger.debug(f"loaded config '{cfg.name}' ({cfg.kind}) from {path}")
    return cfg


def bundled_configs(root: Optional[Path] = None) -> List[Path]:
    """*.cfg recipes shipped under CFG.CONFIG_DIR."""
    root = Path(root) if root is not None else Path(__file__).resolve().parent.parent / CFG.CONFIG_DIR
    return sorted(root.glob("*.cfg"))
