"""Scenario configuration: INI files with one section per subsystem.

dB/dBm keys (``transmit_power_dbm``, ``si_loss_db``, ...) are converted to
linear values on load.  :func:`dumps` writes the linear ``*_mw``/plain keys
with ``repr`` floats so that ``loads(dumps(cfg)) == cfg`` exactly.
"""

import configparser
import io
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Optional, Tuple

from maccfd.channel import SystemParams, db_to_linear, dbm_to_mw
from maccfd.ppso import PpsoConfig
from maccfd.system import MODES

SCHEMES = ("MA-PPSO", "MA-APO", "AS", "FPA", "BRUTE")
SWEEPS = ("none", "D", "num_si_paths", "num_soi_paths")
SWEEP_FIELD = {"D": "region_size_d", "num_si_paths": "num_si_paths", "num_soi_paths": "num_soi_paths"}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ApoConfig:
    spacing: float = 0.01
    max_rounds: int = 20
    tol: float = 1e-6


@dataclass(frozen=True)
class ScenarioConfig:
    system: SystemParams = field(default_factory=SystemParams)
    ppso: PpsoConfig = field(default_factory=PpsoConfig)
    apo: ApoConfig = field(default_factory=ApoConfig)
    as_spacing: float = 0.5
    brute_points_per_axis: int = 5
    schemes: Tuple[Tuple[str, str], ...] = (("MA-PPSO", "CCFD"),)
    sweep: str = "none"
    sweep_values: Tuple[float, ...] = ()
    num_realizations: int = 50
    master_seed: int = 0
    output_dir: str = "results"
    name: str = "experiment"
    record_error: bool = False
    reference_runs: int = 10
    # Reuse realization j's channel seed at every sweep point (paired comparisons).
    common_realizations: bool = True

    def __post_init__(self):
        validate(self)

    def sweep_points(self):
        """[(sweep_index, value, SystemParams)] for every sweep point."""
        if self.sweep == "none":
            return [(0, 0.0, self.system)]
        name = SWEEP_FIELD[self.sweep]
        out = []
        for i, v in enumerate(self.sweep_values):
            value = int(v) if name != "region_size_d" else float(v)
            out.append((i, float(v), replace(self.system, **{name: value})))
        return out


def validate(cfg: ScenarioConfig) -> None:
    if cfg.num_realizations < 1:
        raise ConfigError("num_realizations must be >= 1")
    if not cfg.schemes:
        raise ConfigError("at least one scheme/mode pair is required")
    for scheme, mode in cfg.schemes:
        if scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
        if mode not in MODES:
            raise ConfigError(f"unknown mode {mode!r} for {scheme}; expected one of {MODES}")
    if len(set(cfg.schemes)) != len(cfg.schemes):
        raise ConfigError("duplicate scheme/mode pair")
    if cfg.sweep not in SWEEPS:
        raise ConfigError(f"unknown sweep {cfg.sweep!r}; expected one of {SWEEPS}")
    if cfg.sweep == "none":
        if cfg.sweep_values:
            raise ConfigError("sweep_values given but sweep = none")
    else:
        vals = cfg.sweep_values
        if not vals:
            raise ConfigError(f"sweep {cfg.sweep} needs sweep_values")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ConfigError("sweep_values must be strictly increasing")
        if cfg.sweep == "D" and vals[0] < 0:
            raise ConfigError("region sizes must be >= 0")
        if cfg.sweep != "D" and any(v != int(v) or v < 1 for v in vals):
            raise ConfigError("path counts must be positive integers")
    if cfg.apo.spacing <= 0 or cfg.apo.max_rounds < 1:
        raise ConfigError("apo spacing must be > 0 and max_rounds >= 1")
    if cfg.as_spacing <= 0:
        raise ConfigError("antenna_selection spacing must be > 0")
    if cfg.brute_points_per_axis < 1:
        raise ConfigError("brute_force points_per_axis must be >= 1")
    if cfg.reference_runs < 1:
        raise ConfigError("reference_runs must be >= 1")
    if not 0 <= cfg.master_seed < 2 ** 64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")


# --- parsing -----------------------------------------------------------------

_SYSTEM_KEYS = {
    # key: (field, converter)
    "transmit_power_dbm": ("transmit_power", lambda s: dbm_to_mw(float(s))),
    "transmit_power_mw": ("transmit_power", float),
    "noise_power_dbm": ("noise_power", lambda s: dbm_to_mw(float(s))),
    "noise_power_mw": ("noise_power", float),
    "si_loss_db": ("si_loss_rho", lambda s: db_to_linear(float(s))),
    "si_loss": ("si_loss_rho", float),
    "soi_pathloss_db": ("soi_pathloss_beta", lambda s: db_to_linear(float(s))),
    "soi_pathloss": ("soi_pathloss_beta", float),
    "pathloss_exponent": ("pathloss_exponent_alpha", float),
    "distance_m": ("distance_d_pq", float),
    "region_size": ("region_size_d", float),
    "num_si_paths": ("num_si_paths", int),
    "num_soi_paths": ("num_soi_paths", int),
}

_PPSO_KEYS = {"num_particles": int, "num_iterations": int, "c1": float, "c2": float,
              "omega_min": float, "omega_max": float, "update": str}
_APO_KEYS = {"spacing": float, "max_rounds": int, "tol": float}
_EXPERIMENT_KEYS = {"name", "schemes", "sweep", "sweep_values", "num_realizations", "master_seed",
                    "output_dir", "record_error", "reference_runs", "common_realizations"}
_SECTIONS = {"system", "ppso", "apo", "antenna_selection", "brute_force", "experiment"}


def _check_keys(section, allowed):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section.name}]: {', '.join(sorted(unknown))}")


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def _parse_schemes(text: str):
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "/" not in item:
            raise ConfigError(f"scheme entry {item!r} must look like SCHEME/MODE")
        scheme, mode = (s.strip() for s in item.split("/", 1))
        out.append((scheme, mode.upper()))
    return tuple(out)


def loads(text: str) -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc
    extra = set(parser.sections()) - _SECTIONS
    if extra:
        raise ConfigError(f"unknown section(s): {', '.join(sorted(extra))}")
    try:
        return _from_parser(parser)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _from_parser(parser: configparser.ConfigParser) -> ScenarioConfig:
    kwargs = {}
    system = {}
    if parser.has_section("system"):
        sec = parser["system"]
        _check_keys(sec, _SYSTEM_KEYS)
        for key, raw in sec.items():
            name, conv = _SYSTEM_KEYS[key]
            if name in system:
                raise ConfigError(f"[system] sets {name} twice")
            system[name] = conv(raw)
    kwargs["system"] = SystemParams(**system)

    ppso = {}
    if parser.has_section("ppso"):
        sec = parser["ppso"]
        _check_keys(sec, _PPSO_KEYS)
        ppso = {k: _PPSO_KEYS[k](v) for k, v in sec.items()}
    kwargs["ppso"] = PpsoConfig(region_size_d=kwargs["system"].region_size_d, **ppso)

    if parser.has_section("apo"):
        sec = parser["apo"]
        _check_keys(sec, _APO_KEYS)
        kwargs["apo"] = ApoConfig(**{k: _APO_KEYS[k](v) for k, v in sec.items()})
    if parser.has_section("antenna_selection"):
        sec = parser["antenna_selection"]
        _check_keys(sec, {"spacing"})
        if "spacing" in sec:
            kwargs["as_spacing"] = float(sec["spacing"])
    if parser.has_section("brute_force"):
        sec = parser["brute_force"]
        _check_keys(sec, {"points_per_axis"})
        if "points_per_axis" in sec:
            kwargs["brute_points_per_axis"] = int(sec["points_per_axis"])

    if parser.has_section("experiment"):
        sec = parser["experiment"]
        _check_keys(sec, _EXPERIMENT_KEYS)
        if "name" in sec:
            kwargs["name"] = sec["name"].strip()
        if "schemes" in sec:
            kwargs["schemes"] = _parse_schemes(sec["schemes"])
        if "sweep" in sec:
            kwargs["sweep"] = sec["sweep"].strip()
        if "sweep_values" in sec:
            kwargs["sweep_values"] = tuple(float(v) for v in sec["sweep_values"].split(",") if v.strip())
        for key in ("num_realizations", "master_seed", "reference_runs"):
            if key in sec:
                kwargs[key] = int(sec[key])
        if "output_dir" in sec:
            kwargs["output_dir"] = sec["output_dir"].strip()
        for key in ("record_error", "common_realizations"):
            if key in sec:
                kwargs[key] = _parse_bool(sec[key])
    return ScenarioConfig(**kwargs)


def load(path) -> ScenarioConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return loads(text)


def default_config_path() -> Path:
    return Path(str(resources.files("maccfd") / "configs" / "default.cfg"))


def load_default() -> ScenarioConfig:
    return load(default_config_path())


def dumps(cfg: ScenarioConfig) -> str:
    s, p = cfg.system, cfg.ppso
    parser = configparser.ConfigParser(interpolation=None)
    parser["system"] = {
        "transmit_power_mw": repr(s.transmit_power),
        "noise_power_mw": repr(s.noise_power),
        "si_loss": repr(s.si_loss_rho),
        "soi_pathloss": repr(s.soi_pathloss_beta),
        "pathloss_exponent": repr(s.pathloss_exponent_alpha),
        "distance_m": repr(s.distance_d_pq),
        "region_size": repr(s.region_size_d),
        "num_si_paths": str(s.num_si_paths),
        "num_soi_paths": str(s.num_soi_paths),
    }
    parser["ppso"] = {f.name: repr(getattr(p, f.name)) if isinstance(getattr(p, f.name), float)
                      else str(getattr(p, f.name))
                      for f in fields(p) if f.name in _PPSO_KEYS}
    parser["apo"] = {"spacing": repr(cfg.apo.spacing), "max_rounds": str(cfg.apo.max_rounds),
                     "tol": repr(cfg.apo.tol)}
    parser["antenna_selection"] = {"spacing": repr(cfg.as_spacing)}
    parser["brute_force"] = {"points_per_axis": str(cfg.brute_points_per_axis)}
    parser["experiment"] = {
        "name": cfg.name,
        "schemes": ", ".join(f"{s}/{m}" for s, m in cfg.schemes),
        "sweep": cfg.sweep,
        "sweep_values": ", ".join(repr(float(v)) for v in cfg.sweep_values),
        "num_realizations": str(cfg.num_realizations),
        "master_seed": str(cfg.master_seed),
        "output_dir": cfg.output_dir,
        "record_error": str(cfg.record_error).lower(),
        "reference_runs": str(cfg.reference_runs),
        "common_realizations": str(cfg.common_realizations).lower(),
    }
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


def with_overrides(cfg: ScenarioConfig, seed: Optional[int] = None,
                   realizations: Optional[int] = None) -> ScenarioConfig:
    changes = {}
    if seed is not None:
        changes["master_seed"] = seed
    if realizations is not None:
        changes["num_realizations"] = realizations
    return replace(cfg, **changes) if changes else cfg
