"""Scenario and sweep-spec files: flat key = value text with one section per group.

An empty file is valid and yields the all-defaults scenario. Unknown
sections or keys are errors, as are out-of-range values; every error names
the offending section.key. Convenience keys in customary units
(road_length_miles, speed_min_mph, speed_max_mph) are converted to SI at
load time.
"""

from __future__ import annotations

import configparser

from fsdv.delays import Complexity
from fsdv.detector import ThresholdPolicy
from fsdv.probability import DetectionProbParams
from fsdv.sim import MILE_M, MPH_MPS, ConfigError, ScenarioConfig
from fsdv.sweep import SweepSpec
from fsdv.traffic import GreenshieldParams

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as e:
        raise ConfigError(f"{section}.{key}: expected a number, got {raw!r}") from e


def _int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}") from e


def _bool(section: str, key: str, raw: str) -> bool:
    v = raw.strip().lower()
    if v in _TRUE:
        return True
    if v in _FALSE:
        return False
    raise ConfigError(f"{section}.{key}: expected a boolean, got {raw!r}")


# section -> key -> (config attribute, converter kind)
_SCHEMA: dict[str, dict[str, tuple[str, str]]] = {
    "scenario": {
        "road_length": ("road_length", "float"),
        "road_length_miles": ("road_length", "miles"),
        "lanes": ("lanes", "int"),
        "n_vehicles": ("n_vehicles", "int"),
        "speed_min": ("speed_min", "float"),
        "speed_max": ("speed_max", "float"),
        "speed_min_mph": ("speed_min", "mph"),
        "speed_max_mph": ("speed_max", "mph"),
        "tx_range": ("tx_range", "float"),
        "beacon_period_ms": ("beacon_period_ms", "int"),
        "beacon_size_bits": ("beacon_size_bits", "int"),
        "duration": ("duration", "float"),
        "seed": ("seed", "int"),
        "log_events": ("log_events", "bool"),
        "density_from_ground_truth": ("density_from_ground_truth", "bool"),
    },
    "rogue": {
        "fraction": ("rogue_fraction", "float"),
        "sybil_ids_per_rogue": ("sybil_ids_per_rogue", "int"),
        "speed_factor": ("rogue_speed_factor", "float"),
    },
    "mobility": {
        "speed_jitter": ("speed_jitter", "float"),
    },
    "loss": {
        "base": ("base_loss", "float"),
        "density_coeff": ("density_loss_coeff", "float"),
    },
    "channel": {
        "bandwidth_hz": ("bandwidth_hz", "float"),
        "tx_power": ("tx_power", "float"),
        "channel_coeff": ("channel_coeff", "float"),
        "noise_power": ("noise_power", "float"),
    },
    "queue": {
        "arrival_rate": ("arrival_rate", "float"),
        "service_rate": ("service_rate", "float"),
        "standard_form": ("queue_standard_form", "bool"),
    },
    "compute": {
        "cycles_per_bit": ("cycles_per_bit", "float"),
        "per_obu_capability": ("per_obu_capability", "float"),
        "fog_aggregation": ("fog_aggregation", "bool"),
    },
}

_CONVERTERS = {
    "float": _float,
    "int": _int,
    "bool": _bool,
    "miles": lambda s, k, raw: _float(s, k, raw) * MILE_M,
    "mph": lambda s, k, raw: _float(s, k, raw) * MPH_MPS,
}


def _read_ini(text: str, source: str) -> configparser.ConfigParser:
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as e:
        raise ConfigError(f"parse error in {source}: {e}") from e
    return cp


def _apply_sections(cp: configparser.ConfigParser, cfg: ScenarioConfig) -> None:
    for section in cp.sections():
        if section == "sweep":
            continue  # handled by load_sweep_spec
        if section in _SCHEMA:
            schema = _SCHEMA[section]
            for key, raw in cp.items(section):
                if key not in schema:
                    raise ConfigError(f"unknown key {section}.{key}")
                attr, kind = schema[key]
                setattr(cfg, attr, _CONVERTERS[kind](section, key, raw))
        elif section == "threshold":
            _apply_threshold(dict(cp.items(section)), cfg)
        elif section == "greenshield":
            _apply_greenshield(dict(cp.items(section)), cfg)
        elif section == "complexity":
            _apply_complexity(dict(cp.items(section)), cfg)
        elif section == "probability":
            _apply_probability(dict(cp.items(section)), cfg)
        else:
            raise ConfigError(f"unknown section [{section}]")


def _apply_threshold(items: dict[str, str], cfg: ScenarioConfig) -> None:
    mode = items.pop("mode", cfg.threshold.mode)
    fixed_value = items.pop("fixed_value", None)
    alpha = items.pop("alpha", None)
    if items:
        raise ConfigError(f"unknown key threshold.{next(iter(items))}")
    try:
        if mode == "fixed":
            value = _float("threshold", "fixed_value", fixed_value or "0")
            cfg.threshold = ThresholdPolicy.fixed(value)
        elif mode == "speed_proportional":
            a = _float("threshold", "alpha", alpha) if alpha is not None else cfg.threshold.alpha or 0.3
            cfg.threshold = ThresholdPolicy.speed_proportional(a)
        else:
            raise ConfigError(f"threshold.mode: unknown mode {mode!r}")
    except ValueError as e:
        raise ConfigError(f"threshold: {e}") from e


def _apply_greenshield(items: dict[str, str], cfg: ScenarioConfig) -> None:
    s_max = items.pop("s_max", None)
    rho_max = items.pop("rho_max", None)
    if items:
        raise ConfigError(f"unknown key greenshield.{next(iter(items))}")
    if s_max is None and rho_max is None:
        return
    if s_max is None or rho_max is None:
        raise ConfigError("greenshield: s_max and rho_max must be given together")
    try:
        cfg.greenshield = GreenshieldParams(
            s_max=_float("greenshield", "s_max", s_max),
            rho_max=_float("greenshield", "rho_max", rho_max),
        )
    except ValueError as e:
        raise ConfigError(f"greenshield: {e}") from e


def _apply_complexity(items: dict[str, str], cfg: ScenarioConfig) -> None:
    kind = items.pop("kind", "linear")
    scale = _float("complexity", "scale", items.pop("scale", "1.0"))
    offset = _float("complexity", "offset", items.pop("offset", "0.0"))
    if items:
        raise ConfigError(f"unknown key complexity.{next(iter(items))}")
    try:
        cfg.complexity = Complexity(kind=kind, scale=scale, offset=offset)
    except ValueError as e:
        raise ConfigError(f"complexity: {e}") from e


def _apply_probability(items: dict[str, str], cfg: ScenarioConfig) -> None:
    fields = {
        "x_fog": cfg.prob_params.x_fog,
        "p_reach": cfg.prob_params.p_reach,
        "p_honest_correct": cfg.prob_params.p_honest_correct,
        "p_rogue_correct": cfg.prob_params.p_rogue_correct,
    }
    for key, raw in items.items():
        if key not in fields:
            raise ConfigError(f"unknown key probability.{key}")
        fields[key] = _float("probability", key, raw)
    try:
        cfg.prob_params = DetectionProbParams(**fields)
    except ValueError as e:
        raise ConfigError(f"probability: {e}") from e


def parse_scenario(text: str, source: str = "<string>") -> ScenarioConfig:
    """Build a validated ScenarioConfig from config text; defaults fill gaps."""
    cp = _read_ini(text, source)
    cfg = ScenarioConfig()
    _apply_sections(cp, cfg)
    cfg.validate()
    return cfg


def load_scenario(path: str) -> ScenarioConfig:
    """Load and validate a scenario config file."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    return parse_scenario(text, source=path)


def parse_sweep_spec(text: str, source: str = "<string>") -> SweepSpec:
    """Build a SweepSpec from spec text: a [sweep] section plus base-config sections."""
    cp = _read_ini(text, source)
    if not cp.has_section("sweep"):
        raise ConfigError(f"{source}: sweep spec needs a [sweep] section")

    items = dict(cp.items("sweep"))
    variable = items.pop("variable", None)
    raw_values = items.pop("values", None)
    raw_seeds = items.pop("seeds", None)
    if items:
        raise ConfigError(f"unknown key sweep.{next(iter(items))}")
    if variable is None or raw_values is None or raw_seeds is None:
        raise ConfigError("sweep: variable, values and seeds are all required")

    values = [
        _float("sweep", "values", v.strip()) for v in raw_values.split(",") if v.strip()
    ]
    seeds = [
        _int("sweep", "seeds", s.strip()) for s in raw_seeds.split(",") if s.strip()
    ]

    cfg = ScenarioConfig()
    _apply_sections(cp, cfg)
    cfg.validate()

    spec = SweepSpec(variable=variable, values=values, seeds=seeds, base_config=cfg)
    spec.validate()
    return spec


def load_sweep_spec(path: str) -> SweepSpec:
    """Load and validate a sweep spec file."""
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError(f"cannot read sweep spec {path}: {e}") from e
    return parse_sweep_spec(text, source=path)
