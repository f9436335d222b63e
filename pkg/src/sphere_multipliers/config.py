"""Configuration helpers for sphere-multipliers."""

import copy
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Optional

import yaml
from platformdirs import user_config_dir, user_data_dir

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .errors import ConfigError
from .multipliers import FAMILY_NAMES

ENV_PREFIX = "SPHERE_MULTIPLIERS"
PACKAGE_DIR = Path(__file__).parent.resolve()
PACKAGE_ROOT = PACKAGE_DIR.parent.parent
LOCAL_CONFIG_PATH = PACKAGE_ROOT / "config.local.yaml"
CONFIG_DIR = Path(user_config_dir("sphere-multipliers"))
DEFAULT_CONFIG_PATH = CONFIG_DIR / "config.yaml"
DATA_DIR = Path(user_data_dir("sphere-multipliers"))

KERNEL_KINDS = ("power_law", "random", "file", "inline")
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")

DEFAULT_TOLERANCES = {
    "parseval": 1e-9,
    "hy": 1e-6,
    "l1sup": 1e-6,
    "kernel_identity": 1e-9,
    "kernel_identity_zonal": 1e-12,
    "sqrt_identity": 1e-12,
    "reproducing": 1e-9,
    "decay_growth": 2.0,
    "deviation_sum_growth": 10.0,
    "tail_mass_growth": 10.0,
    "equivalence_ratio": 1e4,
    "cap_bracket": 1e-12,
    "uniform_bound": 1e-10,
    "half_bounded_decay_ratio": 1e-2,
    "holder_sup": 1e-12,
}

DEFAULT_CONFIG = {
    "seed": 1234,
    "workers": 1,
    "output_dir": str(DATA_DIR / "runs"),
    "log_level": "INFO",
    "events": True,
    "family": {"name": "shifting", "m": 2, "l": 2, "s": None, "table": None},
    "kernel": {
        "kind": "power_law",
        "m": None,
        "k_max": 128,
        "gamma": 3.5,
        "seed": None,
        "path": None,
        "blocks": None,
        "a": None,
    },
    "lattice": {
        "k_min": 0,
        "k_max": 200,
        "t_min": 1e-3,
        "t_max": math.pi / 2,
        "t_count": 64,
        "half_bounded_k": 200,
        "half_bounded_n": 100,
        "decay_ks": [1, 5, 10],
    },
    "functions": {"count": 8, "k_max": 32, "seed": None},
    "verify": {
        "t_values": [0.1, 0.5, 1.0],
        "p_values": [1.25, 1.5, 1.75, 2.0],
        "beta": 1.5,
        "window": None,
        "hypothesis": "half-bounded",
        "n_u": 2049,
        "n_pairs": 16,
    },
    "fit": {"t_min": 1e-3, "t_max": 0.1, "t_count": 64, "band_limit_factor": None},
    "quadrature": {"n_profile": 64, "lp_grid_factor": 2, "k_limit": 10**6},
    "tolerances": DEFAULT_TOLERANCES,
}

PATH_KEYS = {"output_dir"}


def _env(name: str) -> Optional[str]:
    return os.environ.get(f"{ENV_PREFIX}_{name}")


def _config_path_from_env() -> Optional[Path]:
    value = _env("CONFIG") or _env("CONFIG_PATH")
    if value:
        return Path(value).expanduser()
    return None


def resolve_config_path(config_path: Optional[Path] = None) -> Path:
    if config_path:
        return config_path
    env_path = _config_path_from_env()
    if env_path:
        return env_path
    if LOCAL_CONFIG_PATH.exists():
        return LOCAL_CONFIG_PATH
    return DEFAULT_CONFIG_PATH


def _parse(path: Path, text: str) -> Any:
    suffix = path.suffix.lower()
    if suffix == ".json":
        return json.loads(text)
    if suffix == ".toml":
        return tomllib.loads(text)
    return yaml.safe_load(text)


def _load_config_file(path: Path, strict: bool = False) -> dict:
    if not path.exists():
        if strict and path != DEFAULT_CONFIG_PATH:
            raise ConfigError(f"Config file not found: {path}")
        return {}
    try:
        data = _parse(path, path.read_text()) or {}
    except Exception as exc:
        if strict:
            raise ConfigError(f"Failed to parse config file {path}: {exc}") from exc
        return {}
    if not isinstance(data, dict):
        if strict:
            raise ConfigError(f"Config file {path} must be a mapping")
        return {}
    return data


def read_config_file(config_path: Optional[Path] = None, strict: bool = False) -> dict:
    path = resolve_config_path(config_path)
    return _load_config_file(path, strict=strict)


def _deep_merge(base: dict, update: dict) -> dict:
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def config_defaults() -> dict:
    return copy.deepcopy(DEFAULT_CONFIG)


def _apply_env_overrides(config: dict) -> dict:
    mapping = {
        "SEED": ("seed", int),
        "WORKERS": ("workers", int),
        "OUTPUT_DIR": ("output_dir", str),
        "LOG_LEVEL": ("log_level", str.upper),
        "EVENTS": ("events", "bool"),
    }

    for env_name, (key, cast) in mapping.items():
        value = _env(env_name)
        if value is None:
            continue
        if cast == "bool":
            config[key] = value.lower() in ("true", "1", "yes", "on")
            continue
        try:
            config[key] = cast(value)
        except ValueError:
            raise ConfigError(f"{ENV_PREFIX}_{env_name}={value!r} is not a valid {key}") from None

    return config


def _resolve_paths(config: dict, base_dir: Path) -> dict:
    for key in PATH_KEYS:
        value = config.get(key)
        if not value:
            continue
        path = Path(str(value)).expanduser()
        if not path.is_absolute():
            path = base_dir / path
        config[key] = str(path)
    kernel_path = config.get("kernel", {}).get("path")
    if kernel_path:
        path = Path(str(kernel_path)).expanduser()
        config["kernel"]["path"] = str(path if path.is_absolute() else base_dir / path)
    return config


def load_config(
    config_path: Optional[Path] = None,
    overrides: Optional[dict] = None,
    strict: bool = False,
) -> dict:
    """Load configuration with precedence: defaults -> file -> env -> overrides."""
    resolved_path = resolve_config_path(config_path)
    base = config_defaults()
    file_config = _load_config_file(resolved_path, strict=strict)
    if strict:
        errors = validate_config_dict(file_config)
        if errors:
            raise ConfigError(f"Invalid config file {resolved_path}", errors=errors)
    merged = _deep_merge(base, file_config)
    merged = _apply_env_overrides(merged)

    if overrides:
        merged = _deep_merge(merged, overrides)

    if strict:
        errors = validate_config_dict(merged)
        if errors:
            raise ConfigError("Invalid configuration", errors=errors)

    base_dir = resolved_path.parent if file_config else Path.cwd()
    return _resolve_paths(merged, base_dir)


def write_config(config: dict, config_path: Optional[Path] = None) -> Path:
    path = resolve_config_path(config_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(yaml.safe_dump(config, default_flow_style=False, sort_keys=False))
    return path


def _section(properties: dict) -> dict:
    return {"type": "object", "properties": properties, "additionalProperties": False}


def _number_list() -> dict:
    return {"type": "array", "items": {"type": "number"}, "minItems": 1}


def config_schema() -> dict:
    positive = {"type": "number", "exclusiveMinimum": 0}
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "properties": {
            "seed": {"type": "integer", "minimum": 0},
            "workers": {"type": "integer", "minimum": 1},
            "output_dir": {"type": "string"},
            "log_level": {"type": "string", "enum": list(LOG_LEVELS)},
            "events": {"type": "boolean"},
            "family": _section({
                "name": {"type": "string", "enum": list(FAMILY_NAMES)},
                "m": {"type": "integer", "minimum": 2},
                "l": {"type": "integer", "minimum": 1, "maximum": 10},
                "s": {"type": ["number", "null"]},
                "table": {"type": ["array", "null"]},
            }),
            "kernel": _section({
                "kind": {"type": "string", "enum": list(KERNEL_KINDS)},
                "m": {"type": ["integer", "null"]},
                "k_max": {"type": "integer", "minimum": 0},
                "gamma": {"type": "number"},
                "seed": {"type": ["integer", "null"]},
                "path": {"type": ["string", "null"]},
                "blocks": {"type": ["array", "null"]},
                "a": {"type": ["array", "null"]},
            }),
            "lattice": _section({
                "k_min": {"type": "integer", "minimum": 0},
                "k_max": {"type": "integer", "minimum": 0},
                "t_min": positive,
                "t_max": positive,
                "t_count": {"type": "integer", "minimum": 1},
                "half_bounded_k": {"type": "integer", "minimum": 1},
                "half_bounded_n": {"type": "integer", "minimum": 1},
                "decay_ks": {"type": "array", "items": {"type": "integer"}},
            }),
            "functions": _section({
                "count": {"type": "integer", "minimum": 1},
                "k_max": {"type": "integer", "minimum": 0},
                "seed": {"type": ["integer", "null"]},
            }),
            "verify": _section({
                "t_values": _number_list(),
                "p_values": _number_list(),
                "beta": positive,
                "window": {"type": ["array", "null"]},
                "hypothesis": {"type": "string", "enum": ["half-bounded", "equivalence"]},
                "n_u": {"type": "integer", "minimum": 3},
                "n_pairs": {"type": "integer", "minimum": 1},
            }),
            "fit": _section({
                "t_min": positive,
                "t_max": positive,
                "t_count": {"type": "integer", "minimum": 1},
                "band_limit_factor": {"type": ["number", "null"]},
            }),
            "quadrature": _section({
                "n_profile": {"type": "integer", "minimum": 1},
                "lp_grid_factor": {"type": "integer", "minimum": 1},
                "k_limit": {"type": "integer", "minimum": 1},
            }),
            "tolerances": _section({name: positive for name in DEFAULT_TOLERANCES}),
        },
        "additionalProperties": False,
    }


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


_TYPE_CHECKS = {
    "string": lambda v: isinstance(v, str),
    "integer": _is_int,
    "number": _is_number,
    "boolean": lambda v: isinstance(v, bool),
    "object": lambda v: isinstance(v, dict),
    "array": lambda v: isinstance(v, list),
    "null": lambda v: v is None,
}


def _check_value(key: str, value: Any, spec: dict, errors: list[str]) -> None:
    expected = spec.get("type")
    types = expected if isinstance(expected, list) else [expected]
    if not any(_TYPE_CHECKS[name](value) for name in types):
        errors.append(f"{key} must be of type {' or '.join(types)}")
        return
    if value is None:
        return

    if "enum" in spec and value not in spec["enum"]:
        errors.append(f"{key} must be one of: {', '.join(map(str, spec['enum']))}")
    if _is_number(value):
        if "minimum" in spec and value < spec["minimum"]:
            errors.append(f"{key} must be >= {spec['minimum']}")
        if "maximum" in spec and value > spec["maximum"]:
            errors.append(f"{key} must be <= {spec['maximum']}")
        if "exclusiveMinimum" in spec and value <= spec["exclusiveMinimum"]:
            errors.append(f"{key} must be > {spec['exclusiveMinimum']}")
    if isinstance(value, list):
        if len(value) < spec.get("minItems", 0):
            errors.append(f"{key} must not be empty")
        items = spec.get("items")
        if items:
            for i, item in enumerate(value):
                _check_value(f"{key}[{i}]", item, items, errors)
    if isinstance(value, dict) and "properties" in spec:
        _check_mapping(value, spec["properties"], errors, prefix=f"{key}.")


def _check_mapping(data: dict, props: dict, errors: list[str], prefix: str = "") -> None:
    for key, value in data.items():
        if key not in props:
            errors.append(f"Unknown config key: {prefix}{key}")
            continue
        _check_value(f"{prefix}{key}", value, props[key], errors)


def _check_ranges(data: dict, errors: list[str]) -> None:
    for section in ("lattice", "fit"):
        values = data.get(section)
        if not isinstance(values, dict):
            continue
        t_min, t_max = values.get("t_min"), values.get("t_max")
        if _is_number(t_min) and _is_number(t_max) and t_min > t_max:
            errors.append(f"{section}.t_min must not exceed {section}.t_max")
        if _is_number(t_max) and t_max >= math.pi:
            errors.append(f"{section}.t_max must be < pi")
    lattice = data.get("lattice")
    if isinstance(lattice, dict):
        k_min, k_max = lattice.get("k_min"), lattice.get("k_max")
        if _is_int(k_min) and _is_int(k_max) and k_min > k_max:
            errors.append("lattice.k_min must not exceed lattice.k_max")
        hb_k, hb_n = lattice.get("half_bounded_k"), lattice.get("half_bounded_n")
        if _is_int(hb_k) and _is_int(hb_n) and hb_n > hb_k:
            errors.append("lattice.half_bounded_n must not exceed lattice.half_bounded_k")
    verify = data.get("verify")
    if isinstance(verify, dict):
        window = verify.get("window")
        if isinstance(window, list) and (
            len(window) != 2 or not all(_is_int(n) for n in window) or not 1 <= window[0] <= window[1]
        ):
            errors.append("verify.window must be [n_lo, n_hi] with 1 <= n_lo <= n_hi")
        for p in verify.get("p_values") or []:
            if _is_number(p) and not 1 <= p <= 2:
                errors.append(f"verify.p_values entry {p} must lie in [1, 2]")
    kernel = data.get("kernel")
    if isinstance(kernel, dict):
        kind = kernel.get("kind")
        if kind == "file" and not kernel.get("path"):
            errors.append("kernel.path is required for kind 'file'")
        if kind == "inline" and kernel.get("blocks") is None and kernel.get("a") is None:
            errors.append("kernel.blocks or kernel.a is required for kind 'inline'")


def validate_config_dict(data: Any) -> list[str]:
    if not isinstance(data, dict):
        return ["Config must be a mapping/object"]
    errors: list[str] = []
    _check_mapping(data, config_schema()["properties"], errors)
    _check_ranges(data, errors)
    return errors


def validate_config_file(config_path: Optional[Path] = None) -> list[str]:
    path = resolve_config_path(config_path)
    if not path.exists():
        return []
    try:
        data = _load_config_file(path, strict=True)
    except ConfigError as exc:
        return [str(exc)]
    return validate_config_dict(data)
