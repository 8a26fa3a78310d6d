"""Scenario files: JSON schema, pointer-carrying validation, config builders.

A scenario is one JSON object shared by every subcommand; each driver reads
the sections it needs.  Validation happens in two passes: structural checks
against SCENARIO_SCHEMA, then semantic checks the schema language cannot
express (m0 against the expression count, level bounds, mesh admissibility).
Every rejection raises ConfigError carrying a JSON pointer to the offending
field so the CLI can print actionable diagnostics.
"""

from __future__ import annotations

import json
from pathlib import Path

import jsonschema
import numpy as np

from .cauchy import CauchyConfig
from .freeboundary import FBConfig, Thresholds
from .kernels import KernelError, KernelSpec, make_kernel
from .reactions import ReactionError, model_from_json, positive_equilibrium


class ConfigError(ValueError):
    """Scenario rejected; `pointer` locates the offending field."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}

_KERNEL_SCHEMA = {
    "type": "object",
    "properties": {
        "family": {"enum": ["uniform", "laplace", "gaussian", "powerlaw", "table"]},
        "radius": _POS,
        "scale": _POS,
        "sigma": _POS,
        "gamma": {"type": "number", "exclusiveMinimum": 1.0},
        "core_width": _POS,
        "x": {"type": "array", "items": _NUM, "minItems": 2},
        "values": {"type": "array", "items": {"type": "number", "minimum": 0}},
    },
    "required": ["family"],
    "additionalProperties": False,
}

_MODEL_SCHEMA = {
    "type": "object",
    "properties": {
        "model": {"enum": ["wnv", "cholera", "concave", "custom"]},
        "params": {"type": "object"},
        "f": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "m0": {"type": "integer", "minimum": 1},
        "d": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "u_ceiling": {"type": "array", "items": _POS},
    },
    "required": ["model"],
    "additionalProperties": False,
}

SCENARIO_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "model": _MODEL_SCHEMA,
        "kernels": {
            "anyOf": [
                _KERNEL_SCHEMA,
                {"type": "array", "items": _KERNEL_SCHEMA, "minItems": 1},
            ]
        },
        "mu": {
            "anyOf": [
                {"type": "number", "minimum": 0},
                {"type": "array", "items": {"type": "number", "minimum": 0},
                 "minItems": 1},
            ]
        },
        "h0": _POS,
        "initial": {
            "type": "object",
            "properties": {
                "amplitude": {
                    "anyOf": [_POS, {"type": "array", "items": _POS, "minItems": 1}]
                },
            },
            "additionalProperties": False,
        },
        "numerics": {
            "type": "object",
            "properties": {
                "dx": _POS,
                "dt": _POS,
                "t_end": {"type": "number", "minimum": 0},
                "snapshot_times": {"type": "array", "items": {"type": "number", "minimum": 0}},
                "sample_stride": {"type": "integer", "minimum": 1},
                "scheme": {"enum": ["euler", "heun"]},
                "x_max": _POS,
            },
            "additionalProperties": False,
        },
        "thresholds": {
            "type": "object",
            "properties": {
                "growth_factor": _POS,
                "interior_frac": _POS,
                "vanish_amp_frac": _POS,
                "vanish_creep_frac": _POS,
            },
            "additionalProperties": False,
        },
        "levels": {
            "type": "array",
            "items": {
                "type": "object",
                "properties": {"component": {"type": "integer", "minimum": 1},
                               "level": _POS},
                "required": ["component", "level"],
                "additionalProperties": False,
            },
        },
        "speeds": {
            "type": "object",
            "properties": {
                "mu_sweep": {"type": "array", "items": _POS, "minItems": 1},
                "cstar": {"type": "boolean"},
                "tol_c": _POS,
                "length": _POS,
                "lengths": {"type": "array", "items": _POS, "minItems": 1},
                "rel_tol": _POS,
                "dx": _POS,
            },
            "additionalProperties": False,
        },
        "fit": {
            "type": "object",
            "properties": {
                "input": {"type": "string", "minLength": 1},
                "signals": {"type": "array",
                            "items": {"enum": ["h", "neg_g"]}, "minItems": 1},
                "law": {"enum": ["auto", "linear", "tlogt", "power"]},
                "window": {"type": "array", "items": _NUM,
                           "minItems": 2, "maxItems": 2},
            },
            "required": ["input"],
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "runs": {
                    "type": "array",
                    "minItems": 1,
                    "items": {
                        "type": "object",
                        "properties": {
                            "config": {"type": "string", "minLength": 1},
                            "task": {"enum": ["simulate-fb", "simulate-cauchy",
                                              "speeds", "fit"]},
                        },
                        "required": ["config", "task"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["runs"],
            "additionalProperties": False,
        },
        "outputs": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
    },
    "required": ["name"],
    "additionalProperties": False,
}

_VALIDATOR = jsonschema.Draft202012Validator(SCENARIO_SCHEMA)


def _pointer(err: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in err.absolute_path]
    if err.validator == "additionalProperties" and isinstance(err.instance, dict):
        allowed = set(err.schema.get("properties", {}))
        extra = sorted(set(err.instance) - allowed)
        if extra:
            parts.append(extra[0])
    return "/" + "/".join(parts)


def validate_scenario(obj) -> None:
    """Structural pass, then the cross-field checks the schema cannot state."""
    errors = sorted(_VALIDATOR.iter_errors(obj),
                    key=lambda e: -len(list(e.absolute_path)))
    if errors:
        best = jsonschema.exceptions.best_match(errors)
        raise ConfigError(_pointer(best), best.message)
    model = obj.get("model", {})
    if model.get("model") == "custom":
        exprs = model.get("f")
        if not exprs:
            raise ConfigError("/model/f", "custom model needs rate expressions")
        m0 = model.get("m0", len(exprs))
        if m0 > len(exprs):
            raise ConfigError(
                "/model/m0",
                f"m0 = {m0} exceeds the component count m = {len(exprs)}")
        if "d" in model and len(model["d"]) != len(exprs):
            raise ConfigError("/model/d", "need one diffusion rate per component")
    elif model and "f" in model:
        raise ConfigError("/model/f", "rate expressions only apply to custom models")
    if isinstance(obj.get("mu"), list) and all(v == 0 for v in obj["mu"]):
        raise ConfigError("/mu", "at least one expansion coefficient must be positive")
    if obj.get("mu") == 0:
        raise ConfigError("/mu", "at least one expansion coefficient must be positive")


def load_scenario(path) -> dict:
    """Read and validate one scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError("/", f"cannot read {path}: {e.strerror}") from e
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("/", f"invalid JSON at line {e.lineno}: {e.msg}") from e
    validate_scenario(obj)
    return obj


def _require(obj: dict, key: str, where: str = ""):
    if key not in obj:
        raise ConfigError(f"{where}/{key}", "required by this subcommand")
    return obj[key]


def build_model(scenario: dict):
    try:
        return model_from_json(_require(scenario, "model"))
    except ReactionError as e:
        raise ConfigError("/model", str(e)) from e


def build_kernels(scenario: dict, m0: int) -> tuple:
    """One kernel per dispersing component; a single object broadcasts."""
    raw = _require(scenario, "kernels")
    items = [raw] * m0 if isinstance(raw, dict) else list(raw)
    if len(items) != m0:
        raise ConfigError("/kernels", f"need {m0} kernels, got {len(items)}")
    kerns = []
    for i, item in enumerate(items):
        spec = dict(item)
        if "x" in spec:
            spec["x"] = tuple(spec["x"])
        if "values" in spec:
            spec["values"] = tuple(spec["values"])
        try:
            kerns.append(make_kernel(KernelSpec(**spec)))
        except (KernelError, TypeError) as e:
            where = "/kernels" if isinstance(raw, dict) else f"/kernels/{i}"
            raise ConfigError(where, str(e)) from e
    return tuple(kerns)


def _initial_profiles(scenario: dict, model, h0: float):
    """Wedge profiles A_i * (1 - |x|/h0)+; None keeps the simulator default."""
    init = scenario.get("initial")
    if init is None or "amplitude" not in init:
        return None
    amp = init["amplitude"]
    amps = np.full(model.m, float(amp)) if np.isscalar(amp) else np.asarray(amp, float)
    if amps.shape != (model.m,):
        raise ConfigError("/initial/amplitude",
                          f"need a scalar or {model.m} amplitudes")
    u_star = positive_equilibrium(model)
    bad = np.nonzero(amps > u_star)[0]
    if bad.size:
        raise ConfigError("/initial/amplitude",
                          f"component {bad[0] + 1} amplitude exceeds the "
                          f"equilibrium {u_star[bad[0]]:.6g}")

    def wedge(a):
        return lambda x: a * np.maximum(0.0, 1.0 - np.abs(x) / h0)

    return tuple(wedge(a) for a in amps)


def _builder_pointer(e: ValueError) -> str:
    """Map a constructor complaint back onto the scenario field it came from."""
    msg = str(e).lower()
    if "mu" in msg or "expansion" in msg:
        return "/mu"
    if "mesh" in msg or "dx" in msg:
        return "/numerics/dx"
    if "kernel" in msg:
        return "/kernels"
    if "level" in msg:
        return "/levels"
    if "initial" in msg:
        return "/initial"
    return "/numerics"


def _thresholds(scenario: dict) -> Thresholds:
    return Thresholds(**scenario.get("thresholds", {}))


def _numerics(scenario: dict) -> dict:
    num = dict(_require(scenario, "numerics"))
    for key in ("dx", "t_end"):
        if key not in num:
            raise ConfigError(f"/numerics/{key}", "required by this subcommand")
    return num


def build_fb_config(scenario: dict) -> FBConfig:
    model = build_model(scenario)
    kernels = build_kernels(scenario, model.m0)
    num = _numerics(scenario)
    h0 = float(_require(scenario, "h0"))
    try:
        return FBConfig(
            model=model,
            kernels=kernels,
            mu=_require(scenario, "mu"),
            h0=h0,
            dx=num["dx"],
            t_end=num["t_end"],
            dt=num.get("dt"),
            initial_profiles=_initial_profiles(scenario, model, h0),
            snapshot_times=tuple(num.get("snapshot_times", ())),
            sample_stride=num.get("sample_stride"),
            scheme=num.get("scheme", "euler"),
            thresholds=_thresholds(scenario),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(_builder_pointer(e), str(e)) from e


def build_cauchy_config(scenario: dict) -> CauchyConfig:
    model = build_model(scenario)
    kernels = build_kernels(scenario, model.m0)
    num = _numerics(scenario)
    h0 = float(_require(scenario, "h0"))
    levels = []
    for j, entry in enumerate(scenario.get("levels", [])):
        comp = entry["component"]
        if not 1 <= comp <= model.m:
            raise ConfigError(f"/levels/{j}/component",
                              f"must name a component in 1..{model.m}")
        levels.append((comp - 1, entry["level"]))
    try:
        return CauchyConfig(
            model=model,
            kernels=kernels,
            h0=h0,
            dx=num["dx"],
            t_end=num["t_end"],
            dt=num.get("dt"),
            initial_profiles=_initial_profiles(scenario, model, h0),
            x_max=num.get("x_max"),
            levels=levels,
            snapshot_times=tuple(num.get("snapshot_times", ())),
            sample_stride=num.get("sample_stride"),
        )
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(_builder_pointer(e), str(e)) from e


def scenario_dir() -> Path:
    """Directory holding the bundled scenario presets."""
    return Path(__file__).resolve().parent / "scenarios"
