"""Scenario configuration and its strict JSON form.

Tagged unions carry a ``"kind"`` key (model and state specs).  Unknown keys,
missing required keys and wrong types raise :class:`ConfigError` with the
dotted path of the offending field.  Complex numbers serialize as
``[re, im]``.
"""

from __future__ import annotations

import dataclasses
import json
import math
import types
import typing
from dataclasses import dataclass, field
from typing import Any, Union

from .analytic import FREQUENCY_FORMS, AnalyticParams
from .dynamics import EvolutionConfig
from .models import MODEL_TYPES, ModelSpec
from .states import STATE_TYPES

EQUATIONS = ("8", "8ab", "9", "12")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path or '<root>'}: {message}")


@dataclass(frozen=True)
class AnalyticOverlay:
    """Closed-form curve generated alongside (or instead of) a simulation."""

    equation: str
    params: AnalyticParams
    t_max: float
    dt: float
    frequency: str = "momentum"

    def __post_init__(self):
        if self.equation not in EQUATIONS:
            raise ValueError(f"equation must be one of {EQUATIONS}, got {self.equation!r}")
        if self.frequency not in FREQUENCY_FORMS:
            raise ValueError(f"frequency must be one of {FREQUENCY_FORMS}")
        if not (self.dt > 0 and self.t_max >= 0):
            raise ValueError("analytic grid needs dt > 0 and t_max >= 0")

    def grid(self):
        import numpy as np

        n = int(round(self.t_max / self.dt))
        return np.arange(n + 1) * self.dt


@dataclass(frozen=True)
class OutputConfig:
    csv: str | None = "trajectory.csv"
    svg: str | None = "trajectory.svg"
    sample_every: int = 1

    def __post_init__(self):
        if int(self.sample_every) != self.sample_every or self.sample_every < 1:
            raise ValueError("outputs.sample_every must be an integer >= 1")


@dataclass(frozen=True)
class Units:
    eta_omega_hz: float | None = None

    def __post_init__(self):
        if self.eta_omega_hz is not None and not self.eta_omega_hz > 0:
            raise ValueError("eta_omega_hz must be positive")


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    model: ModelSpec | None = None
    dims: dict[str, int] = field(default_factory=dict)
    initial: dict[str, Any] = field(default_factory=dict)
    evolution: EvolutionConfig | None = None
    analytic: AnalyticOverlay | None = None
    outputs: OutputConfig = field(default_factory=OutputConfig)
    units: Units = field(default_factory=Units)

    def __post_init__(self):
        if self.model is None and self.analytic is None:
            raise ValueError("scenario needs a model, an analytic overlay, or both")
        if self.model is not None and self.evolution is None:
            raise ValueError("a model needs an evolution block")


# -- serialization -------------------------------------------------------------

def to_jsonable(obj) -> Any:
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        out = {}
        kind = getattr(type(obj), "kind", None)
        if isinstance(kind, str) and kind:
            out["kind"] = kind
        for f in dataclasses.fields(obj):
            out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if hasattr(obj, "item"):  # numpy scalars
        return to_jsonable(obj.item())
    return obj


def dumps(config: ScenarioConfig) -> str:
    return json.dumps(to_jsonable(config), indent=2, sort_keys=False)


def _is_optional(tp) -> tuple[bool, Any]:
    origin = typing.get_origin(tp)
    if origin in (Union, types.UnionType):
        args = [a for a in typing.get_args(tp) if a is not type(None)]
        if len(args) == 1 and len(typing.get_args(tp)) == 2:
            return True, args[0]
    return False, tp


def _coerce(tp, value, path: str):
    optional, inner = _is_optional(tp)
    if value is None:
        if optional:
            return None
        raise ConfigError(path, "may not be null")
    tp = inner
    if tp is Any:
        return value
    if tp is bool:
        if not isinstance(value, bool):
            raise ConfigError(path, f"expected a boolean, got {value!r}")
        return value
    if tp is int:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or int(value) != value:
            raise ConfigError(path, f"expected an integer, got {value!r}")
        return int(value)
    if tp is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(path, f"expected a number, got {value!r}")
        if not math.isfinite(value) and not (path.endswith("tail_tolerance") and value > 0):
            raise ConfigError(path, f"expected a finite number, got {value!r}")
        return float(value)
    if tp is complex:
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return complex(value)
        if isinstance(value, list) and len(value) == 2 and all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            return complex(value[0], value[1])
        raise ConfigError(path, f"expected a number or [re, im], got {value!r}")
    if tp is str:
        if not isinstance(value, str):
            raise ConfigError(path, f"expected a string, got {value!r}")
        return value
    origin = typing.get_origin(tp)
    if origin is tuple:
        args = typing.get_args(tp)
        if not isinstance(value, list):
            raise ConfigError(path, f"expected a list, got {value!r}")
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(args[0], v, f"{path}[{i}]") for i, v in enumerate(value))
        if len(value) != len(args):
            raise ConfigError(path, f"expected {len(args)} entries, got {len(value)}")
        return tuple(_coerce(a, v, f"{path}[{i}]") for i, (a, v) in enumerate(zip(args, value)))
    if dataclasses.is_dataclass(tp):
        return _build(tp, value, path)
    raise ConfigError(path, f"unsupported field type {tp!r}")


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(path, f"expected an object, got {type(data).__name__}")
    hints = typing.get_type_hints(cls)
    names = {f.name: f for f in dataclasses.fields(cls)}
    data = {k: v for k, v in data.items() if k != "kind"}
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ConfigError(f"{path}.{unknown[0]}" if path else unknown[0], "unknown key")
    kwargs = {}
    for name, f in names.items():
        sub = f"{path}.{name}" if path else name
        if name not in data:
            if f.default is dataclasses.MISSING and f.default_factory is dataclasses.MISSING:
                raise ConfigError(sub, "required key missing")
            continue
        kwargs[name] = _coerce(hints[name], data[name], sub)
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from None


def _tagged(registry: dict, data, path: str):
    if not isinstance(data, dict) or "kind" not in data:
        raise ConfigError(path, "expected an object with a 'kind' key")
    kind = data["kind"]
    if kind not in registry:
        raise ConfigError(f"{path}.kind", f"unknown kind {kind!r}; expected one of {sorted(registry)}")
    return _build(registry[kind], data, path)


_SCENARIO_KEYS = ("name", "model", "dims", "initial", "evolution", "analytic", "outputs", "units")


def from_dict(data: dict) -> ScenarioConfig:
    if not isinstance(data, dict):
        raise ConfigError("", "config must be a JSON object")
    unknown = sorted(set(data) - set(_SCENARIO_KEYS))
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    if "name" not in data or not isinstance(data["name"], str):
        raise ConfigError("name", "required string")
    model = None
    if data.get("model") is not None:
        model = _tagged(MODEL_TYPES, data["model"], "model")
        try:
            model.validate()
        except ValueError as exc:
            raise ConfigError("model", str(exc)) from None
    dims_raw = data.get("dims", {})
    if not isinstance(dims_raw, dict):
        raise ConfigError("dims", "expected an object of mode dims")
    dims = {k: _coerce(int, v, f"dims.{k}") for k, v in dims_raw.items()}
    for k in dims:
        if k not in ("x", "y"):
            raise ConfigError(f"dims.{k}", "unknown mode label")
    initial_raw = data.get("initial", {})
    if not isinstance(initial_raw, dict):
        raise ConfigError("initial", "expected an object of factor states")
    initial = {k: _tagged(STATE_TYPES, v, f"initial.{k}") for k, v in initial_raw.items()}
    evolution = None
    if data.get("evolution") is not None:
        evolution = _build(EvolutionConfig, data["evolution"], "evolution")
    analytic = None
    if data.get("analytic") is not None:
        analytic = _build(AnalyticOverlay, data["analytic"], "analytic")
    outputs = _build(OutputConfig, data.get("outputs", {}), "outputs")
    units = _build(Units, data.get("units", {}), "units")
    try:
        return ScenarioConfig(
            name=data["name"], model=model, dims=dims, initial=initial,
            evolution=evolution, analytic=analytic, outputs=outputs, units=units,
        )
    except ValueError as exc:
        raise ConfigError("", str(exc)) from None


def loads(text: str) -> ScenarioConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return from_dict(data)


def load(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
