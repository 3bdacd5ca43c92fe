"""JSON configuration loading for mechanisms and simulation runs.

The document is strict: every key must be known, every value well-typed,
and errors name the offending JSON path so a typo in a nested section is
immediately locatable. Top level:

    {
      "mechanism": "fourbar" | "ankle",
      "geometry": { ... fields of FourBarParams or AnkleParams ... },
      "plant": {"inertia": ..., "damping": ..., "gravity_amplitude": ...},
      "rates": {"policy_hz": ..., "gains_hz": ..., "motor_hz": ..., "physics_hz": ...},
      "serial_gains": {"k_p": ..., "k_d": ...},
      "reference": {"kind": ..., "offset": ..., "amplitude": ..., ...}
    }

Only "mechanism" and "geometry" are required. Numeric leaves accept a
scalar where a per-DoF list is expected and broadcast. Defaults for the
optional sections: unit-free plant (inertia 0.01, damping 0.02, no
gravity), rates 25/100/1000/10000 Hz, gains k_p 50 / k_d 1, and a sine
reference centred mid-range at 0.5 Hz spanning a quarter of the range.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ankle import AnkleParams, AnkleSideParams
from .errors import ConfigError
from .fourbar import FourBarParams
from .jacobian import Params
from .simulator import (
    WAVE_KINDS,
    PlantModel,
    RateConfig,
    ReferenceWaveform,
)


def _require_object(node, path, allowed):
    if not isinstance(node, dict):
        raise ConfigError(f"{path} must be a JSON object")
    for key in node:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} at {path}")
    return node


def _get(node, path, key, required=True, default=None):
    if key not in node:
        if required:
            raise ConfigError(f"missing key {key!r} at {path}")
        return default
    return node[key]


def _number(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path} must be a number")
    return float(value)


def _integer(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{path} must be an integer")
    return value


def _string(value, path, choices=None):
    if not isinstance(value, str):
        raise ConfigError(f"{path} must be a string")
    if choices is not None and value not in choices:
        raise ConfigError(
            f"{path} must be one of {sorted(choices)}, got {value!r}"
        )
    return value


def _vector(value, path, length):
    if not isinstance(value, list) or len(value) != length:
        raise ConfigError(f"{path} must be a list of {length} numbers")
    return np.array(
        [_number(v, f"{path}[{i}]") for i, v in enumerate(value)]
    )


def _per_dof(value, path, n):
    """Scalar or length-n list, broadcast to an n-vector."""
    if isinstance(value, list):
        return _vector(value, path, n)
    return np.full(n, _number(value, path))


def _interval(value, path):
    vec = _vector(value, path, 2)
    if not vec[0] < vec[1]:
        raise ConfigError(f"{path} must be an increasing pair")
    return (float(vec[0]), float(vec[1]))


_FOURBAR_KEYS = {"crank", "rod", "link", "base", "serial_range", "motor_bounds"}
_SIDE_KEYS = {"foot_point", "motor_origin", "motor_axis", "crank", "rod",
              "motor_bounds"}
_ANKLE_KEYS = {"joint_center", "pitch_axis", "roll_axis", "serial_range",
               "alpha", "beta"}


def _parse_fourbar(node, path) -> FourBarParams:
    _require_object(node, path, _FOURBAR_KEYS)
    kwargs = {
        name: _number(_get(node, path, name), f"{path}.{name}")
        for name in ("crank", "rod", "link", "base")
    }
    kwargs["serial_range"] = _interval(
        _get(node, path, "serial_range"), f"{path}.serial_range"
    )
    bounds = _get(node, path, "motor_bounds", required=False)
    if bounds is not None:
        kwargs["motor_bounds"] = _interval(bounds, f"{path}.motor_bounds")
    try:
        return FourBarParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_side(node, path) -> AnkleSideParams:
    _require_object(node, path, _SIDE_KEYS)
    return AnkleSideParams(
        foot_point=_vector(_get(node, path, "foot_point"),
                           f"{path}.foot_point", 3),
        motor_origin=_vector(_get(node, path, "motor_origin"),
                             f"{path}.motor_origin", 3),
        motor_axis=_vector(_get(node, path, "motor_axis"),
                           f"{path}.motor_axis", 3),
        crank=_number(_get(node, path, "crank"), f"{path}.crank"),
        rod=_number(_get(node, path, "rod"), f"{path}.rod"),
        motor_bounds=_interval(_get(node, path, "motor_bounds"),
                               f"{path}.motor_bounds"),
    )


def _parse_ankle(node, path) -> AnkleParams:
    _require_object(node, path, _ANKLE_KEYS)
    ranges = _get(node, path, "serial_range")
    if not isinstance(ranges, list) or len(ranges) != 2:
        raise ConfigError(
            f"{path}.serial_range must be a list of two intervals"
        )
    serial_range = tuple(
        _interval(r, f"{path}.serial_range[{i}]") for i, r in enumerate(ranges)
    )
    try:
        return AnkleParams(
            joint_center=_vector(_get(node, path, "joint_center"),
                                 f"{path}.joint_center", 3),
            pitch_axis=_vector(_get(node, path, "pitch_axis"),
                               f"{path}.pitch_axis", 3),
            roll_axis=_vector(_get(node, path, "roll_axis"),
                              f"{path}.roll_axis", 3),
            alpha=_parse_side(_get(node, path, "alpha"), f"{path}.alpha"),
            beta=_parse_side(_get(node, path, "beta"), f"{path}.beta"),
            serial_range=serial_range,
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


_PLANT_KEYS = {"inertia", "damping", "gravity_amplitude"}
_RATE_KEYS = {"policy_hz", "gains_hz", "motor_hz", "physics_hz"}
_GAIN_KEYS = {"k_p", "k_d"}
_REFERENCE_KEYS = {"kind", "offset", "amplitude", "frequency",
                   "end_frequency", "step_time"}
_TOP_KEYS = {"mechanism", "geometry", "plant", "rates", "serial_gains",
             "reference"}


def _parse_plant(node, path, n) -> PlantModel:
    _require_object(node, path, _PLANT_KEYS)
    return PlantModel(
        inertia=_per_dof(_get(node, path, "inertia"), f"{path}.inertia", n),
        damping=_per_dof(_get(node, path, "damping"), f"{path}.damping", n),
        gravity_amplitude=_per_dof(
            _get(node, path, "gravity_amplitude"),
            f"{path}.gravity_amplitude", n,
        ),
    )


def _parse_rates(node, path) -> RateConfig:
    _require_object(node, path, _RATE_KEYS)
    defaults = RateConfig()
    kwargs = {}
    for name in _RATE_KEYS:
        raw = _get(node, path, name, required=False)
        kwargs[name] = (
            getattr(defaults, name)
            if raw is None
            else _integer(raw, f"{path}.{name}")
        )
    try:
        return RateConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _parse_reference(node, path, n) -> ReferenceWaveform:
    _require_object(node, path, _REFERENCE_KEYS)
    kwargs = {
        "kind": _string(_get(node, path, "kind"), f"{path}.kind",
                        choices=set(WAVE_KINDS)),
        "offset": _per_dof(_get(node, path, "offset", required=False,
                                default=0.0), f"{path}.offset", n),
        "amplitude": _per_dof(_get(node, path, "amplitude", required=False,
                                   default=0.0), f"{path}.amplitude", n),
    }
    for name in ("frequency", "end_frequency", "step_time"):
        raw = _get(node, path, name, required=False)
        if raw is not None:
            kwargs[name] = _number(raw, f"{path}.{name}")
    return ReferenceWaveform(**kwargs)


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI command needs, parsed and validated."""

    mechanism: str
    params: Params
    plant: PlantModel
    rates: RateConfig
    k_p: np.ndarray
    k_d: np.ndarray
    reference: ReferenceWaveform


def _default_reference(params) -> ReferenceWaveform:
    lo = params.serial_lower
    hi = params.serial_upper
    return ReferenceWaveform(
        kind="sine",
        offset=0.5 * (lo + hi),
        amplitude=0.25 * (hi - lo),
        frequency=0.5,
    )


def parse_config(doc: dict, path: str = "$") -> RunConfig:
    """Validate a parsed JSON document and build the run objects."""
    _require_object(doc, path, _TOP_KEYS)
    mechanism = _string(
        _get(doc, path, "mechanism"), f"{path}.mechanism",
        choices={"fourbar", "ankle"},
    )
    geometry = _get(doc, path, "geometry")
    if mechanism == "fourbar":
        params = _parse_fourbar(geometry, f"{path}.geometry")
    else:
        params = _parse_ankle(geometry, f"{path}.geometry")
    n = params.serial_dof

    plant_node = _get(doc, path, "plant", required=False)
    plant = (
        PlantModel(
            inertia=np.full(n, 0.01),
            damping=np.full(n, 0.02),
            gravity_amplitude=np.zeros(n),
        )
        if plant_node is None
        else _parse_plant(plant_node, f"{path}.plant", n)
    )

    rates_node = _get(doc, path, "rates", required=False)
    rates = RateConfig() if rates_node is None else _parse_rates(
        rates_node, f"{path}.rates"
    )

    gains_node = _get(doc, path, "serial_gains", required=False)
    if gains_node is None:
        k_p = np.full(n, 50.0)
        k_d = np.full(n, 1.0)
    else:
        _require_object(gains_node, f"{path}.serial_gains", _GAIN_KEYS)
        k_p = _per_dof(_get(gains_node, f"{path}.serial_gains", "k_p"),
                       f"{path}.serial_gains.k_p", n)
        k_d = _per_dof(_get(gains_node, f"{path}.serial_gains", "k_d"),
                       f"{path}.serial_gains.k_d", n)
        if np.any(k_p < 0.0) or np.any(k_d < 0.0):
            raise ConfigError(f"{path}.serial_gains must be non-negative")

    ref_node = _get(doc, path, "reference", required=False)
    reference = (
        _default_reference(params)
        if ref_node is None
        else _parse_reference(ref_node, f"{path}.reference", n)
    )

    return RunConfig(
        mechanism=mechanism,
        params=params,
        plant=plant,
        rates=rates,
        k_p=k_p,
        k_d=k_d,
        reference=reference,
    )


def load_config(path) -> RunConfig:
    """Read and validate a JSON config file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    return parse_config(doc)
