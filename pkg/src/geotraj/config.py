"""Run configuration: a JSON file of unit-suffixed keys plus command-line overrides.

Frequencies are given as f in MHz (``*_mhz``), the code works with 2 pi f in
rad/ns; times are in microseconds (``*_us``); angles as multiples of pi
(``*_pi``) or radians (``*_rad``).
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

from .exceptions import ParameterError

# section -> key -> expected type
SCHEMA = {
    "scan": {"delta_max": float, "points": int, "error": str, "fidelity_mode": str},
    "optimize": {"resolution_pi": float, "fine_resolution_pi": float, "delta_probe": float,
                 "metric": str, "refine_cells": int},
    "transmon": {"levels": int, "alpha_mhz": float, "t1_us": float, "tphi_us": float,
                 "omega_min_mhz": float, "omega_max_mhz": float, "omega_step_mhz": float,
                 "drag_scale": (float, str)},
    "twoqubit": {"g_mhz": float, "delta1_mhz": float, "alpha1_mhz": float, "alpha2_mhz": float,
                 "m_cutoff": int, "t1_us": float, "tphi_us": float, "nu_window_mhz": float,
                 "nu_points": int, "beta_min": float, "beta_max": float, "beta_points": int},
}
TOP_LEVEL = {"seed": int, "threads": int}

_ANGLE = re.compile(r"^\s*([+-]?)\s*(\d+(?:\.\d*)?|\.\d+)?\s*\*?\s*pi\s*(?:/\s*(\d+))?\s*$")


def parse_angle(text) -> float:
    """'0.73pi', '-pi/2', '3pi/4', 'pi' or plain radians; the coefficient is read exactly."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    m = _ANGLE.match(s)
    if m:
        sign, coef, den = m.groups()
        q = Fraction(coef) if coef else Fraction(1)
        if den:
            if int(den) == 0:
                raise ParameterError(f"zero denominator in angle {text!r}")
            q /= int(den)
        if sign == "-":
            q = -q
        return float(q) * math.pi
    try:
        return float(s)
    except ValueError:
        raise ParameterError(f"cannot parse angle {text!r} (use e.g. 0.73pi or radians)") from None


def parse_time_us(text) -> float:
    """Microseconds, with 'inf' disabling the process."""
    try:
        v = float(text)
    except (TypeError, ValueError):
        raise ParameterError(f"cannot parse time {text!r}") from None
    if v <= 0:
        raise ParameterError("times must be positive (use inf to disable)")
    return v


@dataclass
class RunConfig:
    sections: dict = field(default_factory=dict)
    seed: int = 0
    threads: int | None = None

    def get(self, section: str, key: str, default=None):
        return self.sections.get(section, {}).get(key, default)


def _check_type(where: str, value, expected):
    kinds = expected if isinstance(expected, tuple) else (expected,)
    for k in kinds:
        if k is float and isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        if k is int and isinstance(value, int) and not isinstance(value, bool):
            return value
        if k is str and isinstance(value, str):
            return value
    raise ParameterError(f"{where}: expected {' or '.join(k.__name__ for k in kinds)}, got {value!r}")


def config_from_dict(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ParameterError("config root must be an object")
    cfg = RunConfig()
    for key, value in data.items():
        if key in TOP_LEVEL:
            setattr(cfg, key, _check_type(key, value, TOP_LEVEL[key]))
            continue
        if key not in SCHEMA:
            raise ParameterError(f"unknown config key {key!r}")
        if not isinstance(value, dict):
            raise ParameterError(f"config section {key!r} must be an object")
        section = {}
        for k, v in value.items():
            if k not in SCHEMA[key]:
                raise ParameterError(f"unknown config key {key}.{k}")
            section[k] = _check_type(f"{key}.{k}", v, SCHEMA[key][k])
        cfg.sections[key] = section
    return cfg


def load_config(path) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ParameterError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParameterError(f"config {path} is not valid JSON: {exc}") from None
    return config_from_dict(data)
