"""Run configuration files.

The primary encoding is an INI file whose values are JSON literals::

    [vehicle]
    v_c = 4.0
    h = 0.25
    omega_max = null

    [controller]
    mode = "GlobalGPS"
    initial_estimate = [40.0, 80.0]

A value that is not valid JSON is taken as a bare string, so ``mode =
GlobalGPS`` also works. A ``.json`` file (or any text starting with ``{``)
is read as a JSON object with the same sections. Missing keys take the
defaults below; unknown sections or keys are rejected.
"""

from __future__ import annotations

import configparser
import copy
import json
import math
import numbers
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict

from .controller import BetaSchedule, ControllerConfig, Mode
from .errors import InvalidInput
from .estimation import TransitionMode
from .sensing import NoiseModel
from .simulator import DEFAULT_MAX_STEPS, Scenario
from .vehicle import VehicleParams

DEFAULTS: Dict[str, Dict[str, Any]] = {
    "vehicle": {"v_c": 4.0, "h": 0.25, "omega_max": None},
    "noise": {"sigma": 0.02, "seed": 0},
    "controller": {
        "mode": Mode.GLOBAL_GPS.value,
        "beta": 1.0,
        "beta_schedule": BetaSchedule.CONSTANT.value,
        "local_transition_mode": TransitionMode.EXACT_ROTATION.value,
        "omega0": 0.0,
        "initial_estimate": [40.0, 80.0],
        "pin_estimate": False,
    },
    "scenario": {
        "p0": [0.0, 0.0],
        "theta0": 0.0,
        "p_T": [100.0, 100.0],
        "max_steps": DEFAULT_MAX_STEPS,
        "terminal_range_factor": 1.0,
    },
}


def _number(where, v):
    if isinstance(v, bool) or not isinstance(v, numbers.Real):
        raise InvalidInput(f"{where}: expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise InvalidInput(f"{where}: expected a finite number, got {v!r}")
    return v


def _integer(where, v):
    if isinstance(v, bool) or not isinstance(v, numbers.Integral):
        if isinstance(v, float) and v.is_integer():
            return int(v)
        raise InvalidInput(f"{where}: expected an integer, got {v!r}")
    return int(v)


def _point(where, v):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise InvalidInput(f"{where}: expected [x, y], got {v!r}")
    return [_number(where, v[0]), _number(where, v[1])]


def _optional(kind):
    def check(where, v):
        return None if v is None else kind(where, v)

    return check


def _string(where, v):
    if not isinstance(v, str):
        raise InvalidInput(f"{where}: expected a string, got {v!r}")
    return v


def _boolean(where, v):
    if not isinstance(v, bool):
        raise InvalidInput(f"{where}: expected true or false, got {v!r}")
    return v


_KINDS = {
    "vehicle": {"v_c": _number, "h": _number, "omega_max": _optional(_number)},
    "noise": {"sigma": _number, "seed": _integer},
    "controller": {
        "mode": _string,
        "beta": _number,
        "beta_schedule": _string,
        "local_transition_mode": _string,
        "omega0": _number,
        "initial_estimate": _optional(_point),
        "pin_estimate": _boolean,
    },
    "scenario": {
        "p0": _point,
        "theta0": _number,
        "p_T": _point,
        "max_steps": _integer,
        "terminal_range_factor": _number,
    },
}


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``values`` mirrors the file's sections."""

    values: Dict[str, Dict[str, Any]]

    def scenario(self, seed=None) -> Scenario:
        """Build the scenario, optionally overriding the noise seed.

        Raises:
            InvalidInput: if a value is out of range.
        """
        v, n, c, s = (self.values[k] for k in ("vehicle", "noise", "controller", "scenario"))
        try:
            ctl = ControllerConfig(
                mode=Mode(c["mode"]),
                beta=c["beta"],
                beta_schedule=BetaSchedule(c["beta_schedule"]),
                vehicle=VehicleParams(v["v_c"], v["h"], v["omega_max"]),
                noise=NoiseModel(n["sigma"], n["seed"] if seed is None else seed),
                initial_estimate=c["initial_estimate"],
                local_transition_mode=TransitionMode(c["local_transition_mode"]),
                omega0=c["omega0"],
                pin_estimate=c["pin_estimate"],
            )
        except ValueError as exc:
            # enum lookups raise plain ValueError
            raise InvalidInput(str(exc)) from None
        return Scenario(
            p0=tuple(s["p0"]),
            theta0=s["theta0"],
            p_T=tuple(s["p_T"]),
            controller=ctl,
            max_steps=s["max_steps"],
            terminal_range_factor=s["terminal_range_factor"],
        )

    def to_ini(self) -> str:
        lines = []
        for section, keys in self.values.items():
            lines.append(f"[{section}]")
            lines.extend(f"{k} = {json.dumps(val)}" for k, val in keys.items())
            lines.append("")
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps(self.values, indent=2) + "\n"


def from_sections(raw: Dict[str, Dict[str, Any]]) -> RunConfig:
    """Merge ``raw`` over the defaults, type-check and range-check it."""
    if not isinstance(raw, dict):
        raise InvalidInput("configuration must be a mapping of sections")
    values = copy.deepcopy(DEFAULTS)
    for section, keys in raw.items():
        if section not in _KINDS:
            raise InvalidInput(f"unknown section [{section}]")
        if not isinstance(keys, dict):
            raise InvalidInput(f"section [{section}] must be a mapping")
        for key, val in keys.items():
            kind = _KINDS[section].get(key)
            if kind is None:
                raise InvalidInput(f"unknown key {section}.{key}")
            values[section][key] = kind(f"{section}.{key}", val)
    cfg = RunConfig(values)
    cfg.scenario()  # range checks live in the domain constructors
    return cfg


def _ini_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_ini(text: str) -> RunConfig:
    cp = configparser.ConfigParser(interpolation=None, default_section="\0")
    cp.optionxform = str  # keys are case-sensitive (p_T)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise InvalidInput(f"malformed configuration: {exc}") from None
    raw = {s: {k: _ini_value(v) for k, v in cp.items(s)} for s in cp.sections()}
    return from_sections(raw)


def parse_json(text: str) -> RunConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInput(f"malformed JSON configuration: {exc}") from None
    return from_sections(raw)


def parse_config(text: str, fmt: str = "auto") -> RunConfig:
    """Parse configuration text; ``fmt`` is ``ini``, ``json`` or ``auto``."""
    if fmt == "auto":
        fmt = "json" if text.lstrip().startswith("{") else "ini"
    if fmt == "json":
        return parse_json(text)
    if fmt == "ini":
        return parse_ini(text)
    raise InvalidInput(f"unknown configuration format {fmt!r}")


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InvalidInput(f"cannot read configuration {path}: {exc.strerror}") from None
    return parse_config(text, "json" if path.suffix.lower() == ".json" else "auto")


def default_config() -> RunConfig:
    return RunConfig(copy.deepcopy(DEFAULTS))
