"""Run configuration files.

The format is deliberately plain: bracketed sections of ``key = value``
lines (INI), every key checked against a fixed schema so typos fail fast,
floats written back with repr so parse -> serialize -> parse is the
identity.  Grids use a ``start:stop:step`` triple with an inclusive stop.

Temperature uses ``beta_hbar = inf`` for the zero-temperature branch.
"""

from __future__ import annotations

import configparser
import dataclasses
import io
import math
from typing import Dict, Optional

import numpy as np

from .errors import ConfigError

__all__ = ["GridSpec", "RunConfig", "parse_config", "parse_config_file",
           "serialize_config", "validate_config", "EXPERIMENTS"]

EXPERIMENTS = ("bath-fit", "respond", "anneal", "rdm", "validate")


@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Uniform grid start:stop:step, stop included (snapped to the step)."""

    start: float
    stop: float
    step: float

    def __post_init__(self):
        if self.step <= 0:
            raise ConfigError("grid step must be positive")
        # stop == start is the single-point grid (zero-length horizon)
        if self.stop < self.start:
            raise ConfigError("grid stop must not precede start")

    def values(self) -> np.ndarray:
        n = int(round((self.stop - self.start) / self.step))
        return self.start + self.step * np.arange(n + 1)

    def __str__(self):
        return f"{self.start!r}:{self.stop!r}:{self.step!r}"


def _parse_grid(text: str) -> GridSpec:
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be start:stop:step, got {text!r}")
    return GridSpec(*(float(p) for p in parts))


def _parse_beta(text: str) -> float:
    if text.strip().lower() == "inf":
        return math.inf
    return float(text)


def _format_beta(value: float) -> str:
    return "inf" if math.isinf(value) else repr(float(value))


# section -> key -> (parser, formatter)
_FLOAT = (float, lambda v: repr(float(v)))
_INT = (int, lambda v: str(int(v)))
_STR = (lambda s: s, lambda v: str(v))
_GRID = (_parse_grid, str)
_SCHEMA = {
    "experiment": {"kind": _STR},
    "bath": {
        "density": _STR, "zeta": _FLOAT, "nu": _FLOAT,
        "eta": _FLOAT, "gamma": _FLOAT,
        "beta_hbar": (_parse_beta, _format_beta),
        "Omega": _FLOAT, "K": _INT,
    },
    "hierarchy": {"n_max": _INT, "max_indices": _INT},
    "integrator": {"dt": _FLOAT},
    "model": {"kind": _STR, "omega0": _FLOAT, "Ncal": _INT,
              "Gamma": _FLOAT, "p": _INT, "t_f": _FLOAT},
    "run": {"t": _FLOAT, "t0": _FLOAT, "tau": _GRID, "omega": _GRID,
            "record": _GRID, "window_time": _FLOAT, "init": _STR,
            "drift_tolerance": _FLOAT, "t_max": _FLOAT, "workers": _INT},
    "output": {"directory": _STR},
}

_REQUIRED = {
    "bath-fit": {"bath": ("density", "beta_hbar", "Omega", "K"),
                 "run": ("t_max",)},
    "respond": {"bath": ("density", "beta_hbar", "Omega", "K"),
                "hierarchy": ("n_max",),
                "model": ("kind", "omega0"),
                "run": ("t0", "tau", "omega")},
    "anneal": {"bath": ("density", "beta_hbar", "Omega", "K"),
               "hierarchy": ("n_max",),
               "model": ("kind", "Ncal", "Gamma", "p", "t_f"),
               "run": ("record",)},
    "rdm": {"bath": ("density", "beta_hbar", "Omega", "K"),
            "hierarchy": ("n_max",),
            "model": ("kind", "omega0"),
            "run": ("record", "init")},
    "validate": {},
}

_DENSITY_KEYS = {"ohmic_circular": ("zeta", "nu"),
                 "ohmic_exponential": ("eta", "gamma")}


@dataclasses.dataclass
class RunConfig:
    """Parsed configuration: section -> key -> typed value."""

    data: Dict[str, Dict[str, object]]

    @property
    def experiment(self) -> str:
        return self.data["experiment"]["kind"]

    def get(self, section: str, key: str, default=None):
        return self.data.get(section, {}).get(key, default)

    def require(self, section: str, key: str):
        try:
            return self.data[section][key]
        except KeyError:
            raise ConfigError("required key missing", section=section,
                              key=key) from None

    def replace(self, section: str, key: str, value) -> "RunConfig":
        data = {s: dict(kv) for s, kv in self.data.items()}
        data.setdefault(section, {})[key] = value
        return RunConfig(data)


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keep key case: Omega and K are spelled as such
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    data: Dict[str, Dict[str, object]] = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError("unknown section", section=section)
        data[section] = {}
        for key, raw in parser.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError("unknown key", section=section, key=key)
            parse, _ = _SCHEMA[section][key]
            try:
                data[section][key] = parse(raw)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"bad value {raw!r}: {exc}",
                                  section=section, key=key) from exc
    if "experiment" not in data or "kind" not in data["experiment"]:
        raise ConfigError("required key missing", section="experiment",
                          key="kind")
    return RunConfig(data)


def parse_config_file(path) -> RunConfig:
    with open(path) as fh:
        return parse_config(fh.read())


def serialize_config(cfg: RunConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) == cfg."""
    out = io.StringIO()
    first = True
    for section, keys in _SCHEMA.items():
        if section not in cfg.data or not cfg.data[section]:
            continue
        if not first:
            out.write("\n")
        first = False
        out.write(f"[{section}]\n")
        for key, (_, fmt) in keys.items():
            if key in cfg.data[section]:
                out.write(f"{key} = {fmt(cfg.data[section][key])}\n")
    return out.getvalue()


def validate_config(cfg: RunConfig) -> None:
    """Structural and cross-field checks; raises ConfigError on the first."""
    kind = cfg.experiment
    if kind not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {kind!r}; expected one of "
                          f"{', '.join(EXPERIMENTS)}",
                          section="experiment", key="kind")
    for section, keys in _REQUIRED[kind].items():
        for key in keys:
            cfg.require(section, key)
    if "bath" in _REQUIRED[kind]:
        density = cfg.require("bath", "density")
        if density not in _DENSITY_KEYS:
            raise ConfigError(f"unknown density {density!r}",
                              section="bath", key="density")
        for key in _DENSITY_KEYS[density]:
            cfg.require("bath", key)
    if kind in ("respond", "rdm") and cfg.get("model", "kind") not in (
            "spin_boson", "pure_dephasing"):
        raise ConfigError(f"experiment {kind} needs a two-level model",
                          section="model", key="kind")
    if kind == "anneal" and cfg.get("model", "kind") != "pspin":
        raise ConfigError("anneal needs the pspin model",
                          section="model", key="kind")
    if kind == "rdm":
        init = cfg.require("run", "init")
        if init not in ("plus", "thermal", "basis0", "basis1"):
            raise ConfigError(f"unknown init {init!r}", section="run",
                              key="init")


def horizon_of(cfg: RunConfig) -> Optional[float]:
    """The largest physical time the experiment reaches, if any."""
    kind = cfg.experiment
    if kind == "respond":
        return cfg.require("run", "t0") + cfg.require("run", "tau").stop
    if kind == "anneal":
        return cfg.require("model", "t_f")
    if kind == "rdm":
        return cfg.require("run", "record").stop
    if kind == "bath-fit":
        return cfg.require("run", "t_max")
    return None
