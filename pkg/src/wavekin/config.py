"""Flat ``key = value`` run configuration.

One assignment per line, or several on one line separated by commas.  A
comma only separates assignments when the next token looks like
``name =``, so list values such as ``snapshot_times = 0, 10, 30`` work.
``#`` starts a comment.  Example::

    # Test III
    ic = monodisperse, omega_max = 2, cells = 20
    sweep = c1c2
    sweep_values = 1,1; 1,0.5; 0,1
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .errors import ConfigError
from .simulation import INITIAL_CONDITIONS, INTEGRATORS, SimConfig

__all__ = ["RunManifest", "parse_config", "load_config", "SWEEP_AXES", "DEFAULT_SWEEP_VALUES"]

SWEEP_AXES = {"none": None, "c1c2": ("c1", "c2"), "sigma_gamma": ("sigma", "gamma")}
DEFAULT_SWEEP_VALUES = ((1.0, 1.0), (1.0, 0.5), (0.5, 1.0), (1.0, 0.0), (0.0, 1.0))
DEFAULT_LEVELS = (16, 32, 64)

_SPLIT = re.compile(r",(?=\s*[A-Za-z_][A-Za-z0-9_]*\s*=)")
_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


@dataclass(frozen=True)
class RunManifest:
    """Resolved configuration plus orchestration settings."""

    config: SimConfig = field(default_factory=SimConfig)
    out_dir: Optional[str] = None
    sweep: Optional[str] = None  # None, "c1c2" or "sigma_gamma"
    sweep_values: tuple = DEFAULT_SWEEP_VALUES
    seed: int = 0
    levels: tuple = DEFAULT_LEVELS
    trials: int = 100
    max_cells: int = 8

    @property
    def sweep_keys(self):
        return SWEEP_AXES[self.sweep or "none"]

    def tuples(self):
        """``(slug, SimConfig)`` for every sweep member, in declared order."""
        keys = self.sweep_keys
        if keys is None:
            return [("run", self.config)]
        out = []
        for a, b in self.sweep_values:
            slug = f"{keys[0]}_{float(a)!r}_{keys[1]}_{float(b)!r}"
            out.append((slug, replace(self.config, **{keys[0]: float(a), keys[1]: float(b)})))
        return out


# --------------------------------------------------------------------------- value parsers


def _float(raw, key, line, lo=None, lo_open=False):
    try:
        v = float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}", key, line) from None
    if not math.isfinite(v):
        raise ConfigError(f"must be finite, got {raw!r}", key, line)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        raise ConfigError(f"must be {'>' if lo_open else '>='} {lo:g}, got {raw}", key, line)
    return v


def _int(raw, key, line, lo=None, hi=None):
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}", key, line) from None
    if (lo is not None and v < lo) or (hi is not None and v > hi):
        rng = f"[{lo}, {'inf' if hi is None else hi}]"
        raise ConfigError(f"must lie in {rng}, got {v}", key, line)
    return v


def _bool(raw, key, line):
    low = raw.lower()
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    raise ConfigError(f"expected true/false, got {raw!r}", key, line)


def _choice(raw, key, line, choices):
    if raw not in choices:
        raise ConfigError(f"must be one of {sorted(choices)}, got {raw!r}", key, line)
    return raw


def _float_list(raw, key, line):
    parts = [p for p in re.split(r"[,\s]+", raw) if p]
    return tuple(_float(p, key, line, lo=0.0) for p in parts)


def _int_list(raw, key, line):
    parts = [p for p in re.split(r"[,\s]+", raw) if p]
    vals = tuple(_int(p, key, line, lo=2) for p in parts)
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise ConfigError("levels must be strictly increasing", key, line)
    return vals


def _pairs(raw, key, line):
    out = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        nums = [p for p in re.split(r"[,\s]+", chunk.strip("() ")) if p]
        if len(nums) != 2:
            raise ConfigError(f"each tuple needs two numbers, got {chunk!r}", key, line)
        out.append(tuple(_float(p, key, line, lo=0.0) for p in nums))
    if not out:
        raise ConfigError("needs at least one tuple", key, line)
    return tuple(out)


_SIM_KEYS = {
    "rho": lambda r, k, l: _float(r, k, l, lo=1.0),
    "sigma": lambda r, k, l: _float(r, k, l, lo=0.0),
    "gamma": lambda r, k, l: _float(r, k, l, lo=0.0),
    "c1": lambda r, k, l: _float(r, k, l, lo=0.0),
    "c2": lambda r, k, l: _float(r, k, l, lo=0.0),
    "omega_min": lambda r, k, l: _float(r, k, l, lo=0.0, lo_open=True),
    "omega_max": lambda r, k, l: _float(r, k, l, lo=0.0, lo_open=True),
    "cells": lambda r, k, l: _int(r, k, l, lo=2),
    "dt": lambda r, k, l: _float(r, k, l, lo=0.0, lo_open=True),
    "t_end": lambda r, k, l: _float(r, k, l, lo=0.0),
    "ic": lambda r, k, l: _choice(r, k, l, set(INITIAL_CONDITIONS) | {"tabulated"}),
    "ic_file": lambda r, k, l: r,
    "integrator": lambda r, k, l: _choice(r, k, l, set(INTEGRATORS)),
    "snapshot_times": _float_list,
    "deterministic": _bool,
    "negativity_clamp": _bool,
    "threads": lambda r, k, l: _int(r, k, l, lo=1),
}

_RUN_KEYS = {
    "sweep": lambda r, k, l: _choice(r, k, l, set(SWEEP_AXES)),
    "sweep_values": _pairs,
    "seed": lambda r, k, l: _int(r, k, l, lo=0, hi=2**64 - 1),
    "levels": _int_list,
    "trials": lambda r, k, l: _int(r, k, l, lo=1),
    "max_cells": lambda r, k, l: _int(r, k, l, lo=2, hi=20),
    "out": lambda r, k, l: r,
}

KNOWN_KEYS = tuple(_SIM_KEYS) + tuple(_RUN_KEYS)


def _assignments(text):
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        for part in _SPLIT.split(line):
            part = part.strip()
            if not part:
                continue
            if "=" not in part:
                raise ConfigError(f"expected 'key = value', got {part!r}", line=lineno)
            key, raw = (s.strip() for s in part.split("=", 1))
            if not key:
                raise ConfigError("missing key before '='", line=lineno)
            yield lineno, key, raw


def parse_config(text: str) -> RunManifest:
    """Parse a configuration document; unspecified keys take their defaults."""
    sim, run, seen = {}, {}, {}
    for lineno, key, raw in _assignments(text):
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", key, lineno)
        seen[key] = lineno
        if raw == "":
            raise ConfigError("missing value", key, lineno)
        if key in _SIM_KEYS:
            sim[key] = _SIM_KEYS[key](raw, key, lineno)
        elif key in _RUN_KEYS:
            run[key] = _RUN_KEYS[key](raw, key, lineno)
        else:
            raise ConfigError(f"unknown key; known keys are {', '.join(KNOWN_KEYS)}", key, lineno)

    lo = sim.get("omega_min", SimConfig.omega_min)
    hi = sim.get("omega_max", SimConfig.omega_max)
    if not hi > lo:
        key = "omega_max" if "omega_max" in seen else "omega_min"
        raise ConfigError(f"need omega_min < omega_max, got {lo!r} >= {hi!r}", key, seen.get(key))
    t_end = sim.get("t_end", SimConfig.t_end)
    for t in sim.get("snapshot_times", ()):
        if t > t_end:
            raise ConfigError(f"snapshot time {t:g} exceeds t_end = {t_end:g}",
                              "snapshot_times", seen["snapshot_times"])
    if sim.get("ic") == "tabulated" and "ic_file" not in sim:
        raise ConfigError("ic = tabulated needs ic_file", "ic", seen["ic"])
    try:
        cfg = SimConfig(**sim)
    except ConfigError as exc:
        if exc.key is not None and exc.line is None and exc.key in seen:
            raise ConfigError(str(exc).split(": ", 1)[-1], exc.key, seen[exc.key]) from None
        raise

    sweep = run.pop("sweep", "none")
    if "sweep_values" in run and sweep == "none":
        raise ConfigError("sweep_values given but sweep = none", "sweep_values", seen["sweep_values"])
    out_dir = run.pop("out", None)
    return RunManifest(config=cfg, out_dir=out_dir, sweep=None if sweep == "none" else sweep, **run)


def load_config(path) -> RunManifest:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())

