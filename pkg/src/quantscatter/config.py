"""Plain-text ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored. Keys are case-sensitive and
unknown keys are rejected with their line number. Schema (defaults in
brackets):

  scenario
    preset          one of the preset names                     [none]
    state           one_photon | coherent | two_photon (explicit spec)
    model           two_point | sphere                          [two_point]
    lambda          1 or 9 comma-separated numbers              [0.1]
    axis            separation axis, 3 numbers                  [0,0,1]
    s1, n1, s2, n2  unit directions, 3 numbers each
    pol1            2 polarization coefficients                 [1,0]
    pol_matrix      4 numbers, row-major 2x2                    [0,1,1,0]
    component1/2    detected field component 0..2               [1 / 0]
    ratio           omega2 / omega1                             [0.75]
    omega0          reference frequency                         [1]
    angular_width   envelope width in rad                       [0.01]
  scan
    variable        x (a*omega0 at fixed omega0) | omega (a fixed) [x]
    start, stop     grid bounds                                 [0, 4 pi]
    points          number of samples                           [2000]
    a               separation used by omega scans              [1.3]
    noise           relative multiplicative noise on the output [0]
  fit
    bounds          lo, hi                                      [0.2, 4]
    prior_domain    index n of D_n, or none                     [none]
    fit_noise       noise level assumed when judging ties       [none]
    n_grid          coarse grid nodes                           [400]
  oracle
    widths          comma-separated angular widths              [0.04,0.02,0.01]
    n_theta, n_phi  quadrature nodes                            [24, 24]
    lambda_scale    overall susceptibility scale                [0.1]
    correlator      phi1 | phi2                                 [phi1]
  fig1
    chi             resolution parameter                        [0.9]

Units throughout: c = hbar = eps0 = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Invalid configuration; the message names the line or field."""


def _floats(n=None):
    def conv(v):
        vals = [float(t) for t in v.replace(",", " ").split()]
        if n is not None and len(vals) not in (n if isinstance(n, tuple) else (n,)):
            raise ValueError(f"expected {n} numbers, got {len(vals)}")
        return tuple(vals)
    return conv


def _optional_int(v):
    return None if v.strip().lower() in ("none", "") else int(v)


def _optional_float(v):
    return None if v.strip().lower() in ("none", "") else float(v)


SCHEMA = {
    "preset": str, "state": str, "model": str,
    "lambda": _floats((1, 9)), "axis": _floats(3),
    "s1": _floats(3), "n1": _floats(3), "s2": _floats(3), "n2": _floats(3),
    "pol1": _floats(2), "pol_matrix": _floats(4),
    "component1": int, "component2": int,
    "ratio": float, "omega0": float, "angular_width": float,
    "variable": str, "start": float, "stop": float, "points": int,
    "a": float, "noise": float,
    "bounds": _floats(2), "prior_domain": _optional_int, "fit_noise": _optional_float,
    "n_grid": int,
    "widths": _floats(), "n_theta": int, "n_phi": int, "lambda_scale": float,
    "correlator": str,
    "chi": float,
}

EXPLICIT_KEYS = {"state", "model", "lambda", "axis", "s1", "n1", "s2", "n2", "pol1",
                 "pol_matrix", "component1", "component2", "ratio", "angular_width"}


@dataclass
class RunConfig:
    values: dict = field(default_factory=dict)
    source: str = "<config>"

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def preset(self):
        return self.values.get("preset")

    @property
    def explicit(self) -> bool:
        return "state" in self.values

    def grid(self):
        import numpy as np
        start = self.get("start", 0.0)
        stop = self.get("stop", 4 * math.pi)
        points = self.get("points", 2000)
        if not stop > start:
            raise ConfigError(f"{self.source}: grid bounds must satisfy start < stop")
        if points < 2:
            raise ConfigError(f"{self.source}: points must be at least 2")
        return np.linspace(start, stop, points)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values = {}
    lines = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, val = (t.strip() for t in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} (first on line {lines[key]})")
        try:
            values[key] = SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key!r}: {exc}") from None
        lines[key] = lineno
    cfg = RunConfig(values, source)
    validate(cfg, lines)
    return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, str(path))


def validate(cfg: RunConfig, lines: dict | None = None) -> None:
    lines = lines or {}
    where = lambda k: f"{cfg.source}:{lines[k]}" if k in lines else f"{cfg.source}: field {k!r}"
    v = cfg.values
    explicit = EXPLICIT_KEYS & v.keys()
    if "preset" in v and explicit:
        k = sorted(explicit)[0]
        raise ConfigError(f"{where(k)}: give either a preset or an explicit spec, not both")
    if explicit and "state" not in v:
        k = sorted(explicit)[0]
        raise ConfigError(f"{where(k)}: an explicit spec needs 'state'")
    if "variable" in v and v["variable"] not in ("x", "omega"):
        raise ConfigError(f"{where('variable')}: variable must be 'x' or 'omega'")
    if "correlator" in v and v["correlator"] not in ("phi1", "phi2"):
        raise ConfigError(f"{where('correlator')}: correlator must be 'phi1' or 'phi2'")
    if "bounds" in v and not (0 < v["bounds"][0] < v["bounds"][1]):
        raise ConfigError(f"{where('bounds')}: bounds must be positive and ordered")
    if "start" in v and "stop" in v and not v["start"] < v["stop"]:
        raise ConfigError(f"{where('stop')}: grid bounds must satisfy start < stop")
    for k in ("points", "n_grid", "n_theta", "n_phi"):
        if k in v and v[k] < 1:
            raise ConfigError(f"{where(k)}: {k} must be positive")
    for k in ("noise", "angular_width", "lambda_scale"):
        if k in v and v[k] < 0:
            raise ConfigError(f"{where(k)}: {k} must be non-negative")
    if "widths" in v and (not v["widths"] or min(v["widths"]) <= 0):
        raise ConfigError(f"{where('widths')}: widths must be positive")
