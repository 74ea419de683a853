"""Strict key = value scenario configuration.

Format: one ``key = value`` per line, ``#`` starts a comment, blank lines are
ignored.  Sweep axes are written ``sweep.<name> = v1, v2, ...`` or
``sweep.<name> = start:stop:count`` (inclusive linspace).  Unknown keys,
duplicate keys and malformed values are errors.
"""

import math
import re
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from ..core import Params
from ..dynamics import ControlSignal, IntegratorOptions


class ConfigError(ValueError):
    pass


def _opt_float(text):
    return None if text.lower() in ("", "none", "auto") else float(text)


def _angle(text):
    # plain floats or multiples of pi: "pi/2", "-pi/3", "0.25*pi"
    t = text.strip().lower().replace(" ", "")
    m = re.fullmatch(r"([+-]?[0-9.e]*)\*?pi(?:/([0-9.]+))?", t)
    if not m:
        return float(t)
    coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(m.group(1))
    if coef is None:
        coef = float(m.group(1))
    return coef * math.pi / (float(m.group(2)) if m.group(2) else 1.0)


SCHEMA = {
    "scenario": str,
    "nu": float,
    "theta0": _angle,
    "signal": str,
    "epsilon": float,
    "omega": _opt_float,
    "phi": _angle,
    "gamma": float,
    "tau": float,
    "t_end": _opt_float,
    "n_skip": lambda s: None if s.lower() in ("", "none", "auto") else int(s),
    "n_avg": int,
    "cycles": int,
    "method": str,
    "rtol": float,
    "atol": float,
    "dt": float,
    "sample_dt": _opt_float,
    "seed": int,
    "workers": int,
    "out": str,
}


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str = "custom"
    nu: float = 0.5
    theta0: float = 0.0
    signal: str = "sinusoidal"
    epsilon: float = 0.1
    omega: float | None = None  # None -> optimal frequency for nu
    phi: float = math.pi / 2
    gamma: float = 0.1
    tau: float = 0.01
    t_end: float | None = None
    n_skip: int | None = None
    n_avg: int = 100
    cycles: int = 100
    method: str = "RK45"
    rtol: float = 1e-10
    atol: float = 1e-10
    dt: float = 1e-3
    sample_dt: float | None = None
    seed: int = 0
    workers: int = 1
    out: str = "runs"
    sweep: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.signal not in ("sinusoidal", "piecewise4", "zero"):
            raise ConfigError(f"signal must be sinusoidal, piecewise4 or zero, not {self.signal!r}")
        if self.method not in ("RK45", "RK4"):
            raise ConfigError(f"method must be RK45 or RK4, not {self.method!r}")
        if not self.nu > 0:
            raise ConfigError("nu must be positive")
        if self.workers < 1 or self.n_avg < 1 or self.cycles < 1:
            raise ConfigError("workers, n_avg and cycles must be >= 1")
        for name in self.sweep:
            if name not in SCHEMA or SCHEMA[name] is str:
                raise ConfigError(f"cannot sweep over {name!r}")

    @property
    def params(self):
        return Params(self.nu)

    @property
    def omega_value(self):
        if self.omega is not None:
            return self.omega
        return 18 * math.sqrt(3 / 5) * self.nu

    def control(self):
        if self.signal == "sinusoidal":
            return ControlSignal.sinusoidal(self.epsilon, self.omega_value, self.phi)
        if self.signal == "piecewise4":
            return ControlSignal.piecewise4(self.gamma, self.tau)
        return ControlSignal.zero()

    def integrator(self):
        return IntegratorOptions(method=self.method, rtol=self.rtol, atol=self.atol,
                                 dt=self.dt, sample_dt=self.sample_dt)

    def with_(self, **changes):
        return replace(self, **changes)

    def to_text(self):
        lines = []
        for f in fields(self):
            if f.name == "sweep":
                continue
            v = getattr(self, f.name)
            lines.append(f"{f.name} = {'auto' if v is None else _fmt(v)}")
        for name, values in self.sweep.items():
            lines.append(f"sweep.{name} = " + ", ".join(_fmt(v) for v in values))
        return "\n".join(lines) + "\n"


def _fmt(v):
    return f"{v:.17g}" if isinstance(v, float) else str(v)


def _parse_axis(name, text):
    conv = SCHEMA.get(name)
    if conv is None or conv is str:
        raise ConfigError(f"unknown sweep axis {name!r}")
    try:
        if ":" in text:
            start, stop, count = text.split(":")
            return [float(v) for v in np.linspace(float(start), float(stop), int(count))]
        return [conv(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad values for sweep.{name}: {text!r}") from exc


def parse_config(text, source="<config>"):
    values = {}
    sweep = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        if key.startswith("sweep."):
            axis = key[len("sweep."):]
            if axis in sweep:
                raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
            sweep[axis] = _parse_axis(axis, val)
            continue
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = SCHEMA[key](val)
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {val!r}") from exc
    try:
        return ScenarioConfig(sweep=sweep, **values)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{source}: {exc}") from exc


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, str(path))
