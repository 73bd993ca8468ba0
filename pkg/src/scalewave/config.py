"""
Experiment configuration: TOML documents, validation and presets.

A configuration is a set of flat tables; every key has a default::

    [coefficients]
    mu1 = 4.0
    mu2 = 0.0
    d = 3

    [data]
    class = "lebesgue"
    r = 1.0

Unknown tables or keys are rejected with their dotted path.
"""

from __future__ import annotations

import copy
import math
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .initial_data import FrequencyPowerBump, GaussianPhysical, InitialData
from .mode_kernel import ToleranceSpec
from .params import Coefficients, EnergyClass, LebesgueClass, NegSobolevClass
from .spectral import RadialGrid

__all__ = ["ConfigError", "ExperimentConfig", "PRESETS", "preset", "load_config", "dump_config"]


class ConfigError(ValueError):
    """Invalid configuration; the message starts with the offending field path."""


@dataclass
class CoefficientsCfg:
    mu1: float = 0.0
    mu2: float = 0.0
    d: int = 3


@dataclass
class DataCfg:
    data_class: str = "lebesgue"   # lebesgue | neg_sobolev | energy
    r: float = 1.0
    s: float = 0.5
    family: str = "gaussian"       # gaussian | power_bump
    amplitude: float = 1.0
    width: float = 1.0
    exponent: float = 0.0
    inner: float = 0.0
    outer: float = 1.0
    smoothing: float = 0.1
    slot: str = "position"         # position | velocity | both


@dataclass
class GridCfg:
    rho_min: float = 1e-4
    rho_max: float = 64.0
    n_log: int = 256
    n_lin: int = 256


@dataclass
class TimeCfg:
    t_max: float = 1e3
    n_samples: int = 401


@dataclass
class ScatterCfg:
    T_max: float = 1e4
    start: float = 10.0


@dataclass
class RatesCfg:
    fit_lo: float = 1e2
    fit_hi: float = 1e4
    n_samples: int = 41
    band: float = 0.05


@dataclass
class ZonesCfg:
    N: float = 10.0


@dataclass
class ToleranceCfg:
    rel_tol: float = 1e-12
    abs_tol: float = 1e-30
    max_steps: int = 50_000_000
    period_fraction: float = 0.25
    check_rel: float = 1e-8


@dataclass
class RunCfg:
    name: str = "custom"
    method: str = "auto"
    include_dw: bool = False
    informational: bool = False


@dataclass
class SweepCfg:
    mu1: list = field(default_factory=list)
    mu2: list = field(default_factory=lambda: [0.0])
    r: list = field(default_factory=list)
    s: list = field(default_factory=list)
    fit: bool = False


@dataclass
class OutputCfg:
    dir: str = "out"


# TOML key for DataCfg.data_class
_RENAME = {("data", "data_class"): "class"}


@dataclass
class ExperimentConfig:
    coefficients: CoefficientsCfg = field(default_factory=CoefficientsCfg)
    data: DataCfg = field(default_factory=DataCfg)
    grid: GridCfg = field(default_factory=GridCfg)
    time: TimeCfg = field(default_factory=TimeCfg)
    scatter: ScatterCfg = field(default_factory=ScatterCfg)
    rates: RatesCfg = field(default_factory=RatesCfg)
    zones: ZonesCfg = field(default_factory=ZonesCfg)
    tolerance: ToleranceCfg = field(default_factory=ToleranceCfg)
    run: RunCfg = field(default_factory=RunCfg)
    sweep: SweepCfg = field(default_factory=SweepCfg)
    output: OutputCfg = field(default_factory=OutputCfg)

    # ------------------------------------------------------------ dicts
    def to_dict(self) -> dict:
        out = {}
        for sec in fields(self):
            tab = {}
            obj = getattr(self, sec.name)
            for f in fields(obj):
                tab[_RENAME.get((sec.name, f.name), f.name)] = copy.deepcopy(getattr(obj, f.name))
            out[sec.name] = tab
        return out

    @classmethod
    def from_dict(cls, doc: dict, base: "ExperimentConfig | None" = None) -> "ExperimentConfig":
        cfg = copy.deepcopy(base) if base is not None else cls()
        sections = {f.name: f for f in fields(cls)}
        for sname, tab in doc.items():
            if sname not in sections:
                raise ConfigError(f"{sname}: unknown table")
            if not isinstance(tab, dict):
                raise ConfigError(f"{sname}: expected a table")
            obj = getattr(cfg, sname)
            keys = {_RENAME.get((sname, f.name), f.name): f for f in fields(obj)}
            for key, val in tab.items():
                if key not in keys:
                    raise ConfigError(f"{sname}.{key}: unknown key")
                f = keys[key]
                setattr(obj, f.name, _coerce(f"{sname}.{key}", getattr(obj, f.name), val))
        cfg.validate()
        return cfg

    # ------------------------------------------------------- validation
    def validate(self) -> None:
        c, dt, g = self.coefficients, self.data, self.grid

        def need(cond, path, msg):
            if not cond:
                raise ConfigError(f"{path}: {msg}")

        need(c.d >= 1, "coefficients.d", "must be >= 1")
        for k in ("mu1", "mu2"):
            need(math.isfinite(getattr(c, k)), f"coefficients.{k}", "must be finite")
        need(dt.data_class in ("lebesgue", "neg_sobolev", "energy"), "data.class",
             "must be 'lebesgue', 'neg_sobolev' or 'energy'")
        need(1.0 <= dt.r < 2.0, "data.r", "must lie in [1, 2)")
        need(dt.s > 0.0, "data.s", "must be positive")
        need(dt.family in ("gaussian", "power_bump"), "data.family", "must be 'gaussian' or 'power_bump'")
        need(dt.slot in ("position", "velocity", "both"), "data.slot",
             "must be 'position', 'velocity' or 'both'")
        need(dt.width > 0.0, "data.width", "must be positive")
        need(0.0 < dt.smoothing < 1.0, "data.smoothing", "must lie in (0, 1)")
        need(dt.inner >= 0.0 and dt.outer > 0.0, "data.outer", "need inner >= 0 < outer")
        need(dt.inner * (1 + dt.smoothing) <= dt.outer * (1 - dt.smoothing), "data.inner",
             "blends of inner and outer cutoff overlap")
        need(0.0 < g.rho_min < 1.0, "grid.rho_min", "must lie in (0, 1)")
        need(g.rho_max > 1.0, "grid.rho_max", "must exceed 1")
        need(g.n_log >= 2, "grid.n_log", "must be >= 2")
        need(g.n_lin >= 2, "grid.n_lin", "must be >= 2")
        need(self.time.t_max > 0.0, "time.t_max", "must be positive")
        need(self.time.n_samples >= 5, "time.n_samples", "must be >= 5")
        need(self.scatter.start > 0.0, "scatter.start", "must be positive")
        need(self.scatter.T_max >= 2 * self.scatter.start, "scatter.T_max", "must be >= 2*start")
        r = self.rates
        need(0.0 < r.fit_lo < r.fit_hi, "rates.fit_lo", "need 0 < fit_lo < fit_hi")
        need(r.fit_hi <= self.scatter.T_max, "rates.fit_hi", "must not exceed scatter.T_max")
        need(r.n_samples >= 10, "rates.n_samples", "must be >= 10")
        need(r.band > 0.0, "rates.band", "must be positive")
        need(self.zones.N > 0.0, "zones.N", "must be positive")
        t = self.tolerance
        need(t.rel_tol > 0.0, "tolerance.rel_tol", "must be positive")
        need(t.abs_tol > 0.0, "tolerance.abs_tol", "must be positive")
        need(t.max_steps >= 1, "tolerance.max_steps", "must be >= 1")
        need(0.0 < t.period_fraction <= 1.0, "tolerance.period_fraction", "must lie in (0, 1]")
        need(t.check_rel > 0.0, "tolerance.check_rel", "must be positive")
        need(self.run.method in ("auto", "bessel", "ode"), "run.method",
             "must be 'auto', 'bessel' or 'ode'")
        for k in ("mu1", "mu2", "r", "s"):
            for i, v in enumerate(getattr(self.sweep, k)):
                need(isinstance(v, (int, float)) and math.isfinite(v), f"sweep.{k}[{i}]",
                     "must be a finite number")
        for i, v in enumerate(self.sweep.r):
            need(1.0 <= v < 2.0, f"sweep.r[{i}]", "must lie in [1, 2)")
        for i, v in enumerate(self.sweep.s):
            need(v > 0.0, f"sweep.s[{i}]", "must be positive")
        if self.run.method == "bessel":
            a = c.mu1 * (2 - c.mu1) / 4 + c.mu2
            need(a <= 0.25 + 1e-12, "run.method", "'bessel' needs mu <= 1/4")

    def check_fit_ready(self) -> None:
        """Extra requirements for exponent fits.

        The extracted profile is exact at ``T_max`` by construction, so the
        remainder collapses near it; and nodes must reach ``(1+t)ρ ≪ 1`` at
        the end of the fit window.
        """
        r = self.rates
        if self.scatter.T_max < 100.0 * r.fit_hi:
            raise ConfigError("scatter.T_max: fits need T_max >= 100*rates.fit_hi")
        if self.grid.rho_min * r.fit_hi > 1e-2 * (1 + 1e-12):
            raise ConfigError("grid.rho_min: fits need rho_min*rates.fit_hi <= 1e-2")

    # ----------------------------------------------------------- builders
    def coefficients_obj(self) -> Coefficients:
        c = self.coefficients
        return Coefficients(c.mu1, c.mu2, c.d)

    def data_class_obj(self):
        dt = self.data
        if dt.data_class == "lebesgue":
            return LebesgueClass(dt.r)
        if dt.data_class == "neg_sobolev":
            return NegSobolevClass(dt.s)
        return EnergyClass()

    def family_obj(self):
        dt = self.data
        if dt.family == "gaussian":
            return GaussianPhysical(dt.amplitude, dt.width)
        return FrequencyPowerBump(dt.exponent, dt.inner, dt.outer, dt.smoothing, dt.amplitude)

    def initial_data_obj(self) -> InitialData:
        return InitialData(self.family_obj(), self.data.slot)

    def grid_obj(self, reduced: bool = False) -> RadialGrid:
        g = self.grid
        nl, nn = (max(2, g.n_log // 4), max(2, g.n_lin // 4)) if reduced else (g.n_log, g.n_lin)
        return RadialGrid.build(self.coefficients.d, g.rho_min, g.rho_max, nl, nn)

    def tolerance_obj(self, scale: float = 1.0) -> ToleranceSpec:
        t = self.tolerance
        return ToleranceSpec(t.abs_tol * scale, t.rel_tol * scale, int(t.max_steps), t.period_fraction)


def _coerce(path: str, default: Any, val: Any) -> Any:
    if isinstance(default, bool):
        if not isinstance(val, bool):
            raise ConfigError(f"{path}: expected a boolean")
        return val
    if isinstance(default, int):
        if isinstance(val, bool) or not (isinstance(val, int) or (isinstance(val, float) and val.is_integer())):
            raise ConfigError(f"{path}: expected an integer")
        return int(val)
    if isinstance(default, float):
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{path}: expected a number")
        return float(val)
    if isinstance(default, str):
        if not isinstance(val, str):
            raise ConfigError(f"{path}: expected a string")
        return val
    if isinstance(default, list):
        if not isinstance(val, list) or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in val):
            raise ConfigError(f"{path}: expected a list of numbers")
        return [float(v) for v in val]
    raise ConfigError(f"{path}: unsupported value")


def load_config(path, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Parse a TOML file on top of ``base`` (defaults if omitted)."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: invalid TOML in {path}: {exc}") from exc
    return ExperimentConfig.from_dict(doc, base)


def dumps_config(cfg: ExperimentConfig) -> str:
    return tomli_w.dumps(cfg.to_dict())


def dump_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(dumps_config(cfg))


def _preset_docs() -> dict[str, dict]:
    rate_grid = {"rho_min": 1e-6}
    deep_grid = {"rho_min": 1e-7}
    rate_scatter = {"T_max": 1e8}
    return {
        "free": {
            "run": {"name": "free"},
            "coefficients": {"mu1": 0.0, "mu2": 0.0, "d": 3},
            "grid": rate_grid, "scatter": rate_scatter,
        },
        "dabbicco-wave": {
            "run": {"name": "dabbicco-wave", "include_dw": True},
            "coefficients": {"mu1": 4.0, "mu2": 0.0, "d": 3},
            "grid": rate_grid, "scatter": rate_scatter,
        },
        "log-case": {
            "run": {"name": "log-case"},
            "coefficients": {"mu1": 0.0, "mu2": 0.25, "d": 1},
            "grid": deep_grid, "scatter": rate_scatter,
        },
        "heat-regime": {
            "run": {"name": "heat-regime", "include_dw": True, "informational": True},
            "coefficients": {"mu1": 7.0, "mu2": 0.0, "d": 3},
            "grid": rate_grid, "scatter": rate_scatter,
        },
        "neg-mu": {
            "run": {"name": "neg-mu"},
            "coefficients": {"mu1": 0.0, "mu2": -2.0, "d": 3},
            "data": {"width": 0.5},
            "grid": rate_grid, "scatter": rate_scatter,
        },
        "neg-sobolev": {
            "run": {"name": "neg-sobolev"},
            "coefficients": {"mu1": 0.0, "mu2": 0.1875, "d": 3},
            "data": {"class": "neg_sobolev", "s": 0.25, "family": "power_bump",
                     "exponent": 0.25 - 1.5 + 0.02, "inner": 0.0, "outer": 4.0,
                     "smoothing": 0.75},
            "grid": deep_grid, "scatter": rate_scatter, "time": {"t_max": 1e4},
        },
        "mild-mass": {
            "run": {"name": "mild-mass"},
            "coefficients": {"mu1": 0.0, "mu2": 0.1875, "d": 3},
            "grid": rate_grid, "scatter": rate_scatter,
        },
    }


PRESETS = tuple(_preset_docs())


def preset(name: str) -> ExperimentConfig:
    """Built-in configuration by name (see :data:`PRESETS`)."""
    docs = _preset_docs()
    if name not in docs:
        raise ConfigError(f"preset: unknown preset {name!r}; choose from {', '.join(docs)}")
    return ExperimentConfig.from_dict(docs[name])
