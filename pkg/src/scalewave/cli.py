"""
Command line interface.

Subcommands
-----------
run      evolve the configured data, record norm series, check the energy
         identity, non-decay and little-o trends
scatter  extract the scattering profile and the remainder series
rates    fit decay exponents and compare with the predicted rates
verify   property suite on a reduced grid
sweep    table of predicted (and optionally fitted) exponents over a
         parameter grid

Exit codes: 0 all applicable checks pass, 1 check failure, 2 configuration
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
import traceback
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import analysis as an
from . import mode_kernel as mk
from . import propagator as pg
from .config import PRESETS, ConfigError, ExperimentConfig, dump_config, load_config, preset
from .initial_data import membership_report, sample_spectrum
from .params import (Coefficients, LebesgueClass, NegSobolevClass, alpha_of,
                     derive_params, gamma_of, predict_dw_rate, predict_remainder_rate,
                     predict_solution_bound)

__all__ = ["main", "Context", "run", "scatter", "rates", "verify", "sweep"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class NumericalFailure(RuntimeError):
    """Raised for solver failures; carries the module context."""


@dataclass
class Context:
    """Resolved configuration plus derived objects shared by subcommands."""

    cfg: ExperimentConfig
    out: Path
    tol_scale: float = 1.0
    seed: int | None = None
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        self.c = self.cfg.coefficients_obj()
        self.p = derive_params(self.c)
        self.dc = self.cfg.data_class_obj()
        self.data = self.cfg.initial_data_obj()
        self.tol = self.cfg.tolerance_obj(self.tol_scale)
        self.method = self.cfg.run.method

    def grid(self, reduced=False):
        return self.cfg.grid_obj(reduced)

    def initial_u(self, grid):
        return sample_spectrum(self.data, grid)

    def initial_v(self, grid):
        return pg.liouville_forward(self.initial_u(grid), self.c)

    def check(self, name: str, passed: bool | None, value: float, threshold: float | None = None,
              applicable: bool = True, **extra) -> None:
        rec = {"passed": None if passed is None else bool(passed), "applicable": bool(applicable),
               "value": _num(value), "threshold": _num(threshold)}
        rec.update({k: _jsonable(v) for k, v in extra.items()})
        self.checks[name] = rec

    @property
    def failed(self) -> list[str]:
        return [k for k, v in self.checks.items() if v["applicable"] and v["passed"] is False]

    def write_json(self, name: str, doc: dict) -> Path:
        path = self.out / name
        with open(path, "w") as fh:
            json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return _num(obj)
    if isinstance(obj, complex):
        return {"re": _num(obj.real), "im": _num(obj.imag)}
    return obj


def _pred(r) -> dict:
    if not r.applicable:
        return {"applicable": False, "source": r.source}
    return {"applicable": True, "exponent": r.exponent, "log_power": r.log_power, "source": r.source}


def _derived_summary(ctx: Context) -> dict:
    p, d, dc = ctx.p, ctx.c.d, ctx.dc
    doc = {"mu": p.mu, "nu": p.nu, "re_nu": p.re_nu, "delta": p.delta}
    if isinstance(dc, LebesgueClass):
        doc["alpha"] = alpha_of(p, dc.r, d)
    if isinstance(dc, NegSobolevClass):
        doc["gamma"] = gamma_of(p, dc.s)
    return doc


def _predictions(ctx: Context) -> dict:
    p, d, dc = ctx.p, ctx.c.d, ctx.dc
    return {
        "remainder": _pred(predict_remainder_rate(p, dc, d)),
        "dw_remainder": _pred(predict_dw_rate(p, dc, d)),
        "l2_growth": _pred(predict_solution_bound(p, dc, d)),
        "energy_bound": _pred(predict_solution_bound(p, dc, d, energy_norm=True)),
    }


def _log_times(t_max: float, n: int, t_min: float = 0.0) -> np.ndarray:
    """``n`` times with ``1+t`` geometric on ``[1+t_min, 1+t_max]``."""
    return np.expm1(np.linspace(math.log1p(t_min), math.log1p(t_max), n))


def _base_summary(ctx: Context, command: str, t_start: float) -> dict:
    mem = membership_report(ctx.data, ctx.dc, ctx.c.d, ctx.c.mu1)
    return {
        "command": command,
        "preset": ctx.cfg.run.name,
        "informational": ctx.cfg.run.informational,
        "coefficients": asdict(ctx.cfg.coefficients),
        "data_class": type(ctx.dc).__name__,
        "derived": _derived_summary(ctx),
        "predictions": _predictions(ctx),
        "membership": {"member": mem.member, "class_norm": mem.class_norm, "reasons": list(mem.reasons)},
        "checks": ctx.checks,
        "failed": ctx.failed,
        "notes": ctx.notes,
        "seed": ctx.seed,
        "wall_time": time.perf_counter() - t_start,
    }


# ------------------------------------------------------------------ run
def run(ctx: Context) -> dict:
    """Evolve, record series, run conservation and trend checks."""
    t0 = time.perf_counter()
    cfg = ctx.cfg
    grid = ctx.grid()
    p, c = ctx.p, ctx.c
    u0 = ctx.initial_u(grid)
    v0 = pg.liouville_forward(u0, c)
    times = _log_times(cfg.time.t_max, cfg.time.n_samples)
    traj = pg.trajectory(v0, times, p, ctx.method, ctx.tol)
    norms = [an.state_norms(s) for s in traj]
    energies = [an.energy(s, p.mu) for s in traj]
    l2 = an.NormSeries(times, np.array([n.l2_of_v for n in norms]), "l2")
    pair = an.NormSeries(times, np.array([n.pair_norm for n in norms]), "pair")
    en = an.NormSeries(times, np.array([e.total for e in energies]), "energy")
    z3 = []
    for s, n in zip(traj, norms):
        split = pg.zone_split(grid, s.time, 0.0, cfg.zones.N)
        z3.append((pg.zone_norms(s, split)[2] / n.l2_of_v) ** 2 if n.l2_of_v > 0 else 0.0)
    z3s = an.NormSeries(times, np.array(z3), "z3_fraction")
    series = [l2, pair, en, z3s]

    e0 = abs(energies[0].total)
    # the identity needs resolved quadrature: its own fine sampling
    fine = pg.trajectory(v0, an.identity_times(min(cfg.time.t_max, 100.0), 1001), p, ctx.method,
                         ctx.tol)
    ident = an.energy_identity_residual(fine, p.mu)
    # round-off follows the largest energy on the path, not E(0), when E grows
    e_ref = max(abs(an.energy(s, p.mu).total) for s in fine)
    ctx.check("energy_identity", ident.residual <= 1e-6 * e_ref, ident.residual / e_ref, 1e-6,
              relative_to_initial=ident.relative, inconclusive=ident.inconclusive,
              error_estimate=ident.error_estimate)
    nd = an.verify_nondecay(traj, p.mu)
    ctx.check("nondecay", nd.passed, nd.min_margin / nd.initial_energy if nd.applicable else math.nan,
              -1e-8, applicable=nd.applicable, reason=nd.reason)
    if p.mu < 0:
        lo = an.verify_little_o(pair, 0.5 - p.re_nu)
        ctx.check("little_o_energy", lo.passed, lo.ratio, 0.5, decade_means=lo.decade_means)
    lo2 = an.verify_little_o(l2, -0.5 - p.re_nu, 1.0 if p.delta else 0.0)
    ctx.check("little_o_l2", lo2.passed, lo2.ratio, 0.5, decade_means=lo2.decade_means)
    if p.mu == 0.0:
        drift = float(np.max(np.abs(en.values - en.values[0]))) / e0
        ctx.check("energy_conservation", drift <= 1e-8, drift, 1e-8)

    if cfg.run.include_dw:
        us = [pg.liouville_inverse(s, c) for s in traj]
        u_l2 = an.NormSeries(times, np.array([an.state_norms(u).l2_of_v for u in us]), "dw_l2")
        u_pair = an.NormSeries(times, np.array([an.state_norms(u).pair_norm for u in us]), "dw_pair")
        series += [u_l2, u_pair]
        lo3 = an.verify_little_o(u_l2, -0.5 - p.re_nu + 0.5 * c.mu1, 1.0 if p.delta else 0.0)
        ctx.check("dw_little_o_l2", lo3.passed, lo3.ratio, 0.5)
        if p.mu < 0:
            lo4 = an.verify_little_o(u_pair, 0.5 - p.re_nu + 0.5 * c.mu1)
            ctx.check("dw_little_o_energy", lo4.passed, lo4.ratio, 0.5)
        worst = _liouville_deviation(ctx, u0, [t for t in (1.0, 10.0, 100.0) if t <= cfg.time.t_max])
        ctx.check("liouville_equivalence", worst <= cfg.tolerance.check_rel, worst, cfg.tolerance.check_rel)

    an.write_series(ctx.out / "run_series.csv", series)
    summary = _base_summary(ctx, "run", t0)
    summary["low_frequency_share_final"] = z3[-1]
    ctx.write_json("run_summary.json", summary)
    return summary


def _liouville_deviation(ctx: Context, u0, times) -> float:
    if not times:
        return 0.0
    direct = pg.trajectory_dw(u0, times, ctx.c, ctx.tol)
    via = pg.trajectory(pg.liouville_forward(u0, ctx.c), times, ctx.p, ctx.method, ctx.tol)
    worst = 0.0
    for a, b in zip(direct, via):
        b = pg.liouville_inverse(b, ctx.c)
        worst = max(worst, an.pair_norm(a - b) / an.pair_norm(a))
    return worst


# -------------------------------------------------------------- scatter
def _scatter_core(ctx: Context, grid, series_times):
    cfg = ctx.cfg
    v0 = ctx.initial_v(grid)
    sched = pg.default_schedule(cfg.scatter.T_max, cfg.scatter.start)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = pg.extract_scattering_state(v0, ctx.p, sched, ctx.dc, ctx.method, ctx.tol)
    rem = pg.remainder_series(v0, res, series_times, ctx.method, ctx.tol)
    return v0, res, rem


def scatter(ctx: Context) -> dict:
    """Scattering profile, Cauchy diagnostics and remainder series."""
    t0 = time.perf_counter()
    cfg = ctx.cfg
    pr = predict_remainder_rate(ctx.p, ctx.dc, ctx.c.d)
    if not pr.applicable:
        ctx.check("scattering_applicable", False, math.nan, applicable=True,
                  reason="remainder rate inapplicable for this data class")
        summary = _base_summary(ctx, "scatter", t0)
        ctx.write_json("scatter_summary.json", summary)
        return summary
    grid = ctx.grid()
    t_hi = max(10.0, cfg.scatter.T_max / 100.0)
    times = _log_times(t_hi, 61, 1.0)
    v0, res, rem = _scatter_core(ctx, grid, times)
    init_norm = an.pair_norm(v0)
    prof_norm = an.pair_norm(res.profile)
    ctx.check("cauchy", res.cauchy_ok, float(res.cauchy[-1]) / init_norm, None)
    if ctx.p.mu == 0.0:
        floor = pg.phase_roundoff(v0, res.T_used) + 1e-12 * init_norm
        ctx.check("remainder_vanishes", float(rem.values.max()) <= floor,
                  float(rem.values.max()) / init_norm, floor / init_norm)
    # R(t) <= |mu| C ∫_t^∞ (1+s)^{a-2}{..}^q ds + extraction tail, for the fit window
    a, q = res.growth
    bound = np.array([abs(ctx.p.mu) * res.c_fit * pg.tail_integral(t, a, q) for t in rem.times])
    sel = rem.times >= cfg.rates.fit_lo
    if sel.any():
        excess = float(np.max(rem.values[sel] / (1.05 * bound[sel] + res.tail_bound + pg.phase_roundoff(v0, res.T_used)
                                     + 1e-12 * init_norm)))
        ctx.check("scattering_consistency", excess <= 1.0, excess, 1.0)

    from .spectral import write_trajectory
    write_trajectory(ctx.out / "scatter_profile.csv", [res.profile])
    with open(ctx.out / "scatter_cauchy.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["T", "rho", "value"])
        for T, row in zip(res.schedule[1:], res.per_mode_cauchy):
            for r, v in zip(grid.nodes, row):
                wr.writerow([f"{T:.17g}", f"{r:.17g}", f"{v:.17g}"])
    an.write_series(ctx.out / "scatter_series.csv", [
        rem, an.NormSeries(res.schedule[1:], res.cauchy, "cauchy"),
        an.NormSeries(rem.times, bound, "remainder_bound"), res.l2_history,
    ])
    summary = _base_summary(ctx, "scatter", t0)
    summary.update({"T_used": res.T_used, "tail_bound": res.tail_bound, "tail_label": res.label,
                    "c_fit": res.c_fit, "profile_norm": prof_norm, "initial_norm": init_norm,
                    "profile_ratio": prof_norm / init_norm})
    ctx.write_json("scatter_summary.json", summary)
    return summary


# ---------------------------------------------------------------- rates
def _fit_doc(fit: an.FitResult, pred, band: float, upper_only: bool = False) -> dict:
    doc = asdict(fit)
    doc["predicted_exponent"] = pred.exponent
    doc["deviation"] = fit.exponent - pred.exponent
    doc["band"] = band
    doc["mode"] = "upper-bound" if upper_only else "two-sided"
    ok = (fit.exponent <= pred.exponent + band) if upper_only else abs(fit.exponent - pred.exponent) <= band
    doc["passed"] = bool(ok)
    return doc


def rates(ctx: Context) -> dict:
    """Fit the remainder and L² series against their predictions."""
    t0 = time.perf_counter()
    cfg = ctx.cfg
    cfg.check_fit_ready()
    band = cfg.rates.band
    grid = ctx.grid()
    times = np.geomspace(cfg.rates.fit_lo, cfg.rates.fit_hi, cfg.rates.n_samples)
    window = (cfg.rates.fit_lo, cfg.rates.fit_hi)
    p, d, dc = ctx.p, ctx.c.d, ctx.dc
    fits = {}
    series = []
    v0 = ctx.initial_v(grid)
    pr = predict_remainder_rate(p, dc, d)
    if pr.applicable:
        _, res, rem = _scatter_core(ctx, grid, times)
        series.append(rem)
        if p.mu == 0.0:
            ctx.notes.append("remainder series skipped (zero up to round-off when mu = 0)")
            ctx.check("remainder_fit", None, math.nan, applicable=False, reason="all-zero remainder")
        else:
            f = an.fit_decay_exponent(rem, pr.log_power, window)
            fits["remainder"] = _fit_doc(f, pr, band)
            ctx.check("remainder_fit", fits["remainder"]["passed"], f.exponent, pr.exponent,
                      band=band, log_power=pr.log_power)
            if p.delta:
                f1 = an.fit_decay_exponent(rem, 1.0, window)
                f0 = an.fit_decay_exponent(rem, 0.0, window)
                ratio = f1.rms_residual / f0.rms_residual
                fits["remainder_log1"] = asdict(f1)
                fits["remainder_log0"] = asdict(f0)
                ctx.check("log_correction", ratio <= 0.5, ratio, 0.5)
    else:
        ctx.check("remainder_fit", None, math.nan, applicable=False, reason="prediction inapplicable")
    pb = predict_solution_bound(p, dc, d)
    traj = pg.trajectory(v0, times, p, ctx.method, ctx.tol)
    l2 = an.NormSeries(times, np.array([an.state_norms(s).l2_of_v for s in traj]), "l2")
    series.append(l2)
    f = an.fit_decay_exponent(l2, pb.log_power, window)
    fits["l2_growth"] = _fit_doc(f, pb, band, upper_only=True)
    ctx.check("l2_growth_fit", fits["l2_growth"]["passed"], f.exponent, pb.exponent, band=band,
              mode="upper-bound")
    if cfg.run.informational:
        for k in list(ctx.checks):
            ctx.checks[k]["applicable"] = False
        ctx.notes.append("informational preset: fits reported, not enforced")
    for name, doc in fits.items():
        an.write_fit(ctx.out / f"rates_fit_{name}.json", an.FitResult(
            doc["exponent"], doc["log_power_used"], doc["intercept"], doc["rms_residual"],
            doc["t_lo"], doc["t_hi"]))
    an.write_series(ctx.out / "rates_series.csv", series)
    summary = _base_summary(ctx, "rates", t0)
    summary["fits"] = fits
    ctx.write_json("rates_summary.json", summary)
    return summary


# --------------------------------------------------------------- verify
def verify(ctx: Context) -> dict:
    """Property suite on a reduced grid."""
    t0 = time.perf_counter()
    cfg = ctx.cfg
    grid = ctx.grid(reduced=True)
    p, c = ctx.p, ctx.c
    rel = cfg.tolerance.check_rel
    rho = grid.nodes
    tt = [1.0, 10.0, 100.0]

    mats = pg.propagators(grid, 0.0, tt, p, "ode", ctx.tol)
    det_kg = float(np.max(np.abs(mk.det2(mats) - 1.0) / _det_scale(mats)))
    ctx.check("kg_determinant", det_kg <= 1e-9, det_kg, 1e-9)
    fd = mk.ode_fundamental(0.0, tt, rho, c.mu1, c.mu2, ctx.tol)
    law = (1.0 / (1.0 + np.asarray(tt)))[None, :] ** c.mu1
    det_dw = float(np.max(np.abs(mk.det2(fd) - law) / np.maximum(law, _det_scale(fd))))
    ctx.check("dw_determinant", det_dw <= rel, det_dw, rel)
    w = mk.free_wave_matrix(7.5, rho) @ mk.free_wave_matrix(-7.5, rho)
    grp = float(np.max(np.abs(w - np.eye(2))))
    ctx.check("free_group", grp <= 1e-12, grp, 1e-12)
    if p.real_order:
        ok = (rho >= mk.Z_CUTOFF)
        z = np.concatenate([rho[ok], rho[ok] * 101.0])
        b = mk.bessel_jy(p.re_nu, z)
        wr = float(np.max(np.abs(b.wronskian() * np.pi * z / 2.0 - 1.0)))
        ctx.check("wronskian", wr <= 1e-10, wr, 1e-10)
        mb = mk.multiplier_matrix(np.asarray(tt)[:, None], 0.0, rho[ok][None, :], p)
        dev = float(np.max(mk.scaled_deviation(mats[:, ok], mb, rho[ok][None, :])))
        ctx.check("bessel_ode", dev <= rel, dev, rel)
        ident = mk.multiplier_matrix(0.0, 0.0, rho[ok], p)
        e = float(np.max(np.abs(ident - np.eye(2))))
        ctx.check("multiplier_identity", e <= 1e-12, e, 1e-12)
    u0 = ctx.initial_u(grid)
    v0 = pg.liouville_forward(u0, c)
    lv = _liouville_deviation(ctx, u0, tt)
    ctx.check("liouville_equivalence", lv <= rel, lv, rel)
    dtraj = pg.trajectory(v0, np.linspace(0.0, 10.0, 401), p, ctx.method, ctx.tol)
    du = pg.duhamel_residual(dtraj, p)
    ctx.check("duhamel", du.relative <= 1e-6, du.relative, 1e-6, inconclusive=du.inconclusive)
    etraj = pg.trajectory(v0, an.identity_times(100.0, 1001), p, ctx.method, ctx.tol)
    ei = an.energy_identity_residual(etraj, p.mu)
    e_ref = max(abs(an.energy(s, p.mu).total) for s in etraj)
    ctx.check("energy_identity", ei.residual <= 1e-6 * e_ref, ei.residual / e_ref, 1e-6,
              relative_to_initial=ei.relative, inconclusive=ei.inconclusive)
    longt = pg.trajectory(v0, _log_times(max(1e3, cfg.time.t_max), 201), p, ctx.method, ctx.tol)
    nd = an.verify_nondecay(longt, p.mu)
    ctx.check("nondecay", nd.passed, nd.min_margin / nd.initial_energy if nd.applicable else math.nan,
              -1e-8, applicable=nd.applicable, reason=nd.reason)
    l2 = an.NormSeries([s.time for s in longt], [an.state_norms(s).l2_of_v for s in longt], "l2")
    lo = an.verify_little_o(l2, -0.5 - p.re_nu, 1.0 if p.delta else 0.0)
    ctx.check("little_o_l2", lo.passed, lo.ratio, 0.5)
    if p.mu < 0:
        pair = an.NormSeries(l2.times, [an.state_norms(s).pair_norm for s in longt], "pair")
        lo = an.verify_little_o(pair, 0.5 - p.re_nu)
        ctx.check("little_o_energy", lo.passed, lo.ratio, 0.5)
    summary = _base_summary(ctx, "verify", t0)
    summary["grid_nodes"] = grid.size
    ctx.write_json("verify_summary.json", summary)
    return summary


def _det_scale(m: np.ndarray) -> np.ndarray:
    """Round-off scale ``max(1, |ad| + |bc|)`` of a 2x2 determinant."""
    s = np.abs(m[..., 0, 0] * m[..., 1, 1]) + np.abs(m[..., 0, 1] * m[..., 1, 0])
    return np.maximum(1.0, s)


# ---------------------------------------------------------------- sweep
SWEEP_COLUMNS = ["mu1", "mu2", "d", "class", "r_or_s", "mu", "re_nu", "im_nu", "delta", "alpha",
                 "gamma", "alpha_margin", "s_threshold", "applicable", "predicted_exponent",
                 "predicted_log_power", "dw_exponent", "fitted_exponent", "fit_status"]


def sweep(ctx: Context) -> dict:
    """Cartesian sweep of (mu1, mu2, r | s)."""
    t0 = time.perf_counter()
    cfg = ctx.cfg
    sw = cfg.sweep
    if sw.fit:
        cfg.check_fit_ready()
    d = cfg.coefficients.d
    classes = [LebesgueClass(r) for r in sw.r] + [NegSobolevClass(s) for s in sw.s]
    rows = []
    failures = 0
    for mu1, mu2, dc in itertools.product(sw.mu1, sw.mu2, classes):
        p = derive_params(Coefficients(mu1, mu2, d))
        pr = predict_remainder_rate(p, dc, d)
        pd = predict_dw_rate(p, dc, d)
        leb = isinstance(dc, LebesgueClass)
        alpha = alpha_of(p, dc.r, d) if leb else math.nan
        gamma = math.nan if leb else gamma_of(p, dc.s)
        row = {
            "mu1": mu1, "mu2": mu2, "d": d, "class": "lebesgue" if leb else "neg_sobolev",
            "r_or_s": dc.r if leb else dc.s, "mu": p.mu, "re_nu": p.re_nu, "im_nu": p.im_nu,
            "delta": p.delta, "alpha": alpha, "gamma": gamma,
            "alpha_margin": 1.0 - alpha if leb else math.nan,
            "s_threshold": max(-0.5 + p.re_nu, 0.0),
            "applicable": pr.applicable,
            "predicted_exponent": pr.exponent, "predicted_log_power": pr.log_power,
            "dw_exponent": pd.exponent, "fitted_exponent": math.nan, "fit_status": "not requested",
        }
        if sw.fit:
            row["fitted_exponent"], row["fit_status"] = _sweep_fit(ctx, mu1, mu2, dc, pr)
            failures += row["fit_status"].startswith("error")
        rows.append(row)
    with open(ctx.out / "sweep.csv", "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for row in rows:
            wr.writerow([_cell(row[k]) for k in SWEEP_COLUMNS])
    summary = _base_summary(ctx, "sweep", t0)
    summary.update({"cells": len(rows), "fit_errors": failures})
    ctx.write_json("sweep_summary.json", summary)
    summary["rows"] = rows
    return summary


def _cell(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _sweep_fit(ctx: Context, mu1, mu2, dc, pr) -> tuple[float, str]:
    if not pr.applicable:
        return math.nan, "skipped: inapplicable"
    base = ctx.cfg
    doc = base.to_dict()
    doc["coefficients"].update({"mu1": mu1, "mu2": mu2})
    doc["data"]["class"] = "lebesgue" if isinstance(dc, LebesgueClass) else "neg_sobolev"
    if isinstance(dc, LebesgueClass):
        doc["data"]["r"] = dc.r
    else:
        doc["data"]["s"] = dc.s
    try:
        cfg = ExperimentConfig.from_dict(doc)
        sub = Context(cfg, ctx.out, ctx.tol_scale, ctx.seed)
        if not sub.p.real_order:
            return math.nan, "skipped: needs long ODE runs (mu > 1/4)"
        mem = membership_report(sub.data, sub.dc, sub.c.d, sub.c.mu1)
        if mem.member is False:
            return math.nan, "skipped: data not in class"
        grid = sub.grid()
        times = np.geomspace(cfg.rates.fit_lo, cfg.rates.fit_hi, cfg.rates.n_samples)
        if sub.p.mu == 0.0:
            return math.nan, "skipped: zero remainder"
        _, _, rem = _scatter_core(sub, grid, times)
        f = an.fit_decay_exponent(rem, pr.log_power, (cfg.rates.fit_lo, cfg.rates.fit_hi))
        return f.exponent, "ok"
    except Exception as exc:  # recorded per cell, sweep continues
        return math.nan, f"error: {type(exc).__name__}: {exc}"


# ----------------------------------------------------------------- main
PLOT_SCRIPT = '''"""Plot the CSV artifacts in this directory (generated stub)."""
import csv
from collections import defaultdict
from pathlib import Path

import matplotlib.pyplot as plt

here = Path(__file__).parent
for path in sorted(here.glob("*_series.csv")):
    groups = defaultdict(lambda: ([], []))
    with open(path) as fh:
        for row in csv.DictReader(fh):
            t, v = groups[row["label"]]
            t.append(1.0 + float(row["t"]))
            v.append(abs(float(row["value"])))
    fig, ax = plt.subplots()
    for label, (t, v) in groups.items():
        ax.loglog(t, v, label=label)
    ax.set_xlabel("1 + t")
    ax.legend()
    fig.savefig(path.with_suffix(".png"), dpi=120)
'''

COMMANDS: dict[str, Callable[[Context], dict]] = {
    "run": run, "scatter": scatter, "rates": rates, "verify": verify, "sweep": sweep,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scalewave", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", type=Path, help="TOML configuration file")
    ap.add_argument("--preset", help=f"built-in configuration ({', '.join(PRESETS)})")
    ap.add_argument("--out", type=Path, help="output directory (overrides output.dir)")
    ap.add_argument("--threads", type=int, help="worker threads for mode evaluation")
    ap.add_argument("--seed", type=int, help="accepted for reproducibility records; unused")
    ap.add_argument("--tolerance-scale", type=float, default=1.0, help="multiply solver tolerances")
    ap.add_argument("--emit-plot-script", action="store_true", help="write a plotting stub")
    ap.add_argument("--quiet", action="store_true", help="only print the final status line")
    return ap


def resolve_config(args) -> ExperimentConfig:
    cfg = preset(args.preset) if args.preset else ExperimentConfig()
    if args.config:
        cfg = load_config(args.config, base=cfg)
    if args.out:
        cfg.output.dir = str(args.out)
    if not (args.tolerance_scale > 0 and math.isfinite(args.tolerance_scale)):
        raise ConfigError("--tolerance-scale: must be positive")
    if args.threads is not None:
        import numba
        if not 1 <= args.threads <= numba.config.NUMBA_NUM_THREADS:
            raise ConfigError(f"--threads: must lie in [1, {numba.config.NUMBA_NUM_THREADS}]")
        numba.set_num_threads(args.threads)
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        out = Path(cfg.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        ctx = Context(cfg, out, args.tolerance_scale, args.seed)
        dump_config(cfg, out / f"{args.command}_config.toml")
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = COMMANDS[args.command](ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except mk.StepLimitError as exc:
        print(f"numerical failure [mode_kernel]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, ValueError, np.linalg.LinAlgError) as exc:
        where = traceback.extract_tb(exc.__traceback__)[-1]
        print(f"numerical failure [{Path(where.filename).stem}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.emit_plot_script:
        (out / "plot_results.py").write_text(PLOT_SCRIPT)
    failed = summary["failed"]
    if not args.quiet:
        for name, rec in summary["checks"].items():
            state = "n/a" if not rec["applicable"] or rec["passed"] is None else (
                "PASS" if rec["passed"] else "FAIL")
            print(f"{state:5s} {name:24s} value={rec['value']} threshold={rec['threshold']}")
    status = "ok" if not failed else "failed: " + ", ".join(failed)
    print(f"{args.command} [{cfg.run.name}] {status} ({summary['wall_time']:.1f} s) -> {out}")
    return EXIT_FAIL if failed else EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
