"""Acceptance criteria, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line with the measured quantity; the
terminal summary (see ``conftest.py``) lists all criteria again.
"""

import math
import time

import numpy as np
import pytest

from scalewave import analysis as an
from scalewave import mode_kernel as mk
from scalewave import propagator as pg
from scalewave.cli import main
from scalewave.config import preset
from scalewave.initial_data import (FrequencyPowerBump, GaussianPhysical, Hdot1, HdotNeg, L2, Lr,
                                    analytic_norms, sample_spectrum)
from scalewave.params import (Coefficients, LebesgueClass, derive_params, predict_remainder_rate)
from scalewave.spectral import RadialGrid

RATE_TIMES = np.geomspace(1e2, 1e4, 41)
WINDOW = (1e2, 1e4)


def report(num, ok, detail):
    print(f"{'PASS' if ok else 'FAIL'}  criterion {num}: {detail}")
    return ok


def log_times(t_max, n):
    return np.expm1(np.linspace(0.0, math.log1p(t_max), n))


class Setup:
    """Preset objects: grid, parameters, class, KG initial state."""

    def __init__(self, name):
        self.cfg = preset(name)
        self.c = self.cfg.coefficients_obj()
        self.p = derive_params(self.c)
        self.dc = self.cfg.data_class_obj()
        self.grid = self.cfg.grid_obj()
        self.u0 = sample_spectrum(self.cfg.initial_data_obj(), self.grid)
        self.v0 = pg.liouville_forward(self.u0, self.c)
        self.sched = pg.default_schedule(self.cfg.scatter.T_max, self.cfg.scatter.start)

    def remainder(self, times=RATE_TIMES):
        res = pg.extract_scattering_state(self.v0, self.p, self.sched, self.dc)
        assert res.cauchy_ok
        return res, pg.remainder_series(self.v0, res, times)


def mu_for_nu(nu):
    """mu2 (with mu1 = 0) giving real order nu."""
    return 0.25 - nu * nu


@pytest.mark.criterion(1, "multiplier identity at t = t0")
def test_c01_multiplier_identity():
    t_start = time.perf_counter()
    rho = np.geomspace(1e-3, 1e2, 301)
    worst = 0.0
    for nu in (0.0, 0.25, 0.5, 1.5):
        p = derive_params(Coefficients(0.0, mu_for_nu(nu), 3))
        assert p.re_nu == pytest.approx(nu, abs=1e-15)
        for t0 in (0.0, 0.5, 7.0, 90.0):
            m = mk.multiplier_matrix(t0, t0, rho, p)
            worst = max(worst, float(np.max(np.abs(m - np.eye(2)))))
    elapsed = time.perf_counter() - t_start
    assert report(1, worst <= 1e-12 and elapsed < 1.0,
                  f"max entrywise |M(t0,t0) - I| = {worst:.2e} (<= 1e-12), {elapsed:.2f} s")


@pytest.mark.criterion(2, "Bessel and ODE fundamental matrices agree")
def test_c02_bessel_ode():
    t_start = time.perf_counter()
    rho = np.geomspace(1e-3, 1e2, 41)
    times = np.linspace(0.0, 100.0, 21)
    worst = {}
    for mu in (-2.0, 0.0, 0.1875, 0.25):
        p = derive_params(Coefficients(0.0, mu, 3))
        ode = np.swapaxes(mk.ode_fundamental(0.0, times, rho, 0.0, mu), 0, 1)
        bes = mk.multiplier_matrix(times[:, None], 0.0, rho[None, :], p)
        worst[mu] = float(np.max(mk.scaled_deviation(ode, bes, rho[None, :])))
    elapsed = time.perf_counter() - t_start
    w = max(worst.values())
    assert report(2, w <= 1e-8 and elapsed < 30.0,
                  f"max scaled deviation {w:.2e} over mu in {sorted(worst)} (<= 1e-8), {elapsed:.1f} s")


@pytest.mark.criterion(3, "mu = 0 evolution equals the free wave group")
def test_c03_free_reduction():
    t_start = time.perf_counter()
    s = Setup("free")
    grid = RadialGrid.build(3)
    v0 = sample_spectrum(GaussianPhysical(), grid)
    worst = 0.0
    for method in ("auto", "ode"):
        for t in (1.0, 10.0, 100.0):
            a = pg.evolve(v0, t, s.p, method)
            b = pg.free_evolve(v0, t)
            worst = max(worst, an.pair_norm(a - b) / an.pair_norm(b))
    elapsed = time.perf_counter() - t_start
    assert report(3, worst <= 1e-10 and elapsed < 5.0,
                  f"max relative Ḣ¹×L² distance {worst:.2e} (<= 1e-10), {elapsed:.1f} s")


@pytest.mark.criterion(4, "determinant laws for KG and DW modes")
def test_c04_determinants():
    t_start = time.perf_counter()
    rho = np.geomspace(1e-3, 1e2, 41)
    times = np.array([1.0, 10.0, 50.0, 100.0])
    kg = 0.0
    for mu in (-2.0, 0.0, 0.1875, 0.25, 1.0, 3.0):
        for t0 in (0.0, 5.0):
            m = mk.ode_fundamental(t0, times + t0, rho, 0.0, mu)
            kg = max(kg, float(np.max(np.abs(mk.det2(m) - 1.0))))
    dw = 0.0
    for mu1 in (-1.0, 2.0, 4.0):
        for t0 in (0.0, 5.0):
            m = mk.ode_fundamental(t0, times + t0, rho, mu1, 0.0)
            law = ((1.0 + t0) / (1.0 + t0 + times)) ** mu1
            dw = max(dw, float(np.max(np.abs(mk.det2(m) / law[None, :] - 1.0))))
    elapsed = time.perf_counter() - t_start
    assert report(4, kg <= 1e-9 and dw <= 1e-8 and elapsed < 10.0,
                  f"KG |det-1| {kg:.2e} (<= 1e-9), DW relative {dw:.2e} (<= 1e-8), {elapsed:.1f} s")


@pytest.mark.criterion(5, "Liouville equivalence on the dabbicco-wave preset")
def test_c05_liouville():
    t_start = time.perf_counter()
    s = Setup("dabbicco-wave")
    times = [1.0, 10.0, 100.0]
    direct = pg.trajectory_dw(s.u0, times, s.c)
    via = pg.trajectory(s.v0, times, s.p)
    worst = max(an.pair_norm(a - pg.liouville_inverse(b, s.c)) / an.pair_norm(a)
                for a, b in zip(direct, via))
    elapsed = time.perf_counter() - t_start
    assert report(5, worst <= 1e-8 and elapsed < 30.0,
                  f"max relative distance {worst:.2e} (<= 1e-8), {elapsed:.1f} s")


def _rate_case(num, name, target):
    t_start = time.perf_counter()
    s = Setup(name)
    pr = predict_remainder_rate(s.p, s.dc, s.c.d)
    assert pr.applicable and pr.exponent == pytest.approx(target)
    _, rem = s.remainder()
    fit = an.fit_decay_exponent(rem, pr.log_power, WINDOW)
    elapsed = time.perf_counter() - t_start
    ok = abs(fit.exponent - target) <= 0.05 and elapsed < 300.0
    return report(num, ok, f"{name}: fitted {fit.exponent:.4f} vs {target} ± 0.05 "
                           f"(log power {pr.log_power}), {elapsed:.1f} s")


@pytest.mark.criterion(6, "remainder rate, dabbicco-wave preset")
def test_c06_rate_dabbicco():
    s = Setup("dabbicco-wave")
    assert s.grid.size == 512 and s.p.delta == 0
    assert _rate_case(6, "dabbicco-wave", -0.5)


@pytest.mark.criterion(7, "remainder rate, neg-sobolev preset")
def test_c07_rate_neg_sobolev():
    s = Setup("neg-sobolev")
    from scalewave.params import gamma_of
    assert gamma_of(s.p, s.dc.s) == pytest.approx(0.5)
    assert _rate_case(7, "neg-sobolev", -0.5)


@pytest.mark.criterion(8, "log correction detected at mu = 1/4")
def test_c08_log_case():
    t_start = time.perf_counter()
    s = Setup("log-case")
    assert s.p.delta == 1
    _, rem = s.remainder()
    f1 = an.fit_decay_exponent(rem, 1.0, WINDOW)
    f0 = an.fit_decay_exponent(rem, 0.0, WINDOW)
    ratio = f1.rms_residual / f0.rms_residual
    elapsed = time.perf_counter() - t_start
    assert report(8, ratio <= 0.5 and elapsed < 300.0,
                  f"rms(log power 1)/rms(log power 0) = {ratio:.3f} (<= 0.5), {elapsed:.1f} s")


@pytest.mark.criterion(9, "energy identity and its convergence order")
def test_c09_energy_identity():
    t_start = time.perf_counter()
    lines, ok = [], True
    for name in ("neg-mu", "mild-mass"):
        s = Setup(name)
        fine = pg.trajectory(s.v0, an.identity_times(100.0, 1001), s.p)
        coarse = pg.trajectory(s.v0, an.identity_times(100.0, 501), s.p)
        e0 = an.energy(fine[0], s.p.mu).total
        r1 = an.energy_identity_residual(fine, s.p.mu).residual
        r2 = an.energy_identity_residual(coarse, s.p.mu).residual
        ok &= r1 <= 1e-6 * e0 and r2 >= 8.0 * r1
        lines.append(f"mu={s.p.mu}: residual/E(0) {r1 / e0:.2e}, halving gain {r2 / r1:.1f}")
    elapsed = time.perf_counter() - t_start
    assert report(9, ok and elapsed < 60.0, "; ".join(lines) + f", {elapsed:.1f} s")


@pytest.mark.criterion(10, "non-decay for mu < 0 and non-vanishing profile")
def test_c10_nondecay():
    t_start = time.perf_counter()
    s = Setup("neg-mu")
    traj = pg.trajectory(s.v0, log_times(1e3, 401), s.p)
    nd = an.verify_nondecay(traj, s.p.mu, tol=1e-8)
    res, _ = s.remainder(RATE_TIMES[:1])
    ratio = an.pair_norm(res.profile) / an.pair_norm(s.v0)
    elapsed = time.perf_counter() - t_start
    assert report(10, nd.applicable and nd.passed and ratio >= 0.5 and elapsed < 120.0,
                  f"E(0) = {nd.initial_energy:.4g}, min margin {nd.min_margin:.3e}, "
                  f"|profile|/|initial| = {ratio:.3f} (>= 0.5), {elapsed:.1f} s")


@pytest.mark.criterion(11, "weighted energy norm little-o for mu < 0")
def test_c11_little_o():
    t_start = time.perf_counter()
    s = Setup("neg-mu")
    times = log_times(1e4, 301)
    traj = pg.trajectory(s.v0, times, s.p)
    series = an.NormSeries(times, [an.pair_norm(x) for x in traj], "pair")
    lo = an.verify_little_o(series, 0.5 - s.p.re_nu)
    elapsed = time.perf_counter() - t_start
    assert report(11, lo.passed and elapsed < 300.0,
                  f"weight exponent {0.5 - s.p.re_nu}, decade ratio {lo.ratio:.3e} (<= 0.5), "
                  f"monotone {lo.monotone}, {elapsed:.1f} s")


@pytest.mark.criterion(12, "Duhamel identity and fourth-order shrinkage")
def test_c12_duhamel():
    t_start = time.perf_counter()
    s = Setup("mild-mass")
    fine = pg.duhamel_residual(pg.trajectory(s.v0, np.linspace(0, 10, 401), s.p), s.p)
    coarse = pg.duhamel_residual(pg.trajectory(s.v0, np.linspace(0, 10, 201), s.p), s.p)
    gain = coarse.residual / fine.residual
    elapsed = time.perf_counter() - t_start
    assert report(12, fine.relative <= 1e-6 and gain >= 12.0 and elapsed < 60.0,
                  f"relative residual {fine.relative:.2e} (<= 1e-6), halving gain {gain:.1f} "
                  f"(order 4 gives 16), {elapsed:.1f} s")


@pytest.mark.criterion(13, "applicability boundary of the Lebesgue rate")
def test_c13_boundary(tmp_path):
    t_start = time.perf_counter()
    eps = 1e-9
    d = 3
    mu1 = sorted(set(np.round(np.arange(-6.0, 8.01, 0.25), 10).tolist())
                 | {-d - eps, -d + eps, d + 2 - eps, d + 2 + eps})
    cfg = tmp_path / "sweep.toml"
    cfg.write_text("[coefficients]\nd = 3\n[sweep]\nmu1 = [" + ", ".join(repr(x) for x in mu1)
                   + "]\nmu2 = [0.0]\nr = [1.0]\n")
    assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path), "--quiet"]) == 0
    import csv
    with open(tmp_path / "sweep.csv") as fh:
        rows = list(csv.DictReader(fh))
    flags = [(float(r["mu1"]), r["applicable"] == "true") for r in rows]
    flips = [b[0] for a, b in zip(flags, flags[1:]) if a[1] != b[1]]
    inside = all(app == (-d < m < d + 2) for m, app in flags)
    # the same law from the library for d = 1, 2 as a cross-check
    for dd in (1, 2):
        for m in (-dd - eps, -dd + eps, dd + 2 - eps, dd + 2 + eps, -dd, dd + 2):
            app = predict_remainder_rate(derive_params(Coefficients(m, 0.0, dd)), LebesgueClass(1.0),
                                         dd).applicable
            inside &= app == (-dd < m < dd + 2)
    elapsed = time.perf_counter() - t_start
    assert report(13, inside and flips == [-d + eps, d + 2] and elapsed < 1.0 + 4.0,
                  f"flag flips at mu1 = {flips} (expect -3 and 5), {elapsed:.2f} s")


@pytest.mark.criterion(14, "analytic norms match grid quadrature")
def test_c14_calibration():
    from scipy import integrate
    from scalewave.spectral import sphere_area
    t_start = time.perf_counter()
    worst, count = 0.0, 0
    for d in (1, 2, 3):
        grid = RadialGrid.build(d)
        fams = [GaussianPhysical(1.0, w) for w in (0.5, 1.0, 2.0)]
        fams += [FrequencyPowerBump(a, 0.0, 4.0, 0.5) for a in (-0.3 * d, 0.0, 1.5)]
        fams += [FrequencyPowerBump(0.7, 0.5, 3.0, 0.4)]
        spaces = [L2(), Hdot1(), HdotNeg(0.2 * d)]
        for f in fams:
            spec = f.spectrum(grid.nodes, d)
            for sp in spaces:
                k = {L2: 0.0, Hdot1: 1.0, HdotNeg: -getattr(sp, "s", 0.0)}[type(sp)]
                try:
                    exact = analytic_norms(f, sp, d, grid)
                except ValueError:
                    continue
                num = math.sqrt(grid.integrate(np.abs(spec) ** 2, power=2 * k))
                worst = max(worst, abs(num / exact - 1.0))
                count += 1
            if isinstance(f, GaussianPhysical):
                for r in (1.0, 1.5):
                    exact = analytic_norms(f, Lr(r), d)
                    val, _ = integrate.quad(lambda x: np.exp(-r * x * x / (2 * f.width**2)) * x ** (d - 1),
                                            0, np.inf, epsabs=0, epsrel=1e-13)
                    num = (sphere_area(d) * val) ** (1 / r) * f.amplitude
                    worst = max(worst, abs(num / exact - 1.0))
                    count += 1
    elapsed = time.perf_counter() - t_start
    assert report(14, worst <= 1e-6 and elapsed < 5.0,
                  f"{count} norms, max relative mismatch {worst:.2e} (<= 1e-6), {elapsed:.1f} s")
