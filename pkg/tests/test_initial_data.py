import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from scalewave.initial_data import (FrequencyPowerBump, GaussianPhysical, Hdot1, HdotNeg,
                                    InitialData, L2, Lr, analytic_norms, membership_report,
                                    sample_spectrum, truncated_mass)
from scalewave.params import EnergyClass, LebesgueClass, NegSobolevClass
from scalewave.spectral import RadialGrid, sphere_area

mp.mp.dps = 25


def _fourier_sq(fhat, k, d, lo=0, hi=mp.inf):
    """|S| ∫ ρ^{2k} |f̂|² ρ^{d-1} dρ by mpmath quadrature."""
    pts = [lo, 1, hi] if hi == mp.inf else [lo, hi]
    return float(sphere_area(d) * mp.quad(lambda r: r ** (2 * k + d - 1) * fhat(r) ** 2, pts))


class TestGaussian:
    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("space,k", [(L2(), 0), (Hdot1(), 1), (HdotNeg(0.25), -0.25)])
    def test_fourier_norms(self, d, space, k):
        g = GaussianPhysical(1.3, 0.7)
        fhat = lambda r: 1.3 * mp.mpf(0.7) ** d * mp.exp(-(0.7 * r) ** 2 / 2)  # noqa: E731
        ref = math.sqrt(_fourier_sq(fhat, k, d))
        assert analytic_norms(g, space, d) == pytest.approx(ref, rel=1e-12)

    @pytest.mark.parametrize("d", [1, 2, 3])
    @pytest.mark.parametrize("r", [1.0, 1.5])
    def test_lr_physical(self, d, r):
        g = GaussianPhysical(2.0, 0.8)
        f = lambda x: (2.0 * mp.exp(-x * x / (2 * 0.64))) ** r * x ** (d - 1)  # noqa: E731
        ref = float((sphere_area(d) * mp.quad(f, [0, mp.inf])) ** (1 / mp.mpf(r)))
        assert analytic_norms(g, Lr(r), d) == pytest.approx(ref, rel=1e-12)

    def test_plancherel(self):
        # unitary transform: L² norms agree in physical and frequency space
        g = GaussianPhysical(1.0, 1.7)
        assert analytic_norms(g, L2(), 3) == pytest.approx(analytic_norms(g, Lr(2.0), 3), rel=1e-13)

    def test_negative_order_limit(self):
        with pytest.raises(ValueError):
            analytic_norms(GaussianPhysical(), HdotNeg(1.5), 3)

    def test_truncated_mass(self):
        g = GaussianPhysical(1.0, 1.0)
        fhat = lambda r: mp.exp(-r * r / 2)  # noqa: E731
        for space, k in ((L2(), 0), (HdotNeg(0.5), -0.5)):
            ref = _fourier_sq(fhat, k, 3, 0, 1e-2)
            assert truncated_mass(g, space, 3, 1e-2) == pytest.approx(ref, rel=1e-10)
        assert truncated_mass(g, HdotNeg(1.5), 3, 1e-2) == math.inf

    def test_width_validation(self):
        with pytest.raises(ValueError):
            GaussianPhysical(1.0, 0.0)


class TestBump:
    def _fhat(self, b):
        def f(r):
            x = min(max((b.outer - r) / (b.smoothing * b.outer), 0), 1)
            cut = x**3 * (10 - 15 * x + 6 * x * x)
            if b.inner > 0:
                y = min(max((r - b.inner) / (b.smoothing * b.inner), 0), 1)
                cut *= y**3 * (10 - 15 * y + 6 * y * y)
            return b.amplitude * r**b.exponent * cut if cut > 0 else mp.mpf(0)
        return f

    @pytest.mark.parametrize("bump", [
        FrequencyPowerBump(0.0, 0.0, 1.0, 0.1),
        FrequencyPowerBump(-1.2, 0.0, 4.0, 0.75),
        FrequencyPowerBump(0.5, 0.2, 3.0, 0.3, 2.0),
    ])
    @pytest.mark.parametrize("space,k", [(L2(), 0), (Hdot1(), 1), (HdotNeg(0.2), -0.2)])
    def test_norms(self, bump, space, k):
        d = 3
        f = self._fhat(bump)
        pts = sorted({bump.inner, bump.flat[0], bump.flat[1], bump.outer} - {0.0})
        g = lambda r: r ** (2 * k + d - 1) * f(r) ** 2  # noqa: E731
        # r = u^10 removes the integrable endpoint singularity at 0
        head = mp.quad(lambda u: g(u**10) * 10 * u**9, [0, mp.mpf(pts[0]) ** 0.1])
        ref = math.sqrt(float(sphere_area(d) * (head + mp.quad(g, pts))))
        assert analytic_norms(bump, space, d) == pytest.approx(ref, rel=1e-12)

    def test_divergent(self):
        with pytest.raises(ValueError):
            analytic_norms(FrequencyPowerBump(-1.6), L2(), 3)

    def test_lr_unavailable(self):
        with pytest.raises(ValueError):
            analytic_norms(FrequencyPowerBump(0.0), Lr(1.0), 3)

    def test_truncated_mass(self):
        b = FrequencyPowerBump(-1.2, 0.0, 4.0, 0.75)
        assert truncated_mass(b, L2(), 3, 1e-3) == pytest.approx(
            sphere_area(3) * 1e-3 ** 0.6 / 0.6, rel=1e-13)
        assert truncated_mass(FrequencyPowerBump(0.0, 0.5, 2.0), L2(), 3, 0.3) == 0.0

    def test_spectrum_support(self):
        b = FrequencyPowerBump(0.5, 0.2, 3.0, 0.3)
        rho = np.array([0.1, 0.2, 1.0, 3.0, 5.0])
        s = b.spectrum(rho)
        assert s[0] == 0 and s[1] == 0 and s[3] == 0 and s[4] == 0
        assert s[2] == pytest.approx(1.0)

    def test_blend_warning(self):
        coarse = RadialGrid.build(3, 1e-4, 64.0, 16, 16)
        with pytest.warns(UserWarning, match="blend"):
            analytic_norms(FrequencyPowerBump(0.0, 0.0, 1.0, 0.05), L2(), 3, coarse)
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            analytic_norms(FrequencyPowerBump(0.0, 0.0, 1.0, 0.5), L2(), 3, RadialGrid.build(3))

    @pytest.mark.parametrize("kw", [dict(smoothing=0.0), dict(outer=0.0), dict(inner=0.9)])
    def test_validation(self, kw):
        with pytest.raises(ValueError):
            FrequencyPowerBump(0.0, **kw)


class TestSampling:
    def test_slots(self, small_grid3):
        g = GaussianPhysical()
        s = sample_spectrum(InitialData(g, "velocity"), small_grid3)
        assert np.all(s.value == 0) and np.any(s.velocity != 0)
        s = sample_spectrum(g, small_grid3)
        assert np.all(s.velocity == 0)
        s = sample_spectrum(InitialData(g, "both"), small_grid3)
        np.testing.assert_array_equal(s.value, s.velocity)

    def test_data_map_weights(self):
        assert InitialData(GaussianPhysical(), "position").weights(4.0) == (1.0, 2.0)
        assert InitialData(GaussianPhysical(), "velocity").weights(4.0) == (0.0, 1.0)
        with pytest.raises(ValueError):
            InitialData(GaussianPhysical(), "neither")

    def test_grid_norm_matches(self, grid3):
        g = GaussianPhysical(1.0, 0.5)
        s = sample_spectrum(g, grid3)
        val = math.sqrt(grid3.integrate(np.abs(s.value) ** 2))
        assert val == pytest.approx(analytic_norms(g, L2(), 3), rel=1e-10)


class TestMembership:
    def test_gaussian_lebesgue(self):
        g = GaussianPhysical(1.0, 1.0)
        rep = membership_report(g, LebesgueClass(1.0), 3)
        n = (math.hypot(analytic_norms(g, L2(), 3), analytic_norms(g, Hdot1(), 3))
             + analytic_norms(g, Lr(1.0), 3))
        assert rep.member and rep.class_norm == pytest.approx(n)

    def test_damped_map(self):
        g = GaussianPhysical()
        rep = membership_report(g, EnergyClass(), 3, mu1=4.0)
        n = math.hypot(analytic_norms(g, L2(), 3), analytic_norms(g, Hdot1(), 3)) \
            + 2.0 * analytic_norms(g, L2(), 3)
        assert rep.class_norm == pytest.approx(n)

    def test_not_member(self):
        rep = membership_report(GaussianPhysical(), NegSobolevClass(1.5), 3)
        assert rep.member is False and rep.class_norm is None

    def test_undecided(self):
        rep = membership_report(FrequencyPowerBump(0.0), LebesgueClass(1.0), 3)
        assert rep.member is None
