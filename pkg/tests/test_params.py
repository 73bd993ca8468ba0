import math

import mpmath as mp
import pytest
from hypothesis import given, settings, strategies as st

from scalewave.params import (QUARTER_TOL, Coefficients, EnergyClass, LebesgueClass,
                              NegSobolevClass, alpha_of, derive_params, gamma_of,
                              predict_dw_rate, predict_remainder_rate, predict_solution_bound)


def _p(mu1, mu2, d=3):
    return derive_params(Coefficients(mu1, mu2, d))


class TestDeriveParams:
    @pytest.mark.parametrize("mu1,mu2,mu,nu", [
        (0.0, 0.0, 0.0, 0.5),
        (4.0, 0.0, -2.0, 1.5),
        (2.0, 0.0, 0.0, 0.5),
        (0.0, 0.1875, 0.1875, 0.25),
        (0.0, -2.0, -2.0, 1.5),
        (1.0, 0.0, 0.25, 0.0),
    ])
    def test_real_order(self, mu1, mu2, mu, nu):
        p = _p(mu1, mu2)
        assert p.mu == pytest.approx(mu, abs=1e-15)
        assert p.re_nu == pytest.approx(nu, abs=1e-15)
        assert p.real_order

    def test_mpmath_oracle(self):
        for mu1, mu2 in [(0.3, 0.7), (-1.5, 0.2), (5.0, -1.0), (0.0, 3.0)]:
            mu = mp.mpf(mu1) * (2 - mp.mpf(mu1)) / 4 + mp.mpf(mu2)
            nu = mp.sqrt(1 - 4 * mu) / 2
            p = _p(mu1, mu2)
            assert p.mu == pytest.approx(float(mu), rel=1e-15)
            assert p.nu.real == pytest.approx(float(mp.re(nu)), abs=1e-15)
            assert p.nu.imag == pytest.approx(float(mp.im(nu)), abs=1e-15)

    def test_imaginary_order(self):
        p = _p(0.0, 1.0)
        assert p.re_nu == 0.0
        assert p.im_nu == pytest.approx(math.sqrt(3) / 2)
        assert not p.real_order
        assert p.delta == 0

    def test_quarter_snaps(self):
        for eps in (0.0, 0.1 * QUARTER_TOL, -0.1 * QUARTER_TOL):
            p = _p(0.0, 0.25 + eps)
            assert p.delta == 1 and p.nu == 0j
        assert _p(0.0, 0.25 + 1e-9).delta == 0

    def test_mu1_carried(self):
        assert _p(4.0, 0.0).mu1 == 4.0

    @pytest.mark.parametrize("bad", [dict(d=0), dict(d=1.5), dict(mu1=math.nan), dict(mu2=math.inf)])
    def test_validation(self, bad):
        kw = dict(mu1=0.0, mu2=0.0, d=3) | bad
        with pytest.raises(ValueError):
            Coefficients(**kw)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-20, 20), st.floats(-20, 20))
    def test_nu_squared_identity(self, mu1, mu2):
        p = _p(mu1, mu2)
        lhs = p.nu * p.nu
        rhs = 0.25 - p.mu
        if p.delta:
            assert abs(rhs) <= 1e-11
        else:
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))
        assert p.re_nu >= 0.0


class TestBudgets:
    def test_alpha(self):
        p = _p(4.0, 0.0)
        assert alpha_of(p, 1.0, 3) == pytest.approx(0.5 + 1.5 - 1.5)
        assert alpha_of(p, 1.5, 3) == pytest.approx(2.0 - 3 * 0.5 / 3.0)

    def test_gamma(self):
        assert gamma_of(_p(0.0, 0.1875), 0.25) == pytest.approx(0.5)

    @pytest.mark.parametrize("r", [0.5, 2.0])
    def test_alpha_range(self, r):
        with pytest.raises(ValueError):
            alpha_of(_p(0, 0), r, 3)

    def test_gamma_range(self):
        with pytest.raises(ValueError):
            gamma_of(_p(0, 0), 0.0)

    def test_class_validation(self):
        with pytest.raises(ValueError):
            LebesgueClass(2.0)
        with pytest.raises(ValueError):
            NegSobolevClass(-1.0)


class TestRemainderRate:
    def test_lebesgue_positive_alpha(self):
        # mu1 = 4, d = 3, r = 1: alpha = 1/2
        r = predict_remainder_rate(_p(4.0, 0.0), LebesgueClass(1.0), 3)
        assert r.applicable and r.exponent == pytest.approx(-0.5) and r.log_power == 0.0

    def test_lebesgue_negative_alpha(self):
        r = predict_remainder_rate(_p(0.0, -2.0), LebesgueClass(1.0), 8)
        assert r.exponent == -1.0 and r.log_power == 0.0

    def test_lebesgue_zero_alpha_r_one(self):
        # d = 2, r = 1: alpha = Re nu - 1/2 = 0 at nu = 1/2 (mu = 0)
        r = predict_remainder_rate(_p(0.0, 0.0, 2), LebesgueClass(1.0), 2)
        assert r.exponent == -1.0 and r.log_power == 0.5

    def test_lebesgue_zero_alpha_r_not_one(self):
        # d = 3, r = 1.5: alpha = 1/2 + nu - 1/2 = nu = 0 at mu = 1/4
        r = predict_remainder_rate(_p(1.0, 0.0), LebesgueClass(1.5), 3)
        assert r.exponent == -1.0 and r.log_power == 1.0

    def test_log_case(self):
        # d = 1, mu = 1/4, r = 1: alpha = 0, delta = 1
        r = predict_remainder_rate(_p(0.0, 0.25, 1), LebesgueClass(1.0), 1)
        assert r.exponent == -1.0 and r.log_power == 1.5

    def test_lebesgue_inapplicable(self):
        r = predict_remainder_rate(_p(7.0, 0.0), LebesgueClass(1.0), 3)
        assert not r.applicable and math.isnan(r.exponent)

    def test_neg_sobolev(self):
        r = predict_remainder_rate(_p(0.0, 0.1875), NegSobolevClass(0.25), 3)
        assert r.exponent == pytest.approx(-0.5)
        r = predict_remainder_rate(_p(0.0, 0.1875), NegSobolevClass(1.0), 3)
        assert r.exponent == -1.0

    def test_neg_sobolev_threshold(self):
        # s must exceed max(Re nu - 1/2, 0)
        p = _p(4.0, 0.0)
        assert not predict_remainder_rate(p, NegSobolevClass(1.0), 3).applicable
        assert predict_remainder_rate(p, NegSobolevClass(1.0 + 1e-9), 3).applicable

    def test_energy(self):
        r = predict_remainder_rate(_p(0.0, 0.1875), EnergyClass(), 3)
        assert r.exponent == pytest.approx(-0.25)
        assert not predict_remainder_rate(_p(0.0, -2.0), EnergyClass(), 3).applicable

    def test_dw_shift(self):
        p = _p(4.0, 0.0)
        kg = predict_remainder_rate(p, LebesgueClass(1.0), 3)
        dw = predict_dw_rate(p, LebesgueClass(1.0), 3)
        assert dw.exponent == pytest.approx(kg.exponent - 2.0)
        assert dw.source == "lebesgue-dw"
        assert not predict_dw_rate(_p(7.0, 0.0), LebesgueClass(1.0), 3).applicable

    def test_unknown_class(self):
        with pytest.raises(TypeError):
            predict_remainder_rate(_p(0, 0), object(), 3)


class TestSolutionBound:
    def test_lebesgue_l2(self):
        b = predict_solution_bound(_p(4.0, 0.0), LebesgueClass(1.0), 3)
        assert b.exponent == pytest.approx(0.5)
        b = predict_solution_bound(_p(0.0, 0.0, 2), LebesgueClass(1.0), 2)
        assert (b.exponent, b.log_power) == (0.0, 0.5)

    def test_lebesgue_energy(self):
        b = predict_solution_bound(_p(7.0, 0.0), LebesgueClass(1.0), 3, energy_norm=True)
        # mu = -35/4, nu = 3, alpha = 2
        assert b.exponent == pytest.approx(1.0)
        b = predict_solution_bound(_p(4.0, 0.0), LebesgueClass(1.0), 3, energy_norm=True)
        assert b.exponent == 0.0

    def test_neg_sobolev(self):
        b = predict_solution_bound(_p(0.0, 0.1875), NegSobolevClass(0.25), 3)
        assert b.exponent == pytest.approx(0.5)
        assert not predict_solution_bound(_p(0, 0), NegSobolevClass(0.25), 3, True).applicable

    def test_energy(self):
        b = predict_solution_bound(_p(0.0, -2.0), EnergyClass(), 3)
        assert b.exponent == pytest.approx(2.0)
        b = predict_solution_bound(_p(0.0, -2.0), EnergyClass(), 3, energy_norm=True)
        assert b.exponent == pytest.approx(1.0)
        assert not predict_solution_bound(_p(0.0, 0.1), EnergyClass(), 3, True).applicable
