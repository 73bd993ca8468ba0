"""
Parameter calculus and rate predictions.

The damped wave equation

    u'' - Δu + μ₁/(1+t) u' + μ₂/(1+t)² u = 0

is mapped by v = (1+t)^{μ₁/2} u onto the Klein-Gordon type equation

    v'' - Δv + μ/(1+t)² v = 0,    μ = μ₁(2-μ₁)/4 + μ₂.

Everything downstream depends on μ only through ν = √(1-4μ)/2 (real for
μ ≤ 1/4, purely imaginary above) and the resonance indicator δ. This
module evaluates those quantities, the decay budgets α and γ, and the
case tables that predict power-law rates for the remainder
‖v⃗(t) - W(t)v⃗₊‖ and for the growth of ‖v(t)‖.

All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

__all__ = [
    "Coefficients",
    "DerivedParams",
    "LebesgueClass",
    "NegSobolevClass",
    "EnergyClass",
    "DataClass",
    "RatePrediction",
    "derive_params",
    "alpha_of",
    "gamma_of",
    "predict_remainder_rate",
    "predict_dw_rate",
    "predict_solution_bound",
    "QUARTER_TOL",
]

#: relative tolerance deciding μ = 1/4 (and r = 1, α = 0)
QUARTER_TOL = 1e-12


@dataclass(frozen=True)
class Coefficients:
    """Damping coefficient ``mu1``, mass coefficient ``mu2`` and dimension ``d``."""

    mu1: float
    mu2: float
    d: int

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        for name in ("mu1", "mu2"):
            val = float(getattr(self, name))
            if not math.isfinite(val):
                raise ValueError(f"{name} must be finite, got {val!r}")
            object.__setattr__(self, name, val)


@dataclass(frozen=True)
class DerivedParams:
    """Effective mass ``mu``, Bessel order ``nu`` and resonance flag ``delta``.

    Attributes
    ----------
    mu : float
        ``mu1 (2 - mu1) / 4 + mu2``.
    nu : complex
        ``sqrt(1 - 4 mu) / 2``; nonnegative real for ``mu <= 1/4``, else
        ``i sqrt(4 mu - 1) / 2``.
    re_nu : float
        Real part of ``nu``.
    delta : int
        1 when ``mu`` equals 1/4 to within :data:`QUARTER_TOL`, else 0.
    mu1 : float
        Damping coefficient carried along for the damped-wave shift.
    """

    mu: float
    nu: complex
    re_nu: float
    delta: int
    mu1: float = 0.0

    @property
    def im_nu(self) -> float:
        return self.nu.imag

    @property
    def real_order(self) -> bool:
        """True when the Bessel order is real (``mu <= 1/4``)."""
        return self.nu.imag == 0.0


@dataclass(frozen=True)
class LebesgueClass:
    """Data in ``(H¹ ∩ L^r) × (L² ∩ L^r)`` with ``1 <= r < 2``."""

    r: float

    def __post_init__(self):
        if not (1.0 <= self.r < 2.0):
            raise ValueError(f"r must lie in [1, 2), got {self.r!r}")


@dataclass(frozen=True)
class NegSobolevClass:
    """Data in ``(H¹ ∩ Ḣ^{-s}) × (L² ∩ Ḣ^{-s})`` with ``s > 0``."""

    s: float

    def __post_init__(self):
        if not self.s > 0.0:
            raise ValueError(f"s must be positive, got {self.s!r}")


@dataclass(frozen=True)
class EnergyClass:
    """Plain energy data ``H¹ × L²``."""


DataClass = Union[LebesgueClass, NegSobolevClass, EnergyClass]


@dataclass(frozen=True)
class RatePrediction:
    """Predicted behaviour ``(1+t)^exponent {1+log(1+t)}^log_power``.

    When ``applicable`` is False the numbers carry no meaning.
    """

    exponent: float
    log_power: float
    applicable: bool
    source: str


def _is_quarter(mu: float) -> bool:
    return abs(mu - 0.25) <= QUARTER_TOL * max(1.0, abs(mu))


def _is_one(r: float) -> bool:
    return abs(r - 1.0) <= QUARTER_TOL


def _is_zero(x: float) -> bool:
    return abs(x) <= QUARTER_TOL


def derive_params(c: Coefficients) -> DerivedParams:
    """Effective mass, Bessel order and resonance flag.

    Parameters
    ----------
    c : Coefficients

    Returns
    -------
    DerivedParams

    Examples
    --------
    >>> p = derive_params(Coefficients(4.0, 0.0, 3))
    >>> p.mu, p.re_nu
    (-2.0, 1.5)
    """
    mu = c.mu1 * (2.0 - c.mu1) / 4.0 + c.mu2
    if _is_quarter(mu):
        return DerivedParams(mu=mu, nu=0j, re_nu=0.0, delta=1, mu1=c.mu1)
    disc = 1.0 - 4.0 * mu
    if disc >= 0.0:
        nu = complex(0.5 * math.sqrt(disc), 0.0)
    else:
        nu = complex(0.0, 0.5 * math.sqrt(-disc))
    return DerivedParams(mu=mu, nu=nu, re_nu=nu.real, delta=0, mu1=c.mu1)


def alpha_of(p: DerivedParams, r: float, d: int) -> float:
    """Decay budget ``α = 1/2 + Re ν - d(2-r)/(2r)`` for ``L^r`` data."""
    if not (1.0 <= r < 2.0):
        raise ValueError(f"r must lie in [1, 2), got {r!r}")
    return 0.5 + p.re_nu - d * (2.0 - r) / (2.0 * r)


def gamma_of(p: DerivedParams, s: float) -> float:
    """Decay budget ``γ = 1/2 + Re ν - s`` for ``Ḣ^{-s}`` data."""
    if not s > 0.0:
        raise ValueError(f"s must be positive, got {s!r}")
    return 0.5 + p.re_nu - s


def _na(source: str) -> RatePrediction:
    return RatePrediction(math.nan, math.nan, False, source)


def predict_remainder_rate(p: DerivedParams, dc: DataClass, d: int) -> RatePrediction:
    """Predicted rate of ``‖v⃗(t) - W(t)v⃗₊‖_{Ḣ¹×L²}``.

    Parameters
    ----------
    p : DerivedParams
    dc : DataClass
    d : int
        Space dimension.

    Returns
    -------
    RatePrediction
        Never raises for inapplicable regimes; ``applicable`` is set False.
    """
    delta = p.delta
    if isinstance(dc, LebesgueClass):
        src = "lebesgue-remainder"
        a = alpha_of(p, dc.r, d)
        if not a < 1.0 or (a > 0 and _is_zero(a - 1.0)):
            return _na(src)
        if _is_zero(a):
            if _is_one(dc.r):
                return RatePrediction(-1.0, 0.5 + delta, True, src)
            return RatePrediction(-1.0, float(delta), True, src)
        if a < 0.0:
            return RatePrediction(-1.0, float(delta), True, src)
        return RatePrediction(a - 1.0, float(delta), True, src)
    if isinstance(dc, NegSobolevClass):
        src = "neg-sobolev-remainder"
        if not dc.s > max(-0.5 + p.re_nu, 0.0):
            return _na(src)
        g = gamma_of(p, dc.s)
        if g <= 0.0:
            return RatePrediction(-1.0, float(delta), True, src)
        return RatePrediction(-1.0 + g, float(delta), True, src)
    if isinstance(dc, EnergyClass):
        src = "energy-little-o"
        if not p.mu > 0.0:
            return _na(src)
        return RatePrediction(-0.5 + p.re_nu, float(delta), True, src)
    raise TypeError(f"unknown data class {dc!r}")


_DW_SOURCE = {
    "lebesgue-remainder": "lebesgue-dw",
    "neg-sobolev-remainder": "neg-sobolev-dw",
    "energy-little-o": "energy-dw",
}


def predict_dw_rate(p: DerivedParams, dc: DataClass, d: int) -> RatePrediction:
    """Remainder rate for the damped wave ``u``: the Klein-Gordon rate
    shifted by ``-mu1/2`` (undoing ``v = (1+t)^{mu1/2} u``)."""
    kg = predict_remainder_rate(p, dc, d)
    src = _DW_SOURCE[kg.source]
    if not kg.applicable:
        return _na(src)
    return RatePrediction(kg.exponent - 0.5 * p.mu1, kg.log_power, True, src)


def predict_solution_bound(
    p: DerivedParams, dc: DataClass, d: int, energy_norm: bool = False
) -> RatePrediction:
    """Growth bound of the Klein-Gordon solution.

    Parameters
    ----------
    p : DerivedParams
    dc : DataClass
    d : int
    energy_norm : bool, optional
        If False (default) bound ``‖v(t)‖_{L²}``; if True bound
        ``‖v⃗(t)‖_{Ḣ¹×L²}``.

    Returns
    -------
    RatePrediction
    """
    delta = float(p.delta)
    if isinstance(dc, LebesgueClass):
        a = alpha_of(p, dc.r, d)
        if not energy_norm:
            src = "lebesgue-l2-growth"
            if _is_zero(a):
                lp = 0.5 + delta if _is_one(dc.r) else delta
                return RatePrediction(0.0, lp, True, src)
            if a < 0.0:
                return RatePrediction(0.0, delta, True, src)
            return RatePrediction(a, delta, True, src)
        src = "lebesgue-energy-bound"
        if _is_zero(a - 1.0):
            lp = 0.5 if _is_one(dc.r) else 0.0
            return RatePrediction(0.0, lp, True, src)
        if a < 1.0:
            return RatePrediction(0.0, 0.0, True, src)
        return RatePrediction(a - 1.0, 0.0, True, src)
    if isinstance(dc, NegSobolevClass):
        src = "neg-sobolev-l2-growth"
        if energy_norm:
            return _na(src)
        g = gamma_of(p, dc.s)
        if g <= 0.0:
            return RatePrediction(0.0, delta, True, src)
        return RatePrediction(g, delta, True, src)
    if isinstance(dc, EnergyClass):
        src = "energy-l2-growth"
        if not energy_norm:
            return RatePrediction(0.5 + p.re_nu, delta, True, src)
        if p.mu < 0.0:
            return RatePrediction(max(0.0, -0.5 + p.re_nu), 0.0, True, src)
        return _na(src)
    raise TypeError(f"unknown data class {dc!r}")
