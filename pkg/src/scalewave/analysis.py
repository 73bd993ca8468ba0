"""
Norms, energy bookkeeping, rate fitting and trend detectors.

The energy of a Klein-Gordon state at time t is

    E = ½‖∂ₜv‖² + ½‖∇v‖² + μ/(2(1+t)²) ‖v‖²,

and along solutions dE/dt = -μ(1+t)^{-3}‖v‖². Decay rates are measured
by least squares in

    log y = c + e·log(1+t) + ℓ·log(1 + log(1+t)),

with ℓ held fixed. Limits of the form ``w(t) -> 0`` cannot be tested from
finite data; :func:`verify_little_o` checks for a clear downward trend of
``w`` over the last two decades instead.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.special import wrightomega

from .params import DerivedParams
from .spectral import SpectralState

__all__ = [
    "StateNorms",
    "NormSeries",
    "FitResult",
    "EnergyRecord",
    "IdentityCheck",
    "NondecayReport",
    "LittleOReport",
    "state_norms",
    "pair_norm",
    "energy",
    "energy_identity_residual",
    "identity_times",
    "verify_nondecay",
    "fit_decay_exponent",
    "verify_little_o",
    "check_remainder_little_o",
    "write_series",
    "read_series",
    "write_fit",
    "read_fit",
]


class StateNorms(NamedTuple):
    l2_of_v: float
    hdot1_of_v: float
    l2_of_vt: float
    pair_norm: float


def state_norms(s: SpectralState, cap: bool = True) -> StateNorms:
    """``‖v‖_{L²}``, ``‖v‖_{Ḣ¹}``, ``‖∂ₜv‖_{L²}`` and the Ḣ¹×L² pair norm.

    ``cap=False`` drops the sub-grid tail model (grid-resolved part only).
    """
    g = s.grid
    a = np.abs(s.value) ** 2
    b = np.abs(s.velocity) ** 2
    l2 = math.sqrt(g.integrate(a, cap=cap))
    h1 = math.sqrt(g.integrate(a, power=2.0, cap=cap))
    vt = math.sqrt(g.integrate(b, cap=cap))
    return StateNorms(l2, h1, vt, math.hypot(h1, vt))


def pair_norm(s: SpectralState, cap: bool = True) -> float:
    """Ḣ¹×L² norm ``(‖∇v‖² + ‖∂ₜv‖²)^{1/2}``."""
    return state_norms(s, cap).pair_norm


@dataclass(frozen=True)
class NormSeries:
    """A scalar quantity sampled at ascending times."""

    times: np.ndarray
    values: np.ndarray
    label: str

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D of equal length")
        order = np.argsort(t, kind="stable")
        t, v = t[order], v[order]
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly ascending")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def weighted(self, exponent: float, log_power: float = 0.0, label: str | None = None) -> "NormSeries":
        """``(1+t)^exponent {1+log(1+t)}^{-log_power} · value``."""
        lt = np.log1p(self.times)
        w = np.exp(exponent * lt) * (1.0 + lt) ** (-log_power) * self.values
        return NormSeries(self.times, w, label or f"weighted({self.label})")


@dataclass(frozen=True)
class FitResult:
    exponent: float
    log_power_used: float
    intercept: float
    rms_residual: float
    t_lo: float
    t_hi: float

    @property
    def window(self) -> tuple[float, float]:
        return self.t_lo, self.t_hi


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    kinetic: float
    potential: float
    mass_term: float
    total: float


@dataclass(frozen=True)
class IdentityCheck:
    """Residual of an integral identity evaluated by quadrature.

    ``inconclusive`` is set when the quadrature's own error estimate
    exceeds the residual, i.e. the residual is at the quadrature noise
    level and says nothing more about the identity.
    """

    residual: float
    scale: float
    error_estimate: float

    @property
    def relative(self) -> float:
        return self.residual / self.scale if self.scale > 0 else self.residual

    @property
    def inconclusive(self) -> bool:
        return self.error_estimate > self.residual


@dataclass(frozen=True)
class NondecayReport:
    applicable: bool
    passed: bool | None
    min_margin: float
    initial_energy: float
    reason: str = ""


@dataclass(frozen=True)
class LittleOReport:
    passed: bool
    ratio: float
    decade_means: tuple[float, ...]
    monotone: bool
    trivial: bool = False
    reason: str = ""


def energy(s: SpectralState, mu: float) -> EnergyRecord:
    """Energy split into kinetic, potential and mass parts at ``s.time``."""
    n = state_norms(s)
    kin = 0.5 * n.l2_of_vt**2
    pot = 0.5 * n.hdot1_of_v**2
    mass = mu * n.l2_of_v**2 / (2.0 * (1.0 + s.time) ** 2)
    return EnergyRecord(s.time, kin, pot, mass, kin + pot + mass)


def _check_trajectory(traj: Sequence[SpectralState]) -> np.ndarray:
    if len(traj) < 3:
        raise ValueError("trajectory needs at least three states")
    t = np.array([s.time for s in traj])
    if np.any(np.diff(t) <= 0):
        raise ValueError("trajectory times must be strictly increasing")
    return t


def identity_times(t_max: float, n: int, crossover: float = 20.0) -> np.ndarray:
    """Sample times uniform in ``y = log(1+t) + t/crossover`` on ``[0, t_max]``.

    Steps grow like ``1+t`` early and saturate at about
    ``crossover·Δy`` late, so oscillations stay resolved while the
    ``(1+t)^{-3}`` weight near 0 is sampled finely. The inverse is exact:
    ``1+t = L ω(y + 1/L - log L)`` with ``ω`` the Wright omega function.
    """
    if not (t_max > 0 and crossover > 0 and n >= 3):
        raise ValueError("need t_max > 0, crossover > 0 and n >= 3")
    L = float(crossover)
    y = np.linspace(0.0, math.log1p(t_max) + t_max / L, int(n))
    t = L * wrightomega(y + 1.0 / L - math.log(L)).real - 1.0
    t[0], t[-1] = 0.0, t_max
    return t


def energy_identity_residual(trajectory: Sequence[SpectralState], mu: float) -> IdentityCheck:
    """Max over samples of ``|E(t) - E(t₀) + μ∫ (1+s)^{-3}‖v(s)‖² ds|``.

    The integral is taken in ``x = log(1+s)`` with composite Simpson
    (non-uniform aware); any increasing sampling is accepted, and
    :func:`identity_times` gives fourth-order convergence under halving.

    Returns
    -------
    IdentityCheck
        ``scale`` is ``|E(t₀)|``; the error estimate compares against the
        same quadrature on every other sample.
    """
    t = _check_trajectory(trajectory)
    e = np.array([energy(s, mu).total for s in trajectory])
    l2sq = np.array([state_norms(s).l2_of_v ** 2 for s in trajectory])
    x = np.log1p(t)
    g = -mu * l2sq / (1.0 + t) ** 2  # integrand times ds/dx = 1+s
    integral = np.concatenate([[0.0], cumulative_simpson(g, x=x)])
    resid = np.abs(e - e[0] - integral)
    est = math.inf
    if t.size >= 5:
        sub = slice(0, None, 2)
        coarse = np.concatenate([[0.0], cumulative_simpson(g[sub], x=x[sub])])
        est = float(np.max(np.abs(coarse - integral[sub]))) / 15.0
    return IdentityCheck(float(np.max(resid)), abs(float(e[0])), est)


def verify_nondecay(trajectory: Sequence[SpectralState], mu: float, tol: float = 1e-8) -> NondecayReport:
    """Check ``kinetic + potential >= E(0) - tol·E(0)`` along a trajectory.

    Applicable only for ``mu < 0`` with positive initial energy.
    """
    e0 = energy(trajectory[0], mu).total
    if not mu < 0.0:
        return NondecayReport(False, None, math.nan, e0, "needs mu < 0")
    if not e0 > 0.0:
        return NondecayReport(False, None, math.nan, e0, "needs E(0) > 0")
    margins = []
    for s in trajectory:
        r = energy(s, mu)
        margins.append(r.kinetic + r.potential - e0)
    m = float(min(margins))
    return NondecayReport(True, m >= -tol * e0, m, e0)


def fit_decay_exponent(series: NormSeries, log_power: float = 0.0,
                       window: tuple[float, float] | None = None) -> FitResult:
    """Least-squares power law with a fixed logarithmic factor.

    Parameters
    ----------
    series : NormSeries
    log_power : float
        Exponent ℓ of ``{1+log(1+t)}``, held fixed.
    window : (t_lo, t_hi), optional
        Defaults to ``[t_max/100, t_max]``.

    Returns
    -------
    FitResult

    Raises
    ------
    ValueError
        On negative values or fewer than 10 usable samples in the window.
    """
    t, v = series.times, series.values
    if window is None:
        window = (t[-1] / 100.0, t[-1])
    lo, hi = window
    if not lo < hi:
        raise ValueError("window must satisfy t_lo < t_hi")
    sel = (t >= lo) & (t <= hi)
    t, v = t[sel], v[sel]
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError("series values must be finite and nonnegative")
    keep = v >= 1e-300
    if not np.all(keep):
        warnings.warn(f"{np.count_nonzero(~keep)} values below 1e-300 dropped from fit", stacklevel=2)
        t, v = t[keep], v[keep]
    if t.size < 10:
        raise ValueError(f"need at least 10 samples in window, have {t.size}")
    lt = np.log1p(t)
    y = np.log(v) - log_power * np.log1p(lt)
    a = np.column_stack([np.ones_like(lt), lt])
    coef, *_ = np.linalg.lstsq(a, y, rcond=None)
    res = y - a @ coef
    return FitResult(float(coef[1]), float(log_power), float(coef[0]),
                     float(math.sqrt(np.mean(res * res))), float(lo), float(hi))


def verify_little_o(series: NormSeries, weight_exponent: float, log_power: float = 0.0) -> LittleOReport:
    """Trend test for ``(1+t)^weight_exponent {1+log(1+t)}^{-log_power} y(t) -> 0``.

    Passes when the weighted series has strictly decreasing means over
    decades of ``1+t`` in the final two decades and drops by at least a
    factor two across them.

    Raises
    ------
    ValueError
        If the series spans less than two decades of ``1+t``.
    """
    t = series.times
    if (1.0 + t[-1]) / (1.0 + t[0]) < 100.0 * (1 - 1e-12):
        raise ValueError("series must cover at least two decades of 1+t")
    w = series.weighted(weight_exponent, log_power).values
    lt = np.log10(1.0 + t)
    top = lt[-1]
    # decade bins counted back from the last sample: bin 0 is the final decade
    bins = np.minimum(np.floor(top - lt).astype(int), int(math.floor(top - lt[0])))
    means = tuple(float(np.mean(w[bins == b])) for b in range(int(bins.max()), -1, -1)
                  if np.any(bins == b))
    monotone = len(means) >= 2 and means[-1] < means[-2]
    i_lo = int(np.argmin(np.abs(lt - (top - 2.0))))
    ratio = float(w[-1] / w[i_lo]) if w[i_lo] > 0 else math.inf
    return LittleOReport(bool(monotone and ratio <= 0.5), ratio, means, bool(monotone))


def check_remainder_little_o(remainder: NormSeries, p: DerivedParams,
                             zero_tol: float = 1e-12, reference: float = 1.0) -> LittleOReport:
    """Trend test for ``(1+t)^{1/2-Re ν} R(t) -> 0`` (log weight -1 when μ = 1/4).

    Parameters
    ----------
    remainder : NormSeries
    p : DerivedParams
    zero_tol, reference : float
        A remainder below ``zero_tol·reference`` everywhere (the μ = 0
        case) passes trivially with ``trivial=True``.
    """
    if np.all(remainder.values <= zero_tol * reference):
        return LittleOReport(True, 0.0, (), True, trivial=True, reason="remainder vanishes")
    if not p.mu > 0.0:
        return LittleOReport(False, math.nan, (), False, reason="needs mu > 0")
    return verify_little_o(remainder, 0.5 - p.re_nu, 1.0 if p.delta else 0.0)


# ------------------------------------------------------------------ I/O
_F = "{:.17g}".format


def write_series(path, series: Sequence[NormSeries] | NormSeries) -> None:
    """Write one or more series as CSV ``t,value,label``."""
    if isinstance(series, NormSeries):
        series = [series]
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(["t", "value", "label"])
        for s in series:
            for t, v in zip(s.times, s.values):
                wr.writerow([_F(t), _F(v), s.label])


def read_series(path) -> dict[str, NormSeries]:
    """Read a CSV written by :func:`write_series`, grouped by label."""
    rows: dict[str, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        if next(rd) != ["t", "value", "label"]:
            raise ValueError("unexpected series header")
        for t, v, lab in rd:
            rows.setdefault(lab, []).append((float(t), float(v)))
    return {k: NormSeries(np.array([a for a, _ in r]), np.array([b for _, b in r]), k)
            for k, r in rows.items()}


def write_fit(path, fit: FitResult) -> None:
    with open(path, "w") as fh:
        json.dump(asdict(fit), fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_fit(path) -> FitResult:
    with open(path) as fh:
        return FitResult(**json.load(fh))
