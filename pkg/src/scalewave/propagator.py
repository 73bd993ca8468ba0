"""
Whole-state evolution on a radial grid.

Each node evolves independently through a 2x2 mode matrix: the exact
Bessel multiplier where it is available (real order, ``(1+t₀)ρ`` above
:data:`~scalewave.mode_kernel.Z_CUTOFF`), otherwise the adaptive ODE
fundamental matrix. On top of that sit the free group, the damped-wave
transform ``v = (1+t)^{μ₁/2}u``, the Duhamel check, the frequency zones
used in low-frequency analysis, and extraction of the scattering profile
``v⃗₊ = lim W(-T)v⃗(T)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.special import gamma, gammaincc

from . import mode_kernel as mk
from .analysis import IdentityCheck, NormSeries, pair_norm, state_norms
from .params import (Coefficients, DataClass, DerivedParams, predict_remainder_rate,
                     predict_solution_bound)
from .spectral import RadialGrid, SpectralState

__all__ = [
    "ScatteringResult",
    "ZoneSplit",
    "DEFAULT_SCHEDULE_MAX",
    "default_schedule",
    "propagators",
    "evolve",
    "trajectory",
    "evolve_dw",
    "trajectory_dw",
    "free_evolve",
    "liouville_forward",
    "liouville_inverse",
    "duhamel_residual",
    "extract_scattering_state",
    "exact_scattering_profile",
    "remainder_series",
    "zone_split",
    "zone_norms",
    "tail_integral",
    "phase_roundoff",
]

DEFAULT_SCHEDULE_MAX = 1e4


def _bessel_mask(grid: RadialGrid, t0: float, p: DerivedParams, method: str) -> np.ndarray:
    z0 = (1.0 + t0) * grid.nodes
    if method == "ode":
        return np.zeros(grid.size, dtype=bool)
    if method == "bessel":
        if not p.real_order:
            raise ValueError("method='bessel' needs mu <= 1/4")
        low = np.flatnonzero(z0 < mk.Z_CUTOFF)
        if low.size:
            raise ValueError(f"node {low[0]} has (1+t0) rho = {z0[low[0]]:.3g} below the "
                             f"Bessel cutoff {mk.Z_CUTOFF}; use method='ode' or 'auto'")
        return np.ones(grid.size, dtype=bool)
    if method == "auto":
        if not p.real_order:
            return np.zeros(grid.size, dtype=bool)
        return z0 >= mk.Z_CUTOFF
    raise ValueError(f"unknown method {method!r}")


def propagators(grid: RadialGrid, t0: float, times, p: DerivedParams, method: str = "auto",
                tol: mk.ToleranceSpec | None = None) -> np.ndarray:
    """Klein-Gordon mode matrices from ``t0`` to every time in ``times``.

    Returns
    -------
    ndarray, shape ``(len(times), M, 2, 2)``
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < t0):
        raise ValueError("target times must not precede the state time")
    mb = _bessel_mask(grid, t0, p, method)
    out = np.empty((times.size, grid.size, 2, 2))
    rho = grid.nodes
    if mb.any():
        out[:, mb] = mk.multiplier_matrix(times[:, None], t0, rho[mb][None, :], p)
    if (~mb).any():
        idx = np.flatnonzero(~mb)
        order = np.argsort(times, kind="stable")
        try:
            f = mk.ode_fundamental(t0, times[order], rho[idx], 0.0, p.mu, tol)
        except mk.StepLimitError as exc:
            node = int(idx[exc.node])
            raise mk.StepLimitError(f"{exc} [grid node {node}]", exc.t_reached, node) from exc
        out[order[:, None], idx[None, :]] = np.swapaxes(f, 0, 1)
    return out


def evolve(state: SpectralState, t1: float, p: DerivedParams, method: str = "auto",
           tol: mk.ToleranceSpec | None = None) -> SpectralState:
    """Advance a Klein-Gordon state to ``t1 >= state.time``.

    Parameters
    ----------
    state : SpectralState
    t1 : float
    p : DerivedParams
    method : {'auto', 'bessel', 'ode'}
        ``auto`` uses the Bessel multiplier where valid, ODE elsewhere.
    tol : ToleranceSpec, optional
    """
    if t1 < state.time:
        raise ValueError("evolve only runs forward; use free_evolve for the free group")
    if t1 == state.time:
        return state
    m = propagators(state.grid, state.time, [t1], p, method, tol)[0]
    return state.apply(m, t1)


def trajectory(state: SpectralState, times, p: DerivedParams, method: str = "auto",
               tol: mk.ToleranceSpec | None = None) -> list[SpectralState]:
    """States at each of ``times`` (each computed directly from ``state``)."""
    times = np.asarray(times, dtype=float)
    mats = propagators(state.grid, state.time, times, p, method, tol)
    return [state.apply(m, t) for m, t in zip(mats, times)]


def trajectory_dw(state: SpectralState, times, c: Coefficients,
                  tol: mk.ToleranceSpec | None = None) -> list[SpectralState]:
    """Damped-wave states at each of ``times`` by the mode ODE."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < state.time):
        raise ValueError("target times must not precede the state time")
    order = np.argsort(times, kind="stable")
    f = mk.ode_fundamental(state.time, times[order], state.grid.nodes, c.mu1, c.mu2, tol)
    mats = np.empty((times.size, state.grid.size, 2, 2))
    mats[order] = np.swapaxes(f, 0, 1)
    return [state.apply(m, t) for m, t in zip(mats, times)]


def evolve_dw(state: SpectralState, t1: float, c: Coefficients,
              tol: mk.ToleranceSpec | None = None) -> SpectralState:
    """Advance a damped-wave state ``(û, ∂ₜû)`` to ``t1``."""
    if t1 < state.time:
        raise ValueError("evolve_dw only runs forward")
    if t1 == state.time:
        return state
    return trajectory_dw(state, [t1], c, tol)[0]


def free_evolve(state: SpectralState, t1: float) -> SpectralState:
    """Free wave group ``W(t1 - t)``; ``t1`` may lie before ``state.time``."""
    if t1 < 0.0:
        raise ValueError("state times are nonnegative; shift the time origin instead")
    return state.apply(mk.free_wave_matrix(t1 - state.time, state.grid.nodes), t1)


def liouville_forward(u_state: SpectralState, c: Coefficients) -> SpectralState:
    """``v = (1+t)^{μ₁/2}u``, ``∂ₜv = (1+t)^{μ₁/2}(∂ₜu + μ₁u/(2(1+t)))``."""
    t = u_state.time
    f = (1.0 + t) ** (0.5 * c.mu1)
    u, ut = u_state.value, u_state.velocity
    return u_state.replace(value=f * u, velocity=f * (ut + 0.5 * c.mu1 * u / (1.0 + t)))


def liouville_inverse(v_state: SpectralState, c: Coefficients) -> SpectralState:
    """Inverse of :func:`liouville_forward`."""
    t = v_state.time
    g = (1.0 + t) ** (-0.5 * c.mu1)
    u = g * v_state.value
    return v_state.replace(value=u, velocity=g * v_state.velocity - 0.5 * c.mu1 * u / (1.0 + t))


# ------------------------------------------------------------- Duhamel
def _duhamel_rhs(times, vals, v0, v1, rho, mu):
    t = times[-1]
    f = -mu * vals / (1.0 + times[:, None]) ** 2
    arg = rho[None, :] * (t - times[:, None])
    sin_over = (t - times[:, None]) * np.sinc(arg / np.pi)
    i1 = simpson(sin_over * f, x=times, axis=0)
    i2 = simpson(np.cos(arg) * f, x=times, axis=0)
    w = mk.free_wave_matrix(t - times[0], rho)
    return (w[:, 0, 0] * v0 + w[:, 0, 1] * v1 + i1,
            w[:, 1, 0] * v0 + w[:, 1, 1] * v1 + i2)


def duhamel_residual(trajectory: Sequence[SpectralState], p: DerivedParams) -> IdentityCheck:
    """Residual of ``v⃗(t) = W(t-t₀)v⃗(t₀) + ∫ W(t-s)(0, -μ(1+s)^{-2}v(s)) ds``.

    The integral runs over the stored trajectory with composite Simpson;
    the residual is the Ḣ¹×L² norm of (left - right) at the final time.
    ``scale`` is the pair norm at the final time; the error estimate
    comes from repeating the quadrature on every other sample.
    """
    times = np.array([s.time for s in trajectory])
    if times.size < 3 or np.any(np.diff(times) <= 0):
        raise ValueError("need at least three states at increasing times")
    first, last = trajectory[0], trajectory[-1]
    rho = first.grid.nodes
    vals = np.array([s.value for s in trajectory])
    a, b = _duhamel_rhs(times, vals, first.value, first.velocity, rho, p.mu)
    diff = last.replace(value=last.value - a, velocity=last.velocity - b)
    res = pair_norm(diff)
    est = math.inf
    if times.size >= 5 and times.size % 2 == 1:
        a2, b2 = _duhamel_rhs(times[::2], vals[::2], first.value, first.velocity, rho, p.mu)
        est = pair_norm(last.replace(value=a - a2, velocity=b - b2)) / 15.0
    return IdentityCheck(res, pair_norm(last), est)


# ----------------------------------------------------------- scattering
def default_schedule(t_max: float = DEFAULT_SCHEDULE_MAX, start: float = 10.0) -> np.ndarray:
    """Geometric schedule ``start·2^k`` up to ``t_max`` (inclusive)."""
    k = int(math.floor(math.log2(t_max / start) + 1e-12))
    sched = start * 2.0 ** np.arange(k + 1)
    if sched[-1] < t_max * (1 - 1e-12):
        sched = np.append(sched, t_max)
    return sched


def tail_integral(T: float, a: float, q: float) -> float:
    """``∫_T^∞ (1+s)^{a-2} {1+log(1+s)}^q ds`` for ``a < 1``, ``q >= 0``."""
    if not a < 1.0:
        return math.inf
    b = 1.0 - a
    u = math.log1p(T)
    x = b * (1.0 + u)
    # e^{b} b^{-q-1} Γ(q+1, x), arranged to avoid overflow
    return math.exp(b - x + (q + 1.0) * math.log(x) - (q + 1.0) * math.log(b)) \
        * _scaled_upper_gamma(q + 1.0, x)


def _scaled_upper_gamma(s: float, x: float) -> float:
    """``Γ(s, x) e^{x} x^{-s}``."""
    val = gammaincc(s, x) * gamma(s)
    if val > 0.0:
        return val * math.exp(x - s * math.log(x))
    # deep tail: Γ(s,x) ~ x^{s-1} e^{-x}(1 + (s-1)/x + ...)
    return (1.0 + (s - 1.0) / x + (s - 1.0) * (s - 2.0) / x**2) / x


@dataclass(frozen=True, eq=False)
class ScatteringResult:
    """Outcome of :func:`extract_scattering_state`.

    Attributes
    ----------
    profile : SpectralState
        ``W(-T)v⃗(T)`` at the last scheduled time, stamped at t = 0.
    T_used : float
    tail_bound : float
        Ḣ¹×L² bound on the distance from ``profile`` to the true limit,
        using the empirical constant ``c_fit`` (label ``"empirical"``).
    per_mode_cauchy : ndarray, shape (K-1, M)
        Modewise ``(ρ²|Δv̂|² + |Δv̂ₜ|²)^{1/2}`` between successive iterates.
    cauchy : ndarray, shape (K-1,)
        Grid-resolved Ḣ¹×L² differences between successive iterates.
    cauchy_ok : bool
        False when successive differences fail to decrease beyond the
        round-off floor.
    """

    profile: SpectralState
    T_used: float
    tail_bound: float
    per_mode_cauchy: np.ndarray
    cauchy: np.ndarray
    cauchy_ok: bool
    schedule: np.ndarray
    l2_history: NormSeries
    params: DerivedParams
    c_fit: float
    growth: tuple[float, float]
    method: str = "auto"
    label: str = "empirical"


def phase_roundoff(initial: SpectralState, T: float) -> float:
    """Ḣ¹×L² size of the double-precision phase error ``4·eps·(1+T)ρ`` per mode.

    Oscillatory factors at ``z = (1+T)ρ`` carry absolute error of order
    ``eps·z``, which floors any comparison of profiles extracted at ``T``.
    """
    g = initial.grid
    rho = g.nodes
    mode_sq = rho**2 * np.abs(initial.value) ** 2 + np.abs(initial.velocity) ** 2
    return 4.0 * np.finfo(float).eps * math.sqrt(g.integrate(((1.0 + T) * rho) ** 2 * mode_sq))


def extract_scattering_state(initial: SpectralState, p: DerivedParams, T_schedule=None,
                             dc: DataClass | None = None, method: str = "auto",
                             tol: mk.ToleranceSpec | None = None) -> ScatteringResult:
    """Approximate ``v⃗₊ = lim W(-T)v⃗(T)`` along a schedule of times.

    Parameters
    ----------
    initial : SpectralState
    p : DerivedParams
    T_schedule : increasing array, optional
        Defaults to :func:`default_schedule`.
    dc : DataClass
        Class of the data; its remainder prediction must be applicable.
    method, tol
        Passed to :func:`trajectory`.

    Returns
    -------
    ScatteringResult
    """
    if dc is None:
        raise ValueError("a data class is required to bound the tail")
    d = initial.grid.d
    if not predict_remainder_rate(p, dc, d).applicable:
        raise ValueError("remainder rate not applicable for this data class; "
                         "the scattering tail is not controlled")
    sched = default_schedule() if T_schedule is None else np.asarray(T_schedule, dtype=float)
    if sched.size < 2 or np.any(np.diff(sched) <= 0) or sched[0] <= initial.time:
        raise ValueError("schedule must be increasing, beyond the initial time, with >= 2 entries")
    states = trajectory(initial, sched, p, method, tol)
    ws = [free_evolve(s, 0.0) for s in states]
    rho = initial.grid.nodes
    per_mode = np.array([
        np.sqrt(rho**2 * np.abs(b.value - a.value) ** 2 + np.abs(b.velocity - a.velocity) ** 2)
        for a, b in zip(ws[:-1], ws[1:])
    ])
    # grid-resolved: the sub-grid power model breaks once (1+T)ρ_min ~ 1
    diffs = np.array([pair_norm(b - a, cap=False) for a, b in zip(ws[:-1], ws[1:])])
    floor = 1e-11 * max(pair_norm(initial), 1e-300) + np.array(
        [phase_roundoff(initial, T) for T in sched[2:]])
    ok = bool(np.all(diffs[1:] <= diffs[:-1] * (1.0 + 1e-9) + floor))
    if not ok:
        warnings.warn("scattering iterates are not Cauchy along the schedule", stacklevel=2)

    hist_t = np.concatenate([[initial.time], sched])
    hist_v = np.array([state_norms(initial).l2_of_v] + [state_norms(s).l2_of_v for s in states])
    bound = predict_solution_bound(p, dc, d)
    a, q = bound.exponent, bound.log_power
    lt = np.log1p(hist_t)
    c_fit = float(np.max(hist_v / (np.exp(a * lt) * (1.0 + lt) ** q)))
    T = float(sched[-1])
    tail = abs(p.mu) * c_fit * tail_integral(T, a, q) if p.mu != 0.0 else 0.0
    prof = ws[-1].replace(time=0.0)
    return ScatteringResult(prof, T, float(tail), per_mode, diffs, ok, sched,
                            NormSeries(hist_t, hist_v, "l2"), p, c_fit, (a, q), method)


def exact_scattering_profile(initial: SpectralState, p: DerivedParams,
                             tol: mk.ToleranceSpec | None = None) -> SpectralState:
    """Scattering profile from the large-argument Bessel limits (real order only).

    Nodes below the Bessel cutoff are first carried by the ODE to a time
    where ``(1+t)ρ`` clears it.
    """
    if not p.real_order:
        raise ValueError("closed-form profile needs mu <= 1/4")
    g = initial.grid
    rho = g.nodes
    z0 = (1.0 + initial.time) * rho
    low = z0 < mk.Z_CUTOFF
    t_star = initial.time
    state = initial
    if low.any():
        t_star = max(initial.time, 10.0 * mk.Z_CUTOFF / rho[0] - 1.0)
        state = evolve(initial, t_star, p, "auto", tol)
    s = mk.scattering_matrix(t_star, rho, p)
    return state.apply(s, 0.0)


def remainder_series(initial: SpectralState, result: ScatteringResult, times,
                     method: str | None = None, tol: mk.ToleranceSpec | None = None) -> NormSeries:
    """``R(t) = ‖v⃗(t) - W(t)v⃗₊‖_{Ḣ¹×L²}`` with ``v⃗₊`` from ``result``."""
    times = np.asarray(times, dtype=float)
    if np.any(times > result.T_used * (1 + 1e-12)):
        raise ValueError("remainder requested beyond the extraction time T_used")
    states = trajectory(initial, times, result.params, method or result.method, tol)
    vals = [pair_norm(s - free_evolve(result.profile, s.time)) for s in states]
    return NormSeries(times, np.array(vals), "remainder")


# ---------------------------------------------------------------- zones
@dataclass(frozen=True, eq=False)
class ZoneSplit:
    """Boolean node masks for the three frequency zones.

    ``z1``: ``N < (1+t₀)ρ``; ``z2``: ``(1+t₀)ρ <= N < (1+t)ρ``;
    ``z3``: ``(1+t)ρ <= N``.
    """

    z1: np.ndarray
    z2: np.ndarray
    z3: np.ndarray
    t: float
    t0: float
    N: float


def zone_split(grid: RadialGrid, t: float, t0: float, N: float) -> ZoneSplit:
    """Partition nodes by ``(1+t₀)ρ`` and ``(1+t)ρ`` against ``N``."""
    if not (t >= t0 >= 0.0):
        raise ValueError("need t >= t0 >= 0")
    if not N > 0.0:
        raise ValueError("N must be positive")
    rho = grid.nodes
    z3 = (1.0 + t) * rho <= N
    z2 = ~z3 & ((1.0 + t0) * rho <= N)
    z1 = ~(z3 | z2)
    return ZoneSplit(z1, z2, z3, float(t), float(t0), float(N))


def zone_norms(state: SpectralState, split: ZoneSplit) -> tuple[float, float, float]:
    """``‖v‖_{L²}`` restricted to Z₁, Z₂, Z₃."""
    a = np.abs(state.value) ** 2
    g = state.grid
    return tuple(math.sqrt(g.integrate(a, mask=m)) for m in (split.z1, split.z2, split.z3))
