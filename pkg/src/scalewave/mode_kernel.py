"""
Per-frequency propagators.

At radial frequency ρ the Klein-Gordon equation reduces to the mode
equation

    v'' + (ρ² + μ/(1+t)²) v = 0,

whose solutions for real ν are ``z^{1/2} J_ν(z)`` and ``z^{1/2} Y_ν(z)``
with ``z = (1+t)ρ``. This module provides

* Bessel values with derivatives (:func:`bessel_jy`),
* the building blocks e₊, e₋ and their time derivatives (:func:`e_pair`),
* the exact 2x2 propagator built from them (:func:`multiplier_matrix`),
* an adaptive Runge-Kutta alternative valid for every μ
  (:func:`ode_fundamental`, :func:`ode_propagate_kg`,
  :func:`ode_propagate_dw`),
* the free-wave rotation (:func:`free_wave_matrix`).

Mode matrices are numpy arrays with trailing shape ``(2, 2)`` acting on
column vectors ``(v̂, ∂ₜv̂)``; all functions broadcast over ρ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from . import _rk
from .params import Coefficients, DerivedParams

__all__ = [
    "ModeState",
    "BesselPair",
    "ToleranceSpec",
    "StepLimitError",
    "Z_CUTOFF",
    "bessel_jy",
    "e_pair",
    "multiplier_matrix",
    "free_wave_matrix",
    "ode_fundamental",
    "ode_propagate_kg",
    "ode_propagate_dw",
    "scattering_matrix",
    "det2",
    "scaled_deviation",
]

#: below this value of (1+t₀)ρ the Bessel path hands over to the ODE path
Z_CUTOFF = 1e-6


class StepLimitError(RuntimeError):
    """The adaptive integrator ran out of steps or produced non-finite values."""

    def __init__(self, message, t_reached=None, node=None):
        super().__init__(message)
        self.t_reached = t_reached
        self.node = node


@dataclass(frozen=True)
class ModeState:
    """Value and time derivative of one Fourier mode (arrays broadcast)."""

    value: complex | np.ndarray
    velocity: complex | np.ndarray

    def __post_init__(self):
        if not (np.all(np.isfinite(self.value)) and np.all(np.isfinite(self.velocity))):
            raise ValueError("mode state must be finite")

    def as_array(self) -> np.ndarray:
        return np.stack(np.broadcast_arrays(
            np.asarray(self.value, dtype=complex), np.asarray(self.velocity, dtype=complex)
        ), axis=-1)


@dataclass(frozen=True)
class BesselPair:
    """``J_ν(z)``, ``Y_ν(z)`` and their z-derivatives."""

    J: np.ndarray
    Y: np.ndarray
    Jprime: np.ndarray
    Yprime: np.ndarray

    def wronskian(self) -> np.ndarray:
        """``J Y' - J' Y``; equals ``2/(π z)``."""
        return self.J * self.Yprime - self.Jprime * self.Y


@dataclass(frozen=True)
class ToleranceSpec:
    """Integrator controls.

    Parameters
    ----------
    abs_tol, rel_tol : float
        Error is measured per fundamental-matrix column in the phase-space
        amplitude ``sqrt(v² + (v'/k)²)`` with ``k = max(ρ, 1/(1+t))``.
    max_steps : int
        Step budget per mode.
    period_fraction : float
        Upper bound on the step as a fraction of the period ``2π/ρ``.
    """

    abs_tol: float = 1e-30
    rel_tol: float = 1e-12
    max_steps: int = 50_000_000
    period_fraction: float = 0.25

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("tolerances must be positive")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError("max_steps must be a positive integer")
        if not 0 < self.period_fraction <= 1:
            raise ValueError("period_fraction must lie in (0, 1]")

    def scaled(self, factor: float) -> "ToleranceSpec":
        return ToleranceSpec(self.abs_tol * factor, self.rel_tol * factor,
                             self.max_steps, self.period_fraction)


def bessel_jy(nu, z) -> BesselPair:
    """Bessel functions of the first and second kind with derivatives.

    Parameters
    ----------
    nu : float or array_like
        Real order, ``nu >= 0``.
    z : float or array_like
        Positive argument.

    Returns
    -------
    BesselPair
        Derivatives from ``C'_ν = (ν/z) C_ν - C_{ν+1}``.
    """
    nu = np.asarray(nu, dtype=float)
    z = np.asarray(z, dtype=float)
    if np.any(nu < 0) or np.any(~np.isfinite(nu)):
        raise ValueError("order nu must be finite and nonnegative")
    if np.any(~(z > 0)) or np.any(~np.isfinite(z)):
        raise ValueError("argument z must be finite and positive")
    J = special.jv(nu, z)
    Y = special.yv(nu, z)
    J1 = special.jv(nu + 1.0, z)
    Y1 = special.yv(nu + 1.0, z)
    return BesselPair(J, Y, nu / z * J - J1, nu / z * Y - Y1)


def e_pair(t, rho, nu):
    """Solutions ``e± = z^{1/2}(J_ν, Y_ν)(z)``, ``z = (1+t)ρ``, and their
    t-derivatives.

    Returns
    -------
    e_plus, e_minus, de_plus, de_minus : ndarray
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(~(rho > 0)):
        raise ValueError("rho must be positive on the Bessel path")
    z = (1.0 + np.asarray(t, dtype=float)) * rho
    b = bessel_jy(nu, z)
    sz = np.sqrt(z)
    # d/dz [z^{1/2} C(z)] = z^{1/2} (C' + C/(2z))
    dp = rho * sz * (b.Jprime + 0.5 * b.J / z)
    dm = rho * sz * (b.Yprime + 0.5 * b.Y / z)
    return sz * b.J, sz * b.Y, dp, dm


def _matrix(a11, a12, a21, a22):
    return np.stack([np.stack([a11, a12], -1), np.stack([a21, a22], -1)], -2)


def multiplier_matrix(t, t0, rho, p: DerivedParams) -> np.ndarray:
    """Exact Klein-Gordon propagator from ``t0`` to ``t`` at frequency ρ.

    Parameters
    ----------
    t, t0 : float or array_like
        ``0 <= t0 <= t``.
    rho : float or array_like
        Positive frequencies with ``(1+t0) rho >= Z_CUTOFF``.
    p : DerivedParams
        Must have ``mu <= 1/4``.

    Returns
    -------
    ndarray, shape ``broadcast(t, t0, rho) + (2, 2)``
        Rows ``(E₀, E₁)`` and ``(Ė₀, Ė₁)``.
    """
    if not p.real_order:
        raise ValueError("multiplier_matrix needs mu <= 1/4; use the ODE path")
    t = np.asarray(t, dtype=float)
    t0 = np.asarray(t0, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(t0 < 0) or np.any(t < t0):
        raise ValueError("need 0 <= t0 <= t")
    if np.any((1.0 + t0) * rho < Z_CUTOFF):
        raise ValueError(f"(1+t0) rho below the Bessel cutoff {Z_CUTOFF}")
    nu = p.re_nu
    ep, em, dep, dem = e_pair(t, rho, nu)
    ep0, em0, dep0, dem0 = e_pair(t0, rho, nu)
    w = 2.0 * rho / np.pi
    return _matrix(
        (ep * dem0 - dep0 * em) / w,
        (ep0 * em - ep * em0) / w,
        (dep * dem0 - dep0 * dem) / w,
        (ep0 * dem - dep * em0) / w,
    )


def scattering_matrix(t0, rho, p: DerivedParams) -> np.ndarray:
    """Map from the state at ``t0`` to the free-wave profile at time 0.

    Uses the large-argument limits ``e₊ ~ √(2/π) cos(z - νπ/2 - π/4)`` and
    ``e₋ ~ √(2/π) sin(z - νπ/2 - π/4)``, so the result is the exact
    ``lim W(-T) E(T, t0)`` for real order.
    """
    if not p.real_order:
        raise ValueError("scattering_matrix needs mu <= 1/4")
    rho = np.asarray(rho, dtype=float)
    ep0, em0, dep0, dem0 = e_pair(t0, rho, p.re_nu)
    w = 2.0 * rho / np.pi
    # coefficients (a, b) of v = a e₊ + b e₋ as rows acting on (v, v')
    a = _matrix(dem0 / w, -em0 / w, -dep0 / w, ep0 / w)
    th = rho - (0.5 * p.re_nu * np.pi + 0.25 * np.pi)
    c, s = np.cos(th), np.sin(th)
    k = np.sqrt(2.0 / np.pi)
    proj = _matrix(k * c, k * s, -k * rho * s, k * rho * c)
    return proj @ a


def free_wave_matrix(t, rho) -> np.ndarray:
    """Free-wave propagator ``[[cos tρ, sin(tρ)/ρ], [-ρ sin tρ, cos tρ]]``.

    The (1,2) entry uses ``t sinc`` so that ρ = 0 gives ``t``.
    """
    t = np.asarray(t, dtype=float)
    rho = np.asarray(rho, dtype=float)
    c = np.cos(t * rho)
    s = np.sin(t * rho)
    return _matrix(c, t * np.sinc(t * rho / np.pi), -rho * s, c)


def det2(m: np.ndarray) -> np.ndarray:
    """Determinant over the trailing 2x2 axes."""
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def scaled_deviation(ma, mb, rho) -> np.ndarray:
    """Relative Frobenius distance of mode matrices in phase-space units.

    Entries are scaled by ``[[1, ρ], [1/ρ, 1]]`` before comparing, which
    puts all four entries on an equal footing.
    """
    rho = np.asarray(rho, dtype=float)[..., None, None]
    one = np.ones_like(rho)
    scale = np.concatenate(
        [np.concatenate([one, rho], -1), np.concatenate([1.0 / rho, one], -1)], -2
    )
    num = np.sqrt(np.sum(np.abs((ma - mb) * scale) ** 2, axis=(-1, -2)))
    den = np.sqrt(np.sum(np.abs(mb * scale) ** 2, axis=(-1, -2)))
    return num / den


def ode_fundamental(t0, times, rho, mu1, mu2, tol: ToleranceSpec | None = None):
    """Fundamental matrices of ``y'' + mu1/(1+t) y' + (ρ² + mu2/(1+t)²) y = 0``.

    Parameters
    ----------
    t0 : float
        Start time, ``t0 >= 0``.
    times : array_like
        Nondecreasing output times, all ``>= t0``.
    rho : float or array_like
        Nonnegative frequencies.
    mu1, mu2 : float
        Use ``mu1 = 0, mu2 = mu`` for the Klein-Gordon mode equation.
    tol : ToleranceSpec, optional

    Returns
    -------
    ndarray, shape ``(len(rho), len(times), 2, 2)`` (rho axis dropped for
    scalar rho)

    Raises
    ------
    StepLimitError
        With the time reached and the offending node index.
    """
    tol = tol or ToleranceSpec()
    scalar_t = np.ndim(times) == 0
    times = np.atleast_1d(np.asarray(times, dtype=float))
    scalar = np.ndim(rho) == 0
    rhos = np.atleast_1d(np.asarray(rho, dtype=float))
    if t0 < 0 or np.any(times < t0) or np.any(np.diff(times) < 0):
        raise ValueError("need 0 <= t0 <= times (nondecreasing)")
    if np.any(rhos < 0) or not np.all(np.isfinite(rhos)):
        raise ValueError("rho must be finite and nonnegative")
    out, status, reached = _rk.fundamental_many(
        float(t0), np.ascontiguousarray(times), np.ascontiguousarray(rhos),
        float(mu1), float(mu2), tol.rel_tol, tol.abs_tol,
        tol.period_fraction, int(tol.max_steps),
    )
    bad = np.flatnonzero(status)
    if bad.size:
        k = int(bad[0])
        why = "step budget exhausted" if status[k] == _rk.STATUS_MAX_STEPS else "non-finite state"
        raise StepLimitError(
            f"{why} at node {k} (rho={rhos[k]:.6g}) after reaching t={reached[k]:.6g}",
            t_reached=float(reached[k]), node=k,
        )
    if scalar_t:
        out = out[:, 0]
    return out[0] if scalar else out


def _apply(m: np.ndarray, state: ModeState) -> ModeState:
    v = np.asarray(state.value, dtype=complex)
    w = np.asarray(state.velocity, dtype=complex)
    return ModeState(m[..., 0, 0] * v + m[..., 0, 1] * w, m[..., 1, 0] * v + m[..., 1, 1] * w)


def ode_propagate_kg(m: ModeState, t0, t1, rho, mu, tol: ToleranceSpec | None = None) -> ModeState:
    """Advance Klein-Gordon modes from ``t0`` to ``t1`` with the adaptive
    integrator; valid for every μ and for ρ = 0."""
    return _apply(ode_fundamental(t0, t1, rho, 0.0, mu, tol), m)


def ode_propagate_dw(m: ModeState, t0, t1, rho, c: Coefficients,
                     tol: ToleranceSpec | None = None) -> ModeState:
    """Advance damped-wave modes ``û'' + μ₁/(1+t)û' + (ρ² + μ₂/(1+t)²)û = 0``."""
    return _apply(ode_fundamental(t0, t1, rho, c.mu1, c.mu2, tol), m)
