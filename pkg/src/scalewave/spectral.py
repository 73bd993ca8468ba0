"""
Radial frequency grid and spectral states.

Radial data in ℝ^d have radial Fourier transforms, and the propagators
act on |ξ| = ρ only, so every L²-type norm reduces to

    ‖f‖² = |S^{d-1}| ∫₀^∞ |f̂(ρ)|² ρ^{d-1} dρ.

Grid
----
Nodes are ``ρ = L log(1 + e^{x/L})`` on a uniform ``x`` grid: nearly
geometric below ρ ≈ L and nearly uniform above. ``L`` is tuned so that a
requested number of nodes falls in ``[ρ_min, 1]`` and the rest in
``[1, ρ_max]``. The trapezoid rule in ``x`` converges spectrally for
smooth integrands. The part ``ρ < ρ_min`` is supplied by a tail cap that
sums the trapezoid rule over the missing (infinitely many) nodes under a
local power-law model of the integrand.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.optimize import brentq
from scipy.special import gamma

__all__ = ["RadialGrid", "SpectralState", "sphere_area", "write_trajectory", "read_trajectory"]


def sphere_area(d: int) -> float:
    """Surface area ``2π^{d/2}/Γ(d/2)`` of the unit sphere in ℝ^d (2 for d = 1)."""
    return 2.0 * math.pi ** (d / 2.0) / gamma(d / 2.0)


def _x_of_rho(rho, L):
    u = np.asarray(rho, dtype=float) / L
    return L * (u + np.log(-np.expm1(-u)))


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Quadrature for ``∫₀^∞ f(ρ) ρ^{d-1} dρ`` on a softplus-mapped grid.

    Use :meth:`build` rather than the constructor.

    Attributes
    ----------
    d : int
    nodes : ndarray
        Strictly increasing positive frequencies.
    weights : ndarray
        Trapezoid weights including the factor ``ρ^{d-1}``.
    sphere_area : float
    scale : float
        The softplus scale ``L``.
    step : float
        Uniform spacing in the mapped variable.
    """

    d: int
    nodes: np.ndarray
    weights: np.ndarray
    sphere_area: float
    scale: float
    step: float
    _jac: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, d: int, rho_min: float = 1e-4, rho_max: float = 64.0,
              n_log: int = 256, n_lin: int = 256) -> "RadialGrid":
        """Construct the grid.

        Parameters
        ----------
        d : int
            Space dimension.
        rho_min, rho_max : float
            First and last node; ``0 < rho_min < 1 < rho_max``.
        n_log, n_lin : int
            Approximate number of nodes below and above ρ = 1.
        """
        if int(d) != d or d < 1:
            raise ValueError("d must be a positive integer")
        if not (0.0 < rho_min < 1.0 < rho_max):
            raise ValueError("need 0 < rho_min < 1 < rho_max")
        if n_log < 2 or n_lin < 2:
            raise ValueError("need at least two nodes on each side of rho = 1")
        m = n_log + n_lin

        def mismatch(L):
            x0, x1, xm = _x_of_rho([rho_min, 1.0, rho_max], L)
            return (x1 - x0) / ((xm - x0) / (m - 1)) - n_log

        try:
            L = brentq(mismatch, 1e-2, 1e3, xtol=1e-14)
        except ValueError as exc:
            raise ValueError("cannot balance n_log/n_lin for this range") from exc
        x0, xm = _x_of_rho([rho_min, rho_max], L)
        x = np.linspace(x0, xm, m)
        h = x[1] - x[0]
        rho = L * np.logaddexp(0.0, x / L)
        rho[0], rho[-1] = rho_min, rho_max
        jac = -np.expm1(-rho / L)
        w = h * jac * rho ** (d - 1)
        w[0] *= 0.5
        w[-1] *= 0.5
        return cls(int(d), _readonly(rho), _readonly(w), sphere_area(int(d)),
                   float(L), float(h), _readonly(jac))

    @property
    def size(self) -> int:
        return self.nodes.size

    def tail_cap(self, f: np.ndarray, power: float = 0.0) -> float:
        """Contribution of ``ρ < ρ_min`` to ``∫ f ρ^{power+d-1} dρ``.

        ``f`` is modelled as ``f₀ (ρ/ρ₀)^q``. The slope q is fitted on
        nodes 0-1 and accepted only if nodes 1-2 agree and the model is
        integrable (``q + power + d > 0``); otherwise the samples carry no
        usable tail information (oscillating or noisy integrands such as
        differences of nearly equal states) and the flat model q = 0 is
        used. Divergent integrals are the business of the analytic norms.
        """
        f = np.asarray(f, dtype=float)
        rho, jac, h = self.nodes, self._jac, self.step
        if f[0] == 0.0:
            return 0.0
        q = 0.0
        if np.all(f[:3] > 0.0):
            q01 = math.log(f[1] / f[0]) / math.log(rho[1] / rho[0])
            q12 = math.log(f[2] / f[1]) / math.log(rho[2] / rho[1])
            if abs(q01 - q12) <= 0.05 * (1.0 + abs(q01)) and q01 + power + self.d > 0.0:
                q = q01
        kappa = (q + power + self.d) * jac[0] / rho[0]
        if kappa <= 0.0:
            return math.inf
        f0 = f[0] * rho[0] ** (power + self.d - 1) * jac[0]
        return 0.5 * h * f0 / math.tanh(0.5 * kappa * h)

    def integrate(self, f, power: float = 0.0, mask: np.ndarray | None = None,
                  cap: bool = True, angular: bool = True) -> float:
        """``|S^{d-1}| ∫ f(ρ) ρ^{power} ρ^{d-1} dρ`` (radial integral of ``f(|ξ|)|ξ|^power``).

        Parameters
        ----------
        f : array_like
            Integrand samples at the nodes.
        power : float
            Extra weight exponent.
        mask : bool array, optional
            Restrict the sum to these nodes; the tail cap is added only if
            ``mask[0]`` is set.
        cap : bool
            Include the ``ρ < ρ_min`` tail cap.
        angular : bool
            Multiply by the sphere area.
        """
        f = np.asarray(f, dtype=float)
        g = self.weights * f
        if power != 0.0:
            g = g * self.nodes ** power
        if mask is not None:
            g = np.where(mask, g, 0.0)
        total = float(np.sum(g))
        if cap and (mask is None or mask[0]):
            total += self.tail_cap(f, power)
        return total * self.sphere_area if angular else total

    def same_as(self, other: "RadialGrid") -> bool:
        return other is self or (
            self.d == other.d and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class SpectralState:
    """Fourier data ``(v̂, ∂ₜv̂)`` on a radial grid at one time.

    Arrays are copied and made read-only; operations return new states.
    """

    grid: RadialGrid
    time: float
    value: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.value, dtype=complex)
        w = np.asarray(self.velocity, dtype=complex)
        n = self.grid.size
        if v.shape != (n,) or w.shape != (n,):
            raise ValueError(f"state arrays must have shape ({n},)")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
            raise ValueError("state contains non-finite values")
        if not (self.time >= 0.0 and math.isfinite(self.time)):
            raise ValueError("time must be finite and nonnegative")
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "value", _readonly(v))
        object.__setattr__(self, "velocity", _readonly(w))

    @classmethod
    def zeros(cls, grid: RadialGrid, time: float = 0.0) -> "SpectralState":
        z = np.zeros(grid.size, dtype=complex)
        return cls(grid, time, z, z)

    def replace(self, time=None, value=None, velocity=None) -> "SpectralState":
        return SpectralState(
            self.grid,
            self.time if time is None else time,
            self.value if value is None else value,
            self.velocity if velocity is None else velocity,
        )

    def __sub__(self, other: "SpectralState") -> "SpectralState":
        return self.replace(value=self.value - other.value, velocity=self.velocity - other.velocity)

    def __add__(self, other: "SpectralState") -> "SpectralState":
        return self.replace(value=self.value + other.value, velocity=self.velocity + other.velocity)

    def apply(self, mats: np.ndarray, time: float) -> "SpectralState":
        """Apply per-node 2x2 matrices of shape ``(M, 2, 2)``."""
        v, w = self.value, self.velocity
        return SpectralState(
            self.grid, time,
            mats[:, 0, 0] * v + mats[:, 0, 1] * w,
            mats[:, 1, 0] * v + mats[:, 1, 1] * w,
        )


_HEADER = ["t", "rho", "re_v", "im_v", "re_vt", "im_vt"]


def write_trajectory(path, states: Iterable[SpectralState]) -> None:
    """Write states as CSV rows ``t,rho,re_v,im_v,re_vt,im_vt`` (17 digits)."""
    fmt = "{:.17g}".format
    with open(path, "w", newline="") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(_HEADER)
        for s in states:
            for r, v, w in zip(s.grid.nodes, s.value, s.velocity):
                wr.writerow([fmt(s.time), fmt(r), fmt(v.real), fmt(v.imag), fmt(w.real), fmt(w.imag)])


def read_trajectory(path, grid: RadialGrid) -> list[SpectralState]:
    """Read a trajectory CSV written by :func:`write_trajectory`.

    The node column must match ``grid.nodes``.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(path) as fh:
        if fh.readline().strip().split(",") != _HEADER:
            raise ValueError("unexpected trajectory header")
    n = grid.size
    if data.shape[0] % n:
        raise ValueError("row count is not a multiple of the grid size")
    out = []
    for block in data.reshape(-1, n, 6):
        if not np.array_equal(block[:, 1], grid.nodes):
            raise ValueError("trajectory nodes do not match the grid")
        if np.any(block[:, 0] != block[0, 0]):
            raise ValueError("mixed times inside one state block")
        out.append(SpectralState(grid, block[0, 0], block[:, 2] + 1j * block[:, 3],
                                 block[:, 4] + 1j * block[:, 5]))
    return out
