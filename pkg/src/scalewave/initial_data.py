"""
Analytic initial-data families.

Two radial families are provided, each with closed-form norms so that
class membership and class norms are exact:

``GaussianPhysical``
    ``u(x) = A exp(-|x|²/(2σ²))`` with unitary Fourier transform
    ``û(ρ) = A σ^d exp(-σ²ρ²/2)``.
``FrequencyPowerBump``
    ``û(ρ) = A ρ^a`` on ``[ρ₀, ρ₁]`` with C² quintic blends
    ``S(x) = x³(10 - 15x + 6x²)`` over a fraction ``smoothing`` of each
    cutoff. Defined only through its spectrum, so physical ``L^r`` norms
    are not available.

A family is placed in the position slot, the velocity slot, or both, via
:class:`InitialData`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import gamma, gammainc

from .params import DataClass, EnergyClass, LebesgueClass, NegSobolevClass
from .spectral import RadialGrid, SpectralState, sphere_area

__all__ = [
    "GaussianPhysical",
    "FrequencyPowerBump",
    "InitialData",
    "L2",
    "Hdot1",
    "Lr",
    "HdotNeg",
    "MembershipReport",
    "sample_spectrum",
    "analytic_norms",
    "truncated_mass",
    "membership_report",
]


# ---------------------------------------------------------------- spaces
@dataclass(frozen=True)
class L2:
    """``L²``."""


@dataclass(frozen=True)
class Hdot1:
    """Homogeneous ``Ḣ¹`` (norm of the gradient)."""


@dataclass(frozen=True)
class Lr:
    """Physical-space ``L^r``, ``r >= 1``."""

    r: float

    def __post_init__(self):
        if not self.r >= 1.0:
            raise ValueError("r must be >= 1")


@dataclass(frozen=True)
class HdotNeg:
    """Homogeneous ``Ḣ^{-s}``, ``s > 0``."""

    s: float

    def __post_init__(self):
        if not self.s > 0.0:
            raise ValueError("s must be positive")


Space = Union[L2, Hdot1, Lr, HdotNeg]


def _weight_exponent(space: Space) -> float:
    """k with norm² = |S| ∫ ρ^{2k} |û|² ρ^{d-1} dρ."""
    if isinstance(space, L2):
        return 0.0
    if isinstance(space, Hdot1):
        return 1.0
    if isinstance(space, HdotNeg):
        return -space.s
    raise TypeError(f"{space!r} is not a Fourier-weighted space")


# -------------------------------------------------------------- families
@dataclass(frozen=True)
class GaussianPhysical:
    """Radial Gaussian ``A exp(-|x|²/(2σ²))``."""

    amplitude: float = 1.0
    width: float = 1.0

    def __post_init__(self):
        if not self.width > 0.0:
            raise ValueError("width must be positive")

    def spectrum(self, rho, d: int) -> np.ndarray:
        s = self.width
        return self.amplitude * s**d * np.exp(-0.5 * (s * np.asarray(rho, dtype=float)) ** 2)

    def _norm(self, space: Space, d: int) -> float:
        A, s = abs(self.amplitude), self.width
        if isinstance(space, Lr):
            return A * (2.0 * math.pi * s * s / space.r) ** (d / (2.0 * space.r))
        k = _weight_exponent(space)
        if not k + d / 2.0 > 0.0:
            raise ValueError(f"Gaussian is not in {space!r} for d={d} (need s < d/2)")
        sq = sphere_area(d) * A * A * s ** (2 * d) * gamma(k + d / 2.0) / (2.0 * s ** (2 * k + d))
        return math.sqrt(sq)

    def _truncated(self, space: Space, d: int, rho_min: float) -> float:
        k = _weight_exponent(space)
        A, s = abs(self.amplitude), self.width
        if not k + d / 2.0 > 0.0:
            return math.inf
        full = sphere_area(d) * A * A * s ** (2 * d) * gamma(k + d / 2.0) / (2.0 * s ** (2 * k + d))
        return full * gammainc(k + d / 2.0, (s * rho_min) ** 2)


def _blend(x):
    x = np.clip(x, 0.0, 1.0)
    return x**3 * (10.0 - 15.0 * x + 6.0 * x * x)


_GL_X, _GL_W = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class FrequencyPowerBump:
    """Spectrum ``A ρ^a`` on ``[inner, outer]`` with smooth C² cutoffs.

    Parameters
    ----------
    exponent : float
        Power ``a``.
    inner, outer : float
        Support ``[ρ₀, ρ₁]``; ``inner = 0`` means no inner cutoff.
    smoothing : float
        Blend width as a fraction of each cutoff, in ``(0, 1)``.
    amplitude : float
    """

    exponent: float
    inner: float = 0.0
    outer: float = 1.0
    smoothing: float = 0.1
    amplitude: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.smoothing < 1.0:
            raise ValueError("smoothing must lie in (0, 1)")
        if not (self.inner >= 0.0 and self.outer > 0.0):
            raise ValueError("need inner >= 0 and outer > 0")
        if self.inner * (1.0 + self.smoothing) > self.outer * (1.0 - self.smoothing):
            raise ValueError("cutoff blends overlap; widen [inner, outer]")

    @property
    def flat(self) -> tuple[float, float]:
        return self.inner * (1.0 + self.smoothing), self.outer * (1.0 - self.smoothing)

    def profile(self, rho) -> np.ndarray:
        """Cutoff factor without the power."""
        rho = np.asarray(rho, dtype=float)
        out = _blend((self.outer - rho) / (self.smoothing * self.outer))
        if self.inner > 0.0:
            out = out * _blend((rho - self.inner) / (self.smoothing * self.inner))
        return out

    def spectrum(self, rho, d: int = 0) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        cut = self.profile(rho)
        with np.errstate(divide="ignore", invalid="ignore"):
            pw = np.where(cut > 0.0, rho**self.exponent, 0.0)
        return self.amplitude * pw * cut

    def _radial_integral(self, q: float, lo: float, hi: float) -> float:
        """``∫_lo^hi ρ^{q-1} dρ`` for ``0 <= lo``."""
        if hi <= lo:
            return 0.0
        if lo == 0.0:
            if not q > 0.0:
                return math.inf
            return hi**q / q
        if q == 0.0:
            return math.log(hi / lo)
        return (hi**q - lo**q) / q

    def _gl(self, q: float, a: float, b: float) -> float:
        x = 0.5 * (b - a) * _GL_X + 0.5 * (a + b)
        return float(0.5 * (b - a) * np.sum(_GL_W * x ** (q - 1.0) * self.profile(x) ** 2))

    def _weighted(self, k: float, d: int) -> float:
        q = 2.0 * self.exponent + 2.0 * k + d
        lo, hi = self.flat
        val = self._radial_integral(q, lo, hi)
        if math.isinf(val):
            return val
        val += self._gl(q, hi, self.outer)
        if self.inner > 0.0:
            val += self._gl(q, self.inner, lo)
        return sphere_area(d) * self.amplitude**2 * val

    def _norm(self, space: Space, d: int) -> float:
        if isinstance(space, Lr):
            raise ValueError("L^r norms are only available for closed-form physical profiles")
        sq = self._weighted(_weight_exponent(space), d)
        if math.isinf(sq):
            raise ValueError(f"bump with exponent {self.exponent} is not in {space!r} for d={d}")
        return math.sqrt(sq)

    def _truncated(self, space: Space, d: int, rho_min: float) -> float:
        if rho_min <= self.inner:
            return 0.0
        q = 2.0 * self.exponent + 2.0 * _weight_exponent(space) + d
        if self.inner == 0.0 and rho_min <= self.flat[1]:
            val = self._radial_integral(q, 0.0, rho_min)
        else:
            val = self._gl(q, self.inner, min(rho_min, self.outer))
        return sphere_area(d) * self.amplitude**2 * val

    def blend_resolution(self, grid: RadialGrid) -> float:
        """Number of grid spacings across the narrowest blend."""
        def spacing_at(r):
            i = np.clip(np.searchsorted(grid.nodes, r), 1, grid.size - 1)
            return grid.nodes[i] - grid.nodes[i - 1]

        widths = [(self.smoothing * self.outer, self.outer)]
        if self.inner > 0.0:
            widths.append((self.smoothing * self.inner, self.inner))
        return min(w / spacing_at(r) for w, r in widths)


Family = Union[GaussianPhysical, FrequencyPowerBump]


@dataclass(frozen=True)
class InitialData:
    """A family assigned to the ``position`` slot, the ``velocity`` slot or ``both``."""

    family: Family
    slot: str = "position"

    def __post_init__(self):
        if self.slot not in ("position", "velocity", "both"):
            raise ValueError("slot must be 'position', 'velocity' or 'both'")

    def weights(self, mu1: float = 0.0) -> tuple[float, float]:
        """Multiples ``(c0, c1)`` of the family in ``(v₀, v₁)`` after the
        data map ``(u₀, u₁) -> (u₀, mu1 u₀/2 + u₁)``."""
        c0 = 1.0 if self.slot in ("position", "both") else 0.0
        c1 = 1.0 if self.slot in ("velocity", "both") else 0.0
        return c0, c1 + 0.5 * mu1 * c0


def _as_data(f) -> InitialData:
    return f if isinstance(f, InitialData) else InitialData(f, "position")


def sample_spectrum(f, grid: RadialGrid) -> SpectralState:
    """Time-0 spectral state of a family (position slot) or :class:`InitialData`."""
    data = _as_data(f)
    spec = data.family.spectrum(grid.nodes, grid.d).astype(complex)
    c0, c1 = data.weights()
    return SpectralState(grid, 0.0, c0 * spec, c1 * spec)


def analytic_norms(f: Family, space: Space, d: int, grid: RadialGrid | None = None) -> float:
    """Closed-form norm of ``f`` in ``space`` on ℝ^d.

    Parameters
    ----------
    f : GaussianPhysical or FrequencyPowerBump
    space : L2, Hdot1, Lr or HdotNeg
    d : int
    grid : RadialGrid, optional
        If given, warn when a bump blend is too narrow for the grid.

    Raises
    ------
    ValueError
        If the norm is infinite for this family or not available.
    """
    if isinstance(f, InitialData):
        f = f.family
    if grid is not None and isinstance(f, FrequencyPowerBump) and f.blend_resolution(grid) < 8:
        warnings.warn("bump blend spans fewer than 8 grid spacings; grid quadrature "
                      "will not match the analytic norm closely", stacklevel=2)
    return f._norm(space, d)


def truncated_mass(f: Family, space: Space, d: int, rho_min: float) -> float:
    """Analytic squared norm carried by frequencies below ``rho_min``."""
    if isinstance(f, InitialData):
        f = f.family
    _weight_exponent(space)
    return f._truncated(space, d, rho_min)


@dataclass(frozen=True)
class MembershipReport:
    """Outcome of a class-membership check.

    ``member`` is None when membership cannot be decided (bump in ``L^r``).
    ``class_norm`` is the sum of the component norms of ``(v₀, v₁)``.
    """

    member: bool | None
    class_norm: float | None
    reasons: tuple[str, ...]


def membership_report(f, dc: DataClass, d: int, mu1: float = 0.0) -> MembershipReport:
    """Check whether the data pair lies in ``dc`` and return its class norm.

    Parameters
    ----------
    f : InitialData or family
        Family in its slot; ``mu1`` applies the damped-wave data map first.
    dc : DataClass
    d : int
    mu1 : float, optional
    """
    data = _as_data(f)
    fam = data.family
    c0, c1 = data.weights(mu1)
    if isinstance(dc, LebesgueClass):
        extra: Space | None = Lr(dc.r)
    elif isinstance(dc, NegSobolevClass):
        extra = HdotNeg(dc.s)
    elif isinstance(dc, EnergyClass):
        extra = None
    else:
        raise TypeError(f"unknown data class {dc!r}")
    try:
        total = 0.0
        if c0:
            total += abs(c0) * math.hypot(fam._norm(L2(), d), fam._norm(Hdot1(), d))
        if c1:
            total += abs(c1) * fam._norm(L2(), d)
        if extra is not None:
            for c in (c0, c1):
                if c:
                    total += abs(c) * fam._norm(extra, d)
    except ValueError as exc:
        if isinstance(extra, Lr) and isinstance(fam, FrequencyPowerBump):
            return MembershipReport(None, None, ("L^r membership of a spectral bump is not decided",))
        return MembershipReport(False, None, (str(exc),))
    return MembershipReport(True, total, ("all component norms finite",))
