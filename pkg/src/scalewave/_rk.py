"""
Compiled Dormand-Prince 8(5,3) stepper for the mode equation

    y'' + m1/(1+t) y' + (rho² + m2/(1+t)²) y = 0.

Only the 2x2 real fundamental matrix is integrated; complex data are
propagated by multiplying with it afterwards. The Butcher tableau is the
one shipped with scipy.
"""

import warnings

import numba as nb
import numpy as np
from scipy.integrate._ivp import dop853_coefficients as _tab

_A = np.ascontiguousarray(_tab.A[:12, :12])
_B = np.ascontiguousarray(_tab.B)
_C = np.ascontiguousarray(_tab.C[:12])
_E3 = np.ascontiguousarray(_tab.E3)
_E5 = np.ascontiguousarray(_tab.E5)

# numba probes an incompatible system TBB and falls back; the notice is noise
warnings.filterwarnings("ignore", message="The TBB threading layer")

STATUS_OK = 0
STATUS_MAX_STEPS = 1
STATUS_NONFINITE = 2


@nb.njit(cache=True, inline="always")
def _rhs(t, y, rho, m1, m2, out):
    s = 1.0 / (1.0 + t)
    k = rho * rho + m2 * s * s
    for j in range(2):
        out[2 * j] = y[2 * j + 1]
        out[2 * j + 1] = -k * y[2 * j] - m1 * s * y[2 * j + 1]


@nb.njit(cache=True)
def fundamental_one(t0, times, rho, m1, m2, rtol, atol, frac, max_steps, out):
    """Fill ``out[i]`` with the fundamental matrix from t0 to times[i].

    Returns (status, t_reached, steps).
    """
    A, B, C, E3, E5 = _A, _B, _C, _E3, _E5
    n = times.shape[0]
    y = np.array([1.0, 0.0, 0.0, 1.0])
    K = np.empty((13, 4))
    yt = np.empty(4)
    ynew = np.empty(4)
    t = t0
    hmax = frac * 2.0 * np.pi / rho if rho > 0.0 else np.inf
    h = min(hmax, 0.01 * (1.0 + t0))
    errold = 1e-4
    steps = 0
    _rhs(t, y, rho, m1, m2, K[0])
    for i in range(n):
        tend = times[i]
        while t < tend:
            steps += 1
            if steps > max_steps:
                return STATUS_MAX_STEPS, t, steps
            last = False
            if t + h >= tend:
                hh = tend - t
                last = True
            else:
                hh = h
            for s in range(1, 12):
                for q in range(4):
                    acc = 0.0
                    for r in range(s):
                        acc += A[s, r] * K[r, q]
                    yt[q] = y[q] + hh * acc
                _rhs(t + C[s] * hh, yt, rho, m1, m2, K[s])
            for q in range(4):
                acc = 0.0
                for r in range(12):
                    acc += B[r] * K[r, q]
                ynew[q] = y[q] + hh * acc
            _rhs(t + hh, ynew, rho, m1, m2, K[12])
            kk = max(rho, 1.0 / (1.0 + t + hh))
            errn = 0.0
            for j in range(2):
                a_old = np.sqrt(y[2 * j] ** 2 + (y[2 * j + 1] / kk) ** 2)
                a_new = np.sqrt(ynew[2 * j] ** 2 + (ynew[2 * j + 1] / kk) ** 2)
                sc = atol + rtol * max(a_old, a_new)
                a5 = 0.0
                a3 = 0.0
                b5 = 0.0
                b3 = 0.0
                for r in range(13):
                    a5 += E5[r] * K[r, 2 * j]
                    a3 += E3[r] * K[r, 2 * j]
                    b5 += E5[r] * K[r, 2 * j + 1]
                    b3 += E3[r] * K[r, 2 * j + 1]
                e5n = (a5 / sc) ** 2 + (b5 / (kk * sc)) ** 2
                e3n = (a3 / sc) ** 2 + (b3 / (kk * sc)) ** 2
                if e5n == 0.0 and e3n == 0.0:
                    ej = 0.0
                else:
                    ej = hh * e5n / np.sqrt((e5n + 0.01 * e3n) * 2.0)
                errn = max(errn, ej)
            if not np.isfinite(errn):
                return STATUS_NONFINITE, t, steps
            if errn <= 1.0:
                t = tend if last else t + hh
                for q in range(4):
                    y[q] = ynew[q]
                    K[0, q] = K[12, q]
                if errn == 0.0:
                    fac = 5.0
                else:
                    fac = 0.9 * errn ** (-0.7 / 8.0) * errold ** (0.4 / 8.0)
                fac = min(5.0, max(0.2, fac))
                if not last:
                    h = min(hmax, hh * fac)
                errold = max(errn, 1e-4)
            else:
                h = hh * max(0.2, 0.9 * errn ** (-1.0 / 8.0))
        out[i, 0, 0] = y[0]
        out[i, 0, 1] = y[2]
        out[i, 1, 0] = y[1]
        out[i, 1, 1] = y[3]
    return STATUS_OK, t, steps


@nb.njit(cache=True, parallel=True)
def fundamental_many(t0, times, rhos, m1, m2, rtol, atol, frac, max_steps):
    """Fundamental matrices for every frequency in ``rhos``.

    Returns
    -------
    out : (len(rhos), len(times), 2, 2) array
    status : int array
    t_reached : float array
    """
    m = rhos.shape[0]
    out = np.zeros((m, times.shape[0], 2, 2))
    status = np.zeros(m, dtype=np.int64)
    reached = np.zeros(m)
    for k in nb.prange(m):
        st, tr, _ = fundamental_one(
            t0, times, rhos[k], m1, m2, rtol, atol, frac, max_steps, out[k]
        )
        status[k] = st
        reached[k] = tr
    return out, status, reached
