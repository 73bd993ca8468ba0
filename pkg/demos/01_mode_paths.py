"""
Two ways to advance a Fourier mode
==================================

For ``mu <= 1/4`` every mode has a closed-form propagator built from
``z^{1/2} J_nu(z)`` and ``z^{1/2} Y_nu(z)``, ``z = (1+t) rho``. The same
matrix can be produced by the adaptive DOP853 integrator. This script
compares the two on a log-spaced set of frequencies and checks the unit
determinant that holds for the undamped equation.
"""

import numpy as np

from scalewave import Coefficients, derive_params, multiplier_matrix
from scalewave.mode_kernel import det2, ode_fundamental, scaled_deviation

rho = np.geomspace(1e-3, 30.0, 9)
times = np.array([1.0, 10.0, 100.0, 1000.0])

print(f"{'mu':>8} {'t':>8} {'max dev':>10} {'max |det-1|':>12}")
for mu in (-2.0, 0.0, 0.1875, 0.25):
    p = derive_params(Coefficients(0.0, mu, 3))
    ode = ode_fundamental(0.0, times, rho, 0.0, mu)          # (rho, t, 2, 2)
    for k, t in enumerate(times):
        exact = multiplier_matrix(t, 0.0, rho, p)
        dev = scaled_deviation(ode[:, k], exact, rho).max()
        det = np.abs(det2(exact) - 1.0).max()
        print(f"{mu:8.4f} {t:8.0f} {dev:10.2e} {det:12.2e}")

# Above mu = 1/4 the order is imaginary and only the ODE path is used.
p = derive_params(Coefficients(0.0, 2.0, 3))
m = ode_fundamental(0.0, times, rho, 0.0, p.mu)
print(f"\nmu = 2 (nu = {p.nu:.4f}): max |det-1| = {np.abs(det2(m) - 1).max():.2e}")
