"""
Regime map over the damping coefficient
=======================================

For ``mu2 = 0`` and ``d = 3`` the effective mass is ``mu1 (2 - mu1)/4``.
The table lists the Bessel order, the decay budget for ``L^1`` data and
the predicted remainder exponent and log power; rows marked ``-`` fall outside the
range where the scattering remainder is controlled.
"""

import numpy as np

from scalewave import (Coefficients, LebesgueClass, alpha_of, derive_params, predict_dw_rate,
                       predict_remainder_rate)

print(f"{'mu1':>6} {'mu':>8} {'Re nu':>7} {'alpha':>7} {'KG exp':>8} {'log':>5} {'DW exp':>8}")
for mu1 in np.arange(-4.0, 7.5, 0.5):
    p = derive_params(Coefficients(float(mu1), 0.0, 3))
    a = alpha_of(p, 1.0, 3)
    kg = predict_remainder_rate(p, LebesgueClass(1.0), 3)
    dw = predict_dw_rate(p, LebesgueClass(1.0), 3)
    fmt = lambda r: f"{r.exponent:8.3f}" if r.applicable else f"{'-':>8}"  # noqa: E731
    lp = f"{kg.log_power:5.2f}" if kg.applicable else f"{'-':>5}"
    print(f"{mu1:6.1f} {p.mu:8.3f} {p.re_nu:7.3f} {a:7.3f} {fmt(kg)} {lp} {fmt(dw)}")
