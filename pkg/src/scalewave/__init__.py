"""Spectral simulator for waves with scale-invariant damping and mass."""

from .params import (Coefficients, DerivedParams, EnergyClass, LebesgueClass, NegSobolevClass,
                     RatePrediction, alpha_of, derive_params, gamma_of, predict_dw_rate,
                     predict_remainder_rate, predict_solution_bound)
from .spectral import RadialGrid, SpectralState, read_trajectory, write_trajectory
from .mode_kernel import (BesselPair, ModeState, StepLimitError, ToleranceSpec, bessel_jy, e_pair,
                          free_wave_matrix, multiplier_matrix, ode_propagate_dw, ode_propagate_kg)
from .initial_data import (FrequencyPowerBump, GaussianPhysical, Hdot1, HdotNeg, InitialData, L2, Lr,
                           analytic_norms, membership_report, sample_spectrum)
from .analysis import (FitResult, NormSeries, check_remainder_little_o, energy,
                       energy_identity_residual, fit_decay_exponent, identity_times, state_norms,
                       verify_little_o, verify_nondecay)
from .propagator import (ScatteringResult, duhamel_residual, evolve, evolve_dw,
                         extract_scattering_state, free_evolve, liouville_forward,
                         liouville_inverse, phase_roundoff, remainder_series, trajectory,
                         zone_norms, zone_split)

__version__ = "0.1.0"

__all__ = [
    "Coefficients", "DerivedParams", "EnergyClass", "LebesgueClass", "NegSobolevClass",
    "RatePrediction", "alpha_of", "derive_params", "gamma_of", "predict_dw_rate",
    "predict_remainder_rate", "predict_solution_bound",
    "RadialGrid", "SpectralState", "read_trajectory", "write_trajectory",
    "BesselPair", "ModeState", "StepLimitError", "ToleranceSpec", "bessel_jy", "e_pair",
    "free_wave_matrix", "multiplier_matrix", "ode_propagate_dw", "ode_propagate_kg",
    "FrequencyPowerBump", "GaussianPhysical", "Hdot1", "HdotNeg", "InitialData", "L2", "Lr",
    "analytic_norms", "membership_report", "sample_spectrum",
    "FitResult", "NormSeries", "check_remainder_little_o", "energy", "energy_identity_residual",
    "fit_decay_exponent", "identity_times", "state_norms", "verify_little_o", "verify_nondecay",
    "ScatteringResult", "duhamel_residual", "evolve", "evolve_dw", "extract_scattering_state",
    "free_evolve", "liouville_forward", "liouville_inverse", "phase_roundoff",
    "remainder_series", "trajectory", "zone_norms", "zone_split",
]
