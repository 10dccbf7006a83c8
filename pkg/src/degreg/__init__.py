"""Pointwise regression under degenerate design densities.

Exact minimax bandwidths and rates for designs whose density vanishes
or explodes at the estimation point, local polynomial estimation with
a data-driven bandwidth, concentration diagnostics, and two-point
lower-bound certificates, driven by a deterministic Monte Carlo
harness and a CLI.
"""
from .design import (DesignModel, DesignSample, explicit_design,
                     explicit_power_log_design, gammavar_design,
                     regvar_design)
from .estimators import (EmptyWindowError, LocalPolyFit, Modulus,
                         build_system, corrected_solve, estimate_adaptive,
                         estimate_at, gamma_two_window, kernel_moment_stat,
                         regressogram, select_bandwidth)
from .harness import (ConfigError, DegenerateInputError, ExperimentConfig,
                      NumericalFailure, RiskEstimate, SlopeFit, derive_seed,
                      fit_exponent, run_concentration, run_lower_bound,
                      run_risk)
from .kernels import KERNELS, Kernel, half_moment, limit_moment
from .rates import (LowerBoundCertificate, NoSolutionError, RateReport,
                    asymptotic_rate, certificate_constant,
                    limit_matrix_lambda, lower_bound_certificate, m_constant,
                    solve_hn)
from .rv_math import (DomainError, GammaVarFn, NonIntegrableError, Primitive,
                      QuadratureError, RegVarFn, generalized_inverse,
                      integrate_shape, invert_power_log,
                      invert_power_log_asymptotic, karamata_ratio_check,
                      lambert_w0, lambert_w0_exp, lambert_wm1, upper_gamma)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # shapes and slow variation
    "RegVarFn", "GammaVarFn", "Primitive", "upper_gamma", "lambert_w0",
    "lambert_wm1", "lambert_w0_exp", "generalized_inverse",
    "invert_power_log", "invert_power_log_asymptotic", "integrate_shape",
    "karamata_ratio_check", "DomainError", "QuadratureError",
    "NonIntegrableError",
    # designs
    "DesignModel", "DesignSample", "regvar_design", "gammavar_design",
    "explicit_design", "explicit_power_log_design",
    # kernels
    "Kernel", "KERNELS", "half_moment", "limit_moment",
    # estimation
    "Modulus", "LocalPolyFit", "build_system", "corrected_solve",
    "select_bandwidth", "estimate_at", "estimate_adaptive", "regressogram",
    "gamma_two_window", "kernel_moment_stat", "EmptyWindowError",
    # rates and bounds
    "RateReport", "LowerBoundCertificate", "solve_hn", "asymptotic_rate",
    "limit_matrix_lambda", "m_constant", "certificate_constant",
    "lower_bound_certificate", "NoSolutionError",
    # harness
    "ExperimentConfig", "RiskEstimate", "SlopeFit", "derive_seed",
    "run_risk", "fit_exponent", "run_concentration", "run_lower_bound",
    "ConfigError", "NumericalFailure", "DegenerateInputError",
]
