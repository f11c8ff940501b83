"""Multilevel Monte Carlo for parabolic problems with jump coefficients."""

from ._jmlmc import (
    ConfigError,
    Error,
    IoError,
    NumericalError,
    build_schedule,
    default_config,
    fit_loglog_slope,
    matern_cov,
    mlmc_estimate,
    normalize_config,
    sample_field,
    solve_path,
    triangulate,
)

__all__ = [
    "ConfigError",
    "Error",
    "IoError",
    "NumericalError",
    "build_schedule",
    "default_config",
    "fit_loglog_slope",
    "matern_cov",
    "mlmc_estimate",
    "normalize_config",
    "sample_field",
    "solve_path",
    "triangulate",
]
