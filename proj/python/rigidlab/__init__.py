"""Zeros of Gaussian analytic functions and finite Ginibre spectra.

Thin layer over the compiled core; see ``rigidlab._core`` for the full list.
"""

from ._core import (
    ConstraintError,
    DomainError,
    InfeasibleError,
    IoError,
    MixingError,
    __version__,
    default_config,
    derive_seed,
    elem_sym,
    elem_sym_log_abs,
    expansion_identity_residual,
    experiments,
    gaf_cond_logdensity,
    gaf_from_coefficients,
    gaf_log_D,
    ginibre_cond_logdensity,
    power_sums,
    reciprocal_series_g,
    run_experiment,
    sample_gaf,
    sample_ginibre,
    split,
    x_n,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
