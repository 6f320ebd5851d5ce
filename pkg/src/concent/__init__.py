"""Covariance spectrum recovery by random optimisation with eigenvector correction."""

__version__ = "0.1.0"

from .estimator import CovarianceOptions, sample_covariance, sample_spectrum
from .linalg import RngState, eig_sym, gaussian_matrix, sandwich
from .metrics import ErrorReport, spectrum_error
from .recovery import eigenvector_correction, l2_ratio_fit, naive_ratio_estimate, ratio_vector, run
from .spectrum import (
    ConcentConfig,
    ConcentrationReport,
    EigenDecomposition,
    Norm,
    NumericalError,
    RecoveryResult,
    Spectrum,
    SpectrumError,
    validate_spectrum,
)

__all__ = [
    "ConcentConfig",
    "ConcentrationReport",
    "CovarianceOptions",
    "EigenDecomposition",
    "ErrorReport",
    "Norm",
    "NumericalError",
    "RecoveryResult",
    "RngState",
    "Spectrum",
    "SpectrumError",
    "eig_sym",
    "eigenvector_correction",
    "gaussian_matrix",
    "l2_ratio_fit",
    "naive_ratio_estimate",
    "ratio_vector",
    "run",
    "sample_covariance",
    "sample_spectrum",
    "sandwich",
    "spectrum_error",
    "validate_spectrum",
]
