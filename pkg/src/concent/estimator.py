"""Sample covariance and sample spectrum of an n x p data matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import eigvals_desc
from .spectrum import Spectrum, SpectrumError, as_data_matrix, validate_spectrum

__all__ = ["CovarianceOptions", "sample_covariance", "sample_spectrum"]


@dataclass(frozen=True)
class CovarianceOptions:
    """``centered=True`` subtracts the column means (population convention, divides by n)."""

    centered: bool = False


def sample_covariance(
    X: ArrayLike, opts: CovarianceOptions | None = None
) -> NDArray[np.float64]:
    opts = opts or CovarianceOptions()
    X = as_data_matrix(X)
    n = X.shape[0]
    if opts.centered and n < 2:
        raise SpectrumError("centered covariance needs at least two samples")
    G = X / np.sqrt(n)
    S = G.T @ G
    if opts.centered:
        col_sum = X.sum(axis=0)
        S = S - np.outer(col_sum, col_sum) / n**2
    return np.triu(S) + np.triu(S, 1).T


def sample_spectrum(X: ArrayLike, opts: CovarianceOptions | None = None) -> Spectrum:
    """Eigenvalues of the sample covariance, clamped and sorted descending.

    The covariance has rank at most n (n - 1 when centered), so the
    trailing ``p - rank`` eigenvalues are set to exactly zero.
    """
    opts = opts or CovarianceOptions()
    X = as_data_matrix(X)
    n, p = X.shape
    w = eigvals_desc(sample_covariance(X, opts))
    rank_bound = n - 1 if opts.centered else n
    if rank_bound < p:
        w[rank_bound:] = 0.0
    return validate_spectrum(w)
