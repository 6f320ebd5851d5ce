"""Numerical kernel: seeded Gaussian draws, symmetric eigensolver, Gram products."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .spectrum import (
    EigenDecomposition,
    NumericalError,
    Spectrum,
    SpectrumError,
    as_data_matrix,
    as_symmetric,
)

__all__ = ["RngState", "eig_sym", "eigvals_desc", "gaussian_matrix", "sandwich"]

_MAX_ELEMENTS = 2**31


@dataclass
class RngState:
    """Position in a family of independent Gaussian streams.

    Every draw is keyed by ``(seed, domain, counter)`` through a Philox
    counter-based generator, so a given triple always produces the same
    numbers and distinct triples never share a stream. ``gaussian_matrix``
    consumes the current counter and increments it.
    """

    seed: int
    counter: int = 0
    domain: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.seed < 2**64:
            raise SpectrumError("seed must be a 64-bit unsigned integer")
        if not 0 <= self.counter < 2**64:
            raise SpectrumError("counter must be a 64-bit unsigned integer")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([self.seed, self.domain, self.counter])
        return np.random.Generator(np.random.Philox(seq))

    def at(self, counter: int) -> RngState:
        return RngState(self.seed, counter, self.domain)


def gaussian_matrix(n: int, p: int, rng: RngState) -> NDArray[np.float64]:
    """n x p matrix of i.i.d. standard normal draws; advances ``rng``."""
    if n < 1 or p < 1:
        raise SpectrumError(f"dimensions must be positive, got {n}x{p}")
    if n * p >= _MAX_ELEMENTS:
        raise SpectrumError(f"{n}x{p} Gaussian matrix is too large")
    out = rng.generator().standard_normal((n, p))
    rng.counter += 1
    return out


def eig_sym(M: ArrayLike) -> EigenDecomposition:
    """Full symmetric eigendecomposition with eigenvalues in descending order.

    Each eigenvector is signed so that its largest-magnitude component is
    positive (first such component on ties).
    """
    A = as_symmetric(M)
    # LAPACK reads one triangle; symmetrise so both agree exactly
    A = 0.5 * (A + A.T)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    lead = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[lead, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    V *= signs
    return EigenDecomposition(w, V)


def eigvals_desc(M: ArrayLike) -> NDArray[np.float64]:
    """Eigenvalues only, descending."""
    A = as_symmetric(M)
    try:
        w = np.linalg.eigvalsh(0.5 * (A + A.T))
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver did not converge: {exc}") from exc
    return w[::-1].copy()


def sandwich(lam: Spectrum | ArrayLike, N: ArrayLike, n: int) -> NDArray[np.float64]:
    """Return ``(1/n) L^{1/2} N^T N L^{1/2}`` with ``L = diag(lam)``.

    Computed as ``G^T G`` with ``G = N L^{1/2} / sqrt(n)``, so the result is
    exactly symmetric.
    """
    lam = np.asarray(lam, dtype=np.float64)
    N = as_data_matrix(N)
    if lam.ndim != 1 or lam.size != N.shape[1]:
        raise SpectrumError(
            f"spectrum length {lam.size} does not match {N.shape[1]} columns"
        )
    if n != N.shape[0]:
        raise SpectrumError(f"n={n} does not match {N.shape[0]} rows")
    if np.any(lam < 0):
        raise SpectrumError("spectrum entries must be nonnegative")
    G = N * (np.sqrt(lam) / np.sqrt(n))
    W = G.T @ G
    # matmul may not use the same summation order for (i,j) and (j,i)
    return np.triu(W) + np.triu(W, 1).T
