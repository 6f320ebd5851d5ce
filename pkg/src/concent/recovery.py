"""Concent spectrum recovery.

Each loop simulates sample spectra from the current estimate, fits the
per-rank bias ratios to the observed sample spectrum in closed form, and
then replaces the estimate by the diagonal of ``V diag(sample) V^T`` where
``V`` diagonalises a covariance simulated from the fitted spectrum.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .linalg import RngState, eig_sym, eigvals_desc, gaussian_matrix, sandwich
from .spectrum import (
    ConcentConfig,
    Norm,
    NumericalError,
    RecoveryResult,
    Spectrum,
    SpectrumError,
    validate_spectrum,
)

__all__ = [
    "eigenvector_correction",
    "l2_ratio_fit",
    "naive_ratio_estimate",
    "ratio_vector",
    "run",
]


def _as_spectrum(s: Spectrum | ArrayLike) -> Spectrum:
    return s if isinstance(s, Spectrum) else validate_spectrum(s)


def _unit_scale(lam: NDArray[np.float64]) -> NDArray[np.float64]:
    """Divide by the power of two nearest below ``max(lam)``.

    The simulated spectra only depend on ``lam`` up to scale; dividing by a
    power of two is exact, so scaling the input by ``2**k`` leaves every
    simulated quantity bit-identical.
    """
    top = float(lam.max())
    if top <= 0:
        return lam
    _, exp = np.frexp(top)
    return np.ldexp(lam, -int(exp))


def ratio_vector(
    lambda_est: Spectrum | ArrayLike,
    n: int,
    rng: RngState,
    floor: float = 1e-12,
) -> NDArray[np.float64]:
    """Simulated sample spectrum from ``lambda_est`` divided elementwise by it.

    Ranks where ``lambda_est`` is at or below ``floor * max(lambda_est)``
    get ratio exactly 1, as does every rank of an all-zero estimate. A
    Gaussian matrix is drawn (and ``rng`` advanced) in every case.
    """
    if n < 1:
        raise SpectrumError("n must be >= 1")
    if not floor > 0:
        raise SpectrumError("floor must be positive")
    lam = _unit_scale(_as_spectrum(lambda_est).values)
    N = gaussian_matrix(n, lam.size, rng)
    simulated = eigvals_desc(sandwich(lam, N, n))
    ratio = np.ones_like(lam)
    top = lam[0]
    if top > 0:
        live = lam > floor * top
        ratio[live] = np.maximum(simulated[live], 0.0) / lam[live]
    return ratio


def _stack_ratios(sample: Spectrum, ratios: Sequence[ArrayLike]) -> NDArray[np.float64]:
    if len(ratios) < 1:
        raise SpectrumError("at least one ratio vector is required")
    R = np.array([np.asarray(r, dtype=np.float64) for r in ratios])
    if R.ndim != 2 or R.shape[1] != sample.p:
        raise SpectrumError(
            f"ratio vectors must all have length {sample.p}"
        )
    if not np.all(np.isfinite(R)) or np.any(R < 0):
        raise SpectrumError("ratio vectors must be finite and nonnegative")
    return R


def l2_ratio_fit(sample: Spectrum | ArrayLike, ratios: Sequence[ArrayLike]) -> Spectrum:
    """Closed-form minimiser of ``sum_k ||sample - R_k * d||_2^2`` over d.

    ``d_j = sample_j * sum_k R_kj / sum_k R_kj**2``; ranks with
    ``sum_k R_kj**2 == 0`` keep ``sample_j``.
    """
    sample = _as_spectrum(sample)
    R = _stack_ratios(sample, ratios)
    num = R.sum(axis=0)
    den = (R * R).sum(axis=0)
    d = sample.values.copy()
    ok = den > 0
    d[ok] = sample.values[ok] * num[ok] / den[ok]
    return validate_spectrum(d)


def naive_ratio_estimate(
    sample: Spectrum | ArrayLike, ratios: Sequence[ArrayLike]
) -> NDArray[np.float64]:
    """``sample_j * mean_k R_kj``, the plain ratio average.

    Kept only for comparison. It multiplies by the mean bias ratio rather
    than dividing by it, so it is not a de-biased estimate. Returned
    unsorted because it is not guaranteed to be a spectrum ordering.
    """
    sample = _as_spectrum(sample)
    R = _stack_ratios(sample, ratios)
    return sample.values * R.mean(axis=0)


def eigenvector_correction(
    lambda_i: Spectrum | ArrayLike,
    sample: Spectrum | ArrayLike,
    n: int,
    rng: RngState,
) -> Spectrum:
    """Diagonal of ``V diag(sample) V^T``, V from a covariance simulated at ``lambda_i``.

    The result is a doubly-stochastic average of ``sample`` and so has the
    same sum.
    """
    lam = _as_spectrum(lambda_i)
    sample = _as_spectrum(sample)
    if lam.p != sample.p:
        raise SpectrumError("lambda_i and sample lengths differ")
    if n < 1:
        raise SpectrumError("n must be >= 1")
    N = gaussian_matrix(n, lam.p, rng)
    _, V = eig_sym(sandwich(_unit_scale(lam.values), N, n))
    # diag(V S V^T)_i = sum_j V_ij^2 s_j
    corrected = (V * V) @ sample.values
    if not np.all(np.isfinite(corrected)):
        raise NumericalError("eigenvector correction produced non-finite values")
    return validate_spectrum(corrected)


def run(sample: Spectrum | ArrayLike, config: ConcentConfig) -> RecoveryResult:
    """Recover the population spectrum from an observed sample spectrum.

    ``config.sample_count`` must be the n that produced ``sample``. Loop i
    uses rng counters ``i*(K+1) + k`` for the K ratio draws and
    ``i*(K+1) + K`` for the eigenvector-correction draw.
    """
    if config.norm is not Norm.L2:
        raise NotImplementedError(f"only the l2 objective is implemented, got {config.norm.value}")
    sample = _as_spectrum(sample)
    n, K = config.sample_count, config.avg_k
    base = RngState(config.seed)

    current = sample
    iterates: list[Spectrum] = []
    for i in range(config.loops):
        offset = i * (K + 1)
        ratios = [
            ratio_vector(current, n, base.at(offset + k), config.ratio_floor)
            for k in range(K)
        ]
        fitted = l2_ratio_fit(sample, ratios)
        current = eigenvector_correction(fitted, sample, n, base.at(offset + K))
        iterates.append(current)
    return RecoveryResult(current, tuple(iterates), config)
