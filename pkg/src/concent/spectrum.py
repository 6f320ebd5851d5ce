"""Shared value types: spectra, configs and result containers."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

__all__ = [
    "ConcentConfig",
    "ConcentrationReport",
    "EigenDecomposition",
    "Norm",
    "NumericalError",
    "RecoveryResult",
    "Spectrum",
    "SpectrumError",
    "as_data_matrix",
    "as_symmetric",
    "validate_spectrum",
]

# relative threshold below which negative eigenvalues count as round-off
CLAMP_TOL = 1e-10
SYMMETRY_TOL = 1e-12


class SpectrumError(ValueError):
    """Invalid spectrum, matrix or configuration input."""


class NumericalError(RuntimeError):
    """Numerical breakdown (non-convergence, non-finite iterate)."""


def _frozen(values: ArrayLike) -> NDArray[np.float64]:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Nonnegative eigenvalues sorted in non-increasing order."""

    values: NDArray[np.float64]

    def __post_init__(self) -> None:
        arr = _frozen(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise SpectrumError("spectrum must be a non-empty vector")
        if not np.all(np.isfinite(arr)):
            raise SpectrumError("spectrum entries must be finite")
        if np.any(arr < 0):
            raise SpectrumError("spectrum entries must be nonnegative")
        if np.any(np.diff(arr) > 0):
            raise SpectrumError("spectrum must be sorted in non-increasing order")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    def __iter__(self):
        return iter(self.values.tolist())

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Spectrum):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __hash__(self) -> int:
        return hash(self.values.tobytes())

    def __repr__(self) -> str:
        return f"Spectrum({self.values.tolist()!r})"

    @property
    def p(self) -> int:
        return self.values.size

    def scaled(self, c: float) -> Spectrum:
        if c < 0:
            raise SpectrumError("scale factor must be nonnegative")
        return Spectrum(self.values * c)

    def tolist(self) -> list[float]:
        return self.values.tolist()


def validate_spectrum(raw: ArrayLike) -> Spectrum:
    """Clamp round-off negatives to zero and sort descending.

    Entries below ``-1e-10 * max(raw)`` are treated as a genuinely
    indefinite input and rejected.
    """
    arr = np.array(raw, dtype=np.float64).ravel()
    if arr.size == 0:
        raise SpectrumError("spectrum must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise SpectrumError("spectrum entries must be finite")
    threshold = -CLAMP_TOL * max(float(arr.max()), 0.0)
    if np.any(arr < threshold):
        raise SpectrumError(
            f"negative eigenvalue {float(arr.min())!r} below clamp threshold "
            f"{threshold!r}; input is not positive semidefinite"
        )
    arr = np.where(arr < 0, 0.0, arr)
    return Spectrum(np.sort(arr)[::-1])


def as_data_matrix(X: ArrayLike) -> NDArray[np.float64]:
    """Return ``X`` as a finite float64 n x p array."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise SpectrumError("data matrix must be two-dimensional")
    n, p = arr.shape
    if n < 1 or p < 1:
        raise SpectrumError(f"data matrix must have n >= 1 and p >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise SpectrumError("data matrix entries must be finite")
    return arr


def as_symmetric(M: ArrayLike) -> NDArray[np.float64]:
    arr = np.asarray(M, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise SpectrumError("expected a non-empty square matrix")
    if not np.all(np.isfinite(arr)):
        raise SpectrumError("matrix entries must be finite")
    scale = float(np.max(np.abs(arr)))
    if np.max(np.abs(arr - arr.T)) > SYMMETRY_TOL * scale:
        raise SpectrumError("matrix is not symmetric")
    return arr


class EigenDecomposition(NamedTuple):
    """Eigenvalues in non-increasing order; ``vectors[:, j]`` pairs with ``eigenvalues[j]``."""

    eigenvalues: NDArray[np.float64]
    vectors: NDArray[np.float64]


class Norm(str, enum.Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"


@dataclass(frozen=True)
class ConcentConfig:
    sample_count: int
    loops: int = 10
    avg_k: int = 10
    seed: int = 0
    norm: Norm = Norm.L2
    ratio_floor: float = 1e-12

    def __post_init__(self) -> None:
        if self.sample_count < 1:
            raise SpectrumError("sample_count must be >= 1")
        if self.loops < 1:
            raise SpectrumError("loops must be >= 1")
        if self.avg_k < 1:
            raise SpectrumError("avg_k must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise SpectrumError("seed must be a 64-bit unsigned integer")
        if not self.ratio_floor > 0:
            raise SpectrumError("ratio_floor must be positive")
        object.__setattr__(self, "norm", Norm(self.norm))

    def as_dict(self) -> dict:
        return {
            "sample_count": self.sample_count,
            "loops": self.loops,
            "avg_k": self.avg_k,
            "seed": self.seed,
            "norm": self.norm.value,
            "ratio_floor": self.ratio_floor,
        }


@dataclass(frozen=True)
class RecoveryResult:
    recovered: Spectrum
    iterates: tuple[Spectrum, ...]
    config_echo: ConcentConfig

    def __post_init__(self) -> None:
        if len(self.iterates) != self.config_echo.loops:
            raise SpectrumError("one iterate per loop is required")
        if self.iterates[-1] != self.recovered:
            raise SpectrumError("recovered spectrum must equal the last iterate")


@dataclass(frozen=True, eq=False)
class ConcentrationReport:
    """Per-index statistics of repeated sample spectra.

    ``max_abs_deviation`` holds, per repetition, the sup-norm distance of
    that draw's sample spectrum from the empirical mean, divided by
    ``spectral_norm_reference`` (zero when the reference is zero).
    """

    reps: int
    per_index_mean: NDArray[np.float64]
    per_index_std: NDArray[np.float64]
    max_abs_deviation: NDArray[np.float64]
    spectral_norm_reference: float
    n: int = field(default=0)

    def __post_init__(self) -> None:
        for name in ("per_index_mean", "per_index_std", "max_abs_deviation"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if np.any(self.per_index_std < 0):
            raise SpectrumError("standard deviations must be nonnegative")
        if self.max_abs_deviation.size != self.reps:
            raise SpectrumError("one deviation per repetition is required")

