"""Synthetic spectra, data generation, concentration studies and Marchenko-Pastur curves."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, TypeVar, Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, optimize

from .estimator import sample_spectrum
from .linalg import RngState, gaussian_matrix
from .spectrum import ConcentrationReport, Spectrum, SpectrumError, validate_spectrum

__all__ = [
    "Constant",
    "Linear",
    "Power",
    "SparseLinear",
    "SpectrumShape",
    "Step",
    "concentration_study",
    "generate_spectrum",
    "mp_atom",
    "mp_bin_masses",
    "mp_cdf",
    "mp_density",
    "mp_edges",
    "mp_histogram_tv",
    "mp_quantile",
    "parallel_map",
    "synthesize_data",
    "worker_count",
]

T = TypeVar("T")
R = TypeVar("R")

# rng domains, so data draws never share a stream with the recovery draws
DATA_DOMAIN = 1
STUDY_DOMAIN = 2


def _nonneg(name: str, value: float) -> None:
    if not (math.isfinite(value) and value >= 0):
        raise SpectrumError(f"{name} must be finite and nonnegative, got {value!r}")


@dataclass(frozen=True)
class Constant:
    value: float

    def __post_init__(self) -> None:
        _nonneg("value", self.value)


@dataclass(frozen=True)
class Linear:
    """``lo + j*(hi - lo)/p`` for j = 1..p."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        _nonneg("lo", self.lo)
        _nonneg("hi", self.hi)
        if self.hi < self.lo:
            raise SpectrumError("linear shape needs hi >= lo")


@dataclass(frozen=True)
class Power:
    """``(j*x_hi/p)**exponent`` for j = 1..p."""

    exponent: float
    x_hi: float = 5.0

    def __post_init__(self) -> None:
        _nonneg("exponent", self.exponent)
        _nonneg("x_hi", self.x_hi)


@dataclass(frozen=True)
class Step:
    """Constant blocks given as ``(value, count)`` pairs."""

    blocks: tuple[tuple[float, int], ...]

    def __post_init__(self) -> None:
        blocks = tuple((float(v), int(c)) for v, c in self.blocks)
        if not blocks:
            raise SpectrumError("step shape needs at least one block")
        for v, c in blocks:
            _nonneg("step value", v)
            if c < 0:
                raise SpectrumError("step counts must be nonnegative")
        object.__setattr__(self, "blocks", blocks)


@dataclass(frozen=True)
class SparseLinear:
    """Linear on (0, hi] with the smallest ``floor(zero_fraction*p)`` entries zeroed."""

    hi: float
    zero_fraction: float = 0.5

    def __post_init__(self) -> None:
        _nonneg("hi", self.hi)
        if not 0 <= self.zero_fraction <= 1:
            raise SpectrumError("zero_fraction must lie in [0, 1]")


SpectrumShape = Union[Constant, Linear, Power, Step, SparseLinear]


def generate_spectrum(shape: SpectrumShape, p: int) -> Spectrum:
    if p < 1:
        raise SpectrumError("p must be >= 1")
    j = np.arange(1, p + 1, dtype=np.float64)
    if isinstance(shape, Constant):
        values = np.full(p, shape.value)
    elif isinstance(shape, Linear):
        values = shape.lo + j * (shape.hi - shape.lo) / p
    elif isinstance(shape, Power):
        values = (j * shape.x_hi / p) ** shape.exponent
    elif isinstance(shape, Step):
        total = sum(c for _, c in shape.blocks)
        if total != p:
            raise SpectrumError(f"step counts sum to {total}, expected p={p}")
        values = np.concatenate([np.full(c, v) for v, c in shape.blocks])
    elif isinstance(shape, SparseLinear):
        values = np.sort(j * shape.hi / p)[::-1]
        zeros = math.floor(shape.zero_fraction * p)
        if zeros:
            values[p - zeros:] = 0.0
    else:
        raise SpectrumError(f"unknown spectrum shape {shape!r}")
    return validate_spectrum(values)


def synthesize_data(
    true_spectrum: Spectrum | ArrayLike, n: int, rng: RngState
) -> NDArray[np.float64]:
    """n x p Gaussian data whose population covariance is ``diag(true_spectrum)``."""
    lam = np.asarray(true_spectrum, dtype=np.float64)
    if n < 1:
        raise SpectrumError("n must be >= 1")
    N = gaussian_matrix(n, lam.size, rng)
    return N * np.sqrt(lam)


def worker_count() -> int:
    """Thread cap from ``CONCENT_THREADS``; 0 or unset means all CPUs."""
    raw = os.environ.get("CONCENT_THREADS", "").strip()
    try:
        cap = int(raw) if raw else 0
    except ValueError:
        cap = 0
    return cap if cap > 0 else (os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    """Order-preserving map over a thread pool sized by :func:`worker_count`."""
    items = list(items)
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def concentration_study(
    true_spectrum: Spectrum | ArrayLike,
    n: int,
    reps: int,
    rng: RngState,
) -> ConcentrationReport:
    """Draw ``reps`` sample spectra of size n and summarise their spread.

    Repetition r uses rng counter ``rng.counter + r``; ``rng`` itself is
    advanced past all of them.
    """
    if reps < 2:
        raise SpectrumError("reps must be >= 2")
    lam = np.asarray(true_spectrum, dtype=np.float64)
    start = rng.counter

    def one(r: int) -> NDArray[np.float64]:
        X = synthesize_data(lam, n, rng.at(start + r))
        return sample_spectrum(X).values

    draws = np.array(parallel_map(one, range(reps)))
    rng.counter = start + reps

    mean = np.array([math.fsum(col) for col in draws.T]) / reps
    centred = draws - mean
    std = np.sqrt(np.array([math.fsum(col) for col in (centred * centred).T]) / (reps - 1))
    ref = float(lam.max())
    dev = np.abs(centred).max(axis=1)
    dev = dev / ref if ref > 0 else np.zeros(reps)
    return ConcentrationReport(
        reps=reps,
        per_index_mean=mean,
        per_index_std=std,
        max_abs_deviation=dev,
        spectral_norm_reference=ref,
        n=n,
    )


def _check_ratio(c: float) -> None:
    if not (math.isfinite(c) and c > 0):
        raise SpectrumError(f"aspect ratio c must be positive, got {c!r}")


def mp_edges(c: float) -> tuple[float, float]:
    """Support ``((1 - sqrt c)^2, (1 + sqrt c)^2)`` of the unit-variance law."""
    _check_ratio(c)
    r = math.sqrt(c)
    return (1.0 - r) ** 2, (1.0 + r) ** 2


def mp_atom(c: float) -> float:
    """Point mass at zero, ``1 - 1/c`` when c > 1 and 0 otherwise."""
    _check_ratio(c)
    return max(0.0, 1.0 - 1.0 / c)


def mp_density(x, c: float):
    """Absolutely continuous part of the Marchenko-Pastur density.

    For c > 1 it integrates to ``1/c``; the rest is :func:`mp_atom`.
    Accepts scalars or arrays.
    """
    a, b = mp_edges(c)
    xs = np.asarray(x, dtype=np.float64)
    inside = (xs > a) & (xs < b) & (xs > 0)
    safe = np.where(inside, xs, 1.0)
    dens = np.where(
        inside,
        np.sqrt(np.clip((b - safe) * (safe - a), 0.0, None)) / (2 * math.pi * c * safe),
        0.0,
    )
    return float(dens) if dens.ndim == 0 else dens


def _mp_mass(lo: float, hi: float, c: float) -> float:
    a, b = mp_edges(c)
    lo, hi = max(lo, a), min(hi, b)
    if hi <= lo:
        return 0.0
    # sqrt-type singularities at the edges (and 1/sqrt at 0 when c = 1)
    val, _ = integrate.quad(mp_density, lo, hi, args=(c,), limit=200, epsabs=1e-12, epsrel=1e-10)
    return val


def mp_cdf(x: float, c: float) -> float:
    if x < 0:
        return 0.0
    a, _ = mp_edges(c)
    return mp_atom(c) + _mp_mass(a, x, c)


def mp_quantile(q: float, c: float) -> float:
    """Smallest x with ``mp_cdf(x) >= q``."""
    if not 0 <= q <= 1:
        raise SpectrumError("quantile level must lie in [0, 1]")
    a, b = mp_edges(c)
    atom = mp_atom(c)
    if q <= atom:
        return 0.0
    if q >= 1:
        return b
    return optimize.brentq(lambda x: mp_cdf(x, c) - q, a, b, xtol=1e-12)


def mp_bin_masses(bin_edges: Sequence[float], c: float) -> NDArray[np.float64]:
    """Marchenko-Pastur probability of each half-open bin, atom included."""
    edges = np.asarray(bin_edges, dtype=np.float64)
    masses = np.array([_mp_mass(lo, hi, c) for lo, hi in zip(edges[:-1], edges[1:])])
    atom = mp_atom(c)
    if atom > 0:
        k = np.searchsorted(edges, 0.0, side="right") - 1
        if 0 <= k < masses.size:
            masses[k] += atom
    return masses


def mp_histogram_tv(eigenvalues: ArrayLike, c: float, bins: int = 20) -> float:
    """Total-variation distance between an eigenvalue histogram and the MP law.

    Bins are equal-width over the union of the MP support and the data range.
    """
    ev = np.asarray(eigenvalues, dtype=np.float64).ravel()
    a, b = mp_edges(c)
    lo = min(0.0 if mp_atom(c) > 0 else a, float(ev.min()))
    hi = max(b, float(ev.max()))
    edges = np.linspace(lo, hi, bins + 1)
    counts, _ = np.histogram(ev, bins=edges)
    empirical = counts / ev.size
    return 0.5 * float(np.abs(empirical - mp_bin_masses(edges, c)).sum())
