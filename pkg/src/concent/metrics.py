"""Rank-aligned error measures between spectra."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .spectrum import Spectrum, SpectrumError, validate_spectrum

__all__ = ["ErrorReport", "spectrum_error"]


@dataclass(frozen=True, eq=False)
class ErrorReport:
    l1: float
    l2: float
    linf: float
    rel_l2: Optional[float]
    per_index: NDArray[np.float64]

    def as_dict(self) -> dict:
        return {
            "l1": self.l1,
            "l2": self.l2,
            "linf": self.linf,
            "rel_l2": self.rel_l2,
        }


def spectrum_error(estimate: Spectrum | ArrayLike, truth: Spectrum | ArrayLike) -> ErrorReport:
    """Compare two spectra eigenvalue-by-eigenvalue in descending order.

    ``rel_l2`` is ``None`` when ``truth`` is identically zero.
    """
    est = estimate if isinstance(estimate, Spectrum) else validate_spectrum(estimate)
    ref = truth if isinstance(truth, Spectrum) else validate_spectrum(truth)
    if est.p != ref.p:
        raise SpectrumError(f"length mismatch: {est.p} vs {ref.p}")
    diff = est.values - ref.values
    l2 = float(np.linalg.norm(diff))
    ref_norm = float(np.linalg.norm(ref.values))
    return ErrorReport(
        l1=float(np.abs(diff).sum()),
        l2=l2,
        linf=float(np.abs(diff).max()),
        rel_l2=l2 / ref_norm if ref_norm > 0 else None,
        per_index=diff,
    )
