import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concent.estimator import CovarianceOptions, sample_covariance, sample_spectrum
from concent.linalg import RngState, gaussian_matrix
from concent.spectrum import SpectrumError

CENTERED = CovarianceOptions(centered=True)


def test_zero_matrix():
    assert np.array_equal(sample_covariance(np.zeros((5, 3))), np.zeros((3, 3)))


def test_scaled_identity():
    n = 6
    np.testing.assert_allclose(sample_covariance(np.sqrt(n) * np.eye(n)), np.eye(n), atol=1e-15)
    np.testing.assert_allclose(sample_spectrum(np.sqrt(n) * np.eye(n)).values, np.ones(n), atol=1e-14)


def test_centered_population_variance():
    X = np.array([[1.0], [3.0]])
    assert sample_covariance(X, CENTERED)[0, 0] == pytest.approx(1.0, abs=1e-15)


def test_centered_needs_two_rows():
    with pytest.raises(SpectrumError):
        sample_covariance(np.ones((1, 2)), CENTERED)


def test_rejects_non_finite():
    with pytest.raises(SpectrumError):
        sample_covariance(np.array([[1.0, np.nan]]))


def test_wishart_bulk_and_edge():
    X = gaussian_matrix(100, 100, RngState(42))
    s = sample_spectrum(X).values
    assert 0.8 < s.mean() < 1.2
    assert 3.0 < s[0] < 5.0


@pytest.mark.parametrize("n,p", [(2, 3), (3, 7), (5, 5), (10, 4)])
def test_rank_deficiency_zeros(n, p):
    X = gaussian_matrix(n, p, RngState(n * 100 + p))
    s = sample_spectrum(X).values
    assert np.count_nonzero(s == 0) == max(0, p - n)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 20), st.integers(1, 20), st.floats(0.1, 10))
def test_trace_and_scale_equivariance(seed, n, p, c):
    X = np.random.default_rng(seed).standard_normal((n, p))
    s = sample_spectrum(X).values
    tr = np.trace(sample_covariance(X))
    assert abs(s.sum() - tr) <= 1e-10 * max(tr, 1e-300) + 1e-300
    np.testing.assert_allclose(sample_spectrum(c * X).values, c**2 * s, rtol=1e-9, atol=1e-10 * c**2 * s[0])


def test_constant_column_gives_zero_when_centered():
    rng = np.random.default_rng(3)
    X = np.column_stack([rng.standard_normal(50), np.full(50, 7.0), rng.standard_normal(50)])
    s = sample_spectrum(X, CENTERED).values
    assert s[-1] <= 1e-10 * s[0]
