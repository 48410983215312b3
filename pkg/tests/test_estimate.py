"""Tests for covariance estimators, the periodogram and tensor record files."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from estimate.covariance import biased_cov, periodogram, unbiased_cov
from estimate.records import read_tensor, write_tensor
from grid.spec import GridSpec
from grid.transforms import moments
from trigcore.cones import ConeStatus, cone_test_toeplitz_1d
from trigcore.errors import FormatError
from trigcore.index_set import IndexSet


def test_biased_and_unbiased_estimates_of_a_short_record():
    lam = IndexSet.box(1)
    y = np.array([1.0, 2.0, 3.0])
    b = biased_cov(y, lam)
    u = unbiased_cov(y, lam)
    assert b[(0,)] == pytest.approx(14.0 / 3.0)
    assert b[(1,)] == pytest.approx(8.0 / 3.0)
    assert u[(1,)] == pytest.approx(4.0)
    assert u[(0,)] == pytest.approx(14.0 / 3.0)


def test_record_too_short_for_lags():
    with pytest.raises(ValueError, match="too short"):
        biased_cov(np.ones(2), IndexSet.box(2))


def test_two_dimensional_lags_use_the_overlap():
    lam = IndexSet.box(1, 1)
    y = np.arange(12, dtype=float).reshape(3, 4)
    c = biased_cov(y, lam)
    expected = np.sum(y[:2, :3] * y[1:, 1:]) / 12.0
    assert c[(1, 1)] == pytest.approx(expected)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=-5, max_value=5), min_size=6, max_size=20))
def test_biased_estimate_is_a_covariance_sequence(samples):
    y = np.array(samples)
    if np.sum(y * y) < 1e-6:
        return
    c = biased_cov(y, IndexSet.box(3))
    assert cone_test_toeplitz_1d(c) is not ConeStatus.OUTSIDE


def test_unbiased_estimate_can_leave_the_cone():
    y = np.array([1.0, 1.0, -1.0, -1.0])
    c = unbiased_cov(y, IndexSet.box(3))
    assert cone_test_toeplitz_1d(c) is ConeStatus.OUTSIDE


def test_periodogram_moments_equal_biased_covariances():
    rng = np.random.default_rng(4)
    y = rng.standard_normal((6, 5))
    lam = IndexSet.box(2, 2)
    grid = GridSpec((16, 16), offset=False)
    m = moments(periodogram(y, grid), lam)
    np.testing.assert_allclose(m.values, biased_cov(y, lam).values, atol=1e-12)


@pytest.mark.parametrize("name", ["rec.txt", "rec.bin"])
def test_tensor_files_round_trip(tmp_path, name):
    rng = np.random.default_rng(5)
    real = rng.standard_normal((3, 4))
    cplx = real + 1j * rng.standard_normal((3, 4))
    for data in (real, cplx):
        back = read_tensor(write_tensor(data, tmp_path / name))
        assert back.shape == data.shape
        np.testing.assert_array_equal(back, data)


def test_tensor_sample_count_mismatch(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("2 2 2\n1\n2\n3\n", encoding="utf-8")
    with pytest.raises(FormatError):
        read_tensor(path)


def test_biased_estimates_are_nonnegative_on_positive_polynomials():
    # ⟨c, p⟩ is the integral of the periodogram against P, so it cannot be negative
    lam = IndexSet.box(2)
    rng = np.random.default_rng(6)
    for trial in range(100):
        c = biased_cov(rng.standard_normal(12), lam)
        h = rng.standard_normal(3)
        p = np.correlate(h, h, mode="full")
        p[2] += 1e-3
        assert float(np.real(np.vdot(p, c.values))) > 0.0, trial


def test_unbiased_estimates_of_short_records_violate_the_toeplitz_test():
    lam = IndexSet.box(3)
    rng = np.random.default_rng(7)
    outside = 0
    for _ in range(100):
        y = rng.standard_normal(6)
        assert cone_test_toeplitz_1d(biased_cov(y, lam)) is not ConeStatus.OUTSIDE
        if cone_test_toeplitz_1d(unbiased_cov(y, lam)) is ConeStatus.OUTSIDE:
            outside += 1
    assert outside >= 1


def test_unbiased_estimator_has_no_lag_bias():
    # moving average y_t = e_t + 0.8 e_{t-1}: c_0 = 1.64, c_1 = 0.8, c_2 = 0
    lam = IndexSet.box(2)
    rng = np.random.default_rng(8)
    n, reps = 10, 8000
    unbiased = np.zeros(len(lam))
    biased = np.zeros(len(lam))
    for _ in range(reps):
        e = rng.standard_normal(n + 1)
        y = e[1:] + 0.8 * e[:-1]
        unbiased += unbiased_cov(y, lam).values.real / reps
        biased += biased_cov(y, lam).values.real / reps
    assert unbiased[lam.position((1,))] == pytest.approx(0.8, abs=0.045)
    assert unbiased[lam.position((0,))] == pytest.approx(1.64, abs=0.06)
    assert unbiased[lam.position((2,))] == pytest.approx(0.0, abs=0.045)
    # the biased estimate shrinks lag k by (n − |k|)/n
    assert biased[lam.position((1,))] == pytest.approx(0.72, abs=0.045)
