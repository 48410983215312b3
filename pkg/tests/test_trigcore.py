"""Tests for exponent sets, Hermitian sequences, weights, cone surrogates and coefficient files."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grid.spec import GridSpec
from trigcore.cones import (
    ConeStatus,
    Positivity,
    cone_test_toeplitz_1d,
    cone_test_toeplitz_md,
    grid_positivity_test,
)
from trigcore.errors import FormatError, IndexSetMismatchError
from trigcore.formats import read_coefficients, read_weight, write_coefficients, write_weight
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq, eval_poly, inner_product
from trigcore.weights import WeightMatrix


def test_box_is_lexicographic_with_zero_in_the_middle():
    lam = IndexSet.box(1, 1)
    assert lam.exponents[0] == (-1, -1)
    assert lam.exponents[-1] == (1, 1)
    assert lam.exponents[lam.zero_position] == (0, 0)
    assert len(lam) == 9


def test_reflection_maps_each_exponent_to_its_negative():
    lam = IndexSet.box(2, 1)
    for i, k in enumerate(lam.exponents):
        assert lam.exponents[lam.reflection[i]] == tuple(-v for v in k)


def test_index_set_requires_symmetry_and_origin():
    with pytest.raises(ValueError):
        IndexSet.from_exponents([(0,), (1,)])
    with pytest.raises(ValueError):
        IndexSet.from_exponents([(-1,), (1,)])


def test_box_radii_detects_non_box_sets():
    assert IndexSet.box(2, 1).box_radii == (2, 1)
    sparse = IndexSet.from_exponents([(-2, 0), (0, 0), (2, 0)])
    assert sparse.box_radii is None


def test_difference_layout_matches_exponent_differences():
    lam = IndexSet.box(1, 1)
    diff, layout = lam.difference_layout()
    assert diff == IndexSet.box(2, 2)
    for l, kl in enumerate(lam.exponents):
        for k, kk in enumerate(lam.exponents):
            assert diff.exponents[layout[l, k]] == tuple(a - b for a, b in zip(kl, kk))


def test_hermitian_seq_rejects_asymmetric_values():
    lam = IndexSet.box(1)
    with pytest.raises(ValueError):
        HermitianSeq.from_values(lam, [1.0, 2.0, 3.0])
    seq = HermitianSeq.from_values(lam, [0.5 - 0.25j, 1.0, 0.5 + 0.25j])
    assert seq[(1,)] == 0.5 + 0.25j


def test_inner_product_with_unit_returns_dc():
    lam = IndexSet.box(2)
    c = HermitianSeq.from_values(lam, [0.1, 0.3 - 0.2j, 2.0, 0.3 + 0.2j, 0.1])
    assert inner_product(c, HermitianSeq.unit(lam)) == pytest.approx(2.0)
    assert c.dc == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-10, max_value=10), min_size=9, max_size=9))
def test_real_coordinates_round_trip(xs):
    lam = IndexSet.box(2, 1)
    # |Λ| = 15, so 15 real coordinates; pad the drawn values deterministically
    x = np.resize(np.array(xs), 15)
    seq = HermitianSeq.from_real(lam, x)
    np.testing.assert_allclose(seq.to_real(), x, atol=1e-12)


def test_eval_poly_matches_cosine_form():
    lam = IndexSet.box(1)
    p = HermitianSeq.from_values(lam, [-0.5, 1.0, -0.5])
    for theta in (0.0, 0.7, np.pi):
        assert eval_poly(p, [theta]) == pytest.approx(1.0 - np.cos(theta))


def test_scalar_weight_norms():
    lam = IndexSet.box(1)
    W = WeightMatrix.scalar(4.0, lam)
    x = HermitianSeq.from_values(lam, [0.0, 1.0, 0.0])
    assert W.norm(x) == pytest.approx(2.0)
    assert W.inv_norm(x) == pytest.approx(0.5)
    assert W.scalar_value() == pytest.approx(4.0)
    np.testing.assert_allclose(W.inv_sqrt(), 0.5 * np.eye(3), atol=1e-14)


def test_weight_must_be_positive_definite():
    lam = IndexSet.box(1)
    with pytest.raises(ValueError):
        WeightMatrix(lam, np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(ValueError):
        WeightMatrix.scalar(0.0, lam)


def test_weight_must_respect_reflection():
    lam = IndexSet.box(1)
    with pytest.raises(ValueError):
        WeightMatrix(lam, np.diag([1.0, 2.0, 3.0]))
    W = WeightMatrix.symmetrized(np.diag([1.0, 2.0, 3.0]), lam)
    np.testing.assert_allclose(W.entries, 2.0 * np.eye(3))


def test_weight_maps_hermitian_to_hermitian():
    lam = IndexSet.box(1)
    rng = np.random.default_rng(3)
    a = rng.standard_normal((3, 3))
    W = WeightMatrix.symmetrized(a @ a.T + 3 * np.eye(3), lam)
    x = HermitianSeq.from_values(lam, [0.2 - 0.1j, 1.0, 0.2 + 0.1j])
    W.apply(x)  # raises if the result is not Hermitian


def test_toeplitz_cone_classification_1d():
    lam = IndexSet.box(1)
    assert cone_test_toeplitz_1d(HermitianSeq.from_values(lam, [0.5, 1.0, 0.5])) is ConeStatus.INTERIOR
    assert cone_test_toeplitz_1d(HermitianSeq.from_values(lam, [1.0, 1.0, 1.0])) is ConeStatus.BOUNDARY
    assert cone_test_toeplitz_1d(HermitianSeq.from_values(lam, [1.5, 1.0, 1.5])) is ConeStatus.OUTSIDE


def test_multilevel_toeplitz_flags_non_covariances():
    lam = IndexSet.box(1, 1)
    e = HermitianSeq.unit(lam)
    assert cone_test_toeplitz_md(e) is ConeStatus.INTERIOR
    bad = np.zeros(9)
    bad[lam.zero_position] = 1.0
    bad[lam.position((1, 0))] = bad[lam.position((-1, 0))] = 2.0
    assert cone_test_toeplitz_md(HermitianSeq(lam, bad)) is ConeStatus.OUTSIDE


def test_grid_positivity_report():
    lam = IndexSet.box(1)
    grid = GridSpec.uniform(1, 64, offset=False)
    p = HermitianSeq.from_values(lam, [-0.5, 1.0, -0.5])
    report = grid_positivity_test(p, grid)
    assert report.status is Positivity.NONNEGATIVE_WITH_ZEROS
    assert report.argmin == pytest.approx((0.0,))
    neg = HermitianSeq.from_values(lam, [-1.0, 1.0, -1.0])
    assert grid_positivity_test(neg, grid).status is Positivity.NEGATIVE_SOMEWHERE


def test_coefficient_file_round_trip(tmp_path):
    lam = IndexSet.box(1, 2)
    rng = np.random.default_rng(0)
    vals = rng.standard_normal(len(lam)) + 1j * rng.standard_normal(len(lam))
    vals = 0.5 * (vals + np.conj(vals[lam.reflection]))
    seq = HermitianSeq(lam, vals)
    path = write_coefficients(seq, tmp_path / "c.txt")
    back = read_coefficients(path)
    assert back.index_set == lam
    np.testing.assert_array_equal(back.values, seq.values)


def test_coefficient_file_rejects_wrong_order(tmp_path):
    path = tmp_path / "bad.txt"
    path.write_text("1 1\n1 0.5 0\n0 1 0\n-1 0.5 0\n", encoding="utf-8")
    with pytest.raises(FormatError):
        read_coefficients(path)


def test_weight_file_round_trip_and_size_check(tmp_path):
    lam = IndexSet.box(1)
    W = WeightMatrix.scalar(0.25, lam)
    path = write_weight(W, tmp_path / "w.txt")
    np.testing.assert_array_equal(read_weight(path, lam).entries, W.entries)
    with pytest.raises(IndexSetMismatchError):
        read_weight(path, IndexSet.box(2))
