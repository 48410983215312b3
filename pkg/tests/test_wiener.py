"""Tests for the threshold covariance map, spectral factors, Wiener models and netpbm files."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from grid.spec import GridField, GridSpec
from solve.config import SolverConfig
from trigcore.errors import FormatError
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix
from wiener.factorization import embed_filter, factorize_spectrum, filter_response
from wiener.images import binarize, read_pnm, write_pbm, write_pgm
from wiener.model import (
    binary_statistics,
    identify,
    load_model,
    model_from_rational,
    save_model,
    synthesize_texture,
)
from wiener.price import estimate_threshold, price_forward, price_inverse, price_range


# -- threshold covariance map ---------------------------------------------------------


def test_price_forward_closed_forms_at_zero_threshold():
    # with τ = 0 the map is arcsin(c)/(2π)
    assert price_forward(1.0, 0.0) == pytest.approx(0.25, abs=1e-12)
    assert price_forward(0.5, 0.0) == pytest.approx(1.0 / 12.0, abs=1e-12)
    assert price_forward(-1.0, 0.0) == pytest.approx(-0.25, abs=1e-12)
    assert price_forward(0.0, 0.7) == 0.0


def test_price_inverse_closed_form():
    assert price_inverse(1.0 / 12.0, 0.0) == pytest.approx(0.5, abs=1e-10)
    assert price_inverse(0.0, 1.3) == 0.0


def test_price_forward_at_full_correlation_is_the_binary_variance():
    tau = 0.8
    mean = 1.0 - 0.7881446014166034  # 1 − Φ(0.8)
    assert price_forward(1.0, tau) == pytest.approx(mean * (1.0 - mean), abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-0.6, max_value=0.95), st.floats(min_value=-1.2, max_value=1.2))
def test_price_inverse_undoes_forward(cx, tau):
    assert price_inverse(price_forward(cx, tau), tau) == pytest.approx(cx, abs=1e-8)


@pytest.mark.parametrize("tau", [0.0, 0.4, -1.1])
def test_price_forward_slope_at_zero_correlation(tau):
    # the slope at c = 0 is the squared Gaussian density at the threshold
    h = 1e-5
    slope = (price_forward(h, tau) - price_forward(-h, tau)) / (2 * h)
    assert slope == pytest.approx(np.exp(-tau * tau) / (2 * np.pi), rel=1e-6)


def test_price_maps_validate_their_domains():
    with pytest.raises(ValueError):
        price_forward(1.1, 0.0)
    lo, hi = price_range(0.5)
    with pytest.raises(ValueError):
        price_inverse(hi + 0.01, 0.5)
    assert price_inverse(lo, 0.5) == -1.0


def test_threshold_from_the_mean():
    y = np.zeros(1_000_000)
    y[:158655] = 1.0
    assert estimate_threshold(y) == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(ValueError):
        estimate_threshold(np.ones(10))


# -- spectral factors ---------------------------------------------------------------------


def test_constant_spectrum_has_a_constant_factor():
    grid = GridSpec.uniform(2, 8)
    h = factorize_spectrum(GridField(grid, np.full(grid.points, 4.0)))
    expected = np.zeros(grid.points)
    expected[0, 0] = 2.0
    np.testing.assert_allclose(h, expected, atol=1e-12)


def test_one_dimensional_factor_is_minimum_phase():
    grid = GridSpec.uniform(1, 64, offset=False)
    (theta,) = grid.nodes()
    phi = np.abs(1.0 - 0.5 * np.exp(1j * theta)) ** 2
    h = factorize_spectrum(GridField(grid, phi))
    expected = np.zeros(64)
    expected[0], expected[1] = 1.0, -0.5
    # the cepstrum passes through log and two FFTs, so rounding sits near 1e-12
    np.testing.assert_allclose(h, expected, atol=1e-8)


def test_factor_reproduces_the_spectrum_on_the_grid():
    grid = GridSpec.uniform(2, 16)
    t1, t2 = grid.nodes()
    phi = 1.0 / (1.2 - 0.5 * np.cos(t1) - 0.3 * np.cos(t1 - t2))
    h = factorize_spectrum(GridField(grid, phi))
    np.testing.assert_allclose(np.abs(filter_response(h, grid)) ** 2, phi, rtol=1e-10)


def test_factorization_rejects_non_positive_spectra():
    grid = GridSpec.uniform(1, 8)
    with pytest.raises(ValueError):
        factorize_spectrum(GridField(grid, np.zeros(8)))


def test_embed_filter_keeps_signed_positions():
    h = np.array([1.0, 0.5, 0.0, -0.25])
    out = embed_filter(h, (8,))
    np.testing.assert_array_equal(out, [1.0, 0.5, 0, 0, 0, 0, 0, -0.25])


# -- Wiener models ----------------------------------------------------------------------------


LAM2 = IndexSet.box(1, 1)


def _rational_model(tau):
    q = np.zeros(len(LAM2))
    q[LAM2.zero_position] = 1.0
    for k, v in (((1, 0), -0.2), ((0, 1), -0.15)):
        q[LAM2.position(k)] = q[LAM2.position(tuple(-x for x in k))] = v
    return model_from_rational(tau, HermitianSeq.unit(LAM2), HermitianSeq(LAM2, q), GridSpec.uniform(2, 64))


def test_model_has_unit_gaussian_variance():
    model = _rational_model(0.3)
    covs = model.gaussian_covariances([(0, 0), (1, 0), (0, 1)])
    assert covs[(0, 0)] == pytest.approx(1.0)
    assert 0.0 < covs[(0, 1)] < covs[(1, 0)] < 1.0
    assert model.cx[(1, 0)] == pytest.approx(covs[(1, 0)], abs=1e-6)


def test_synthesized_texture_matches_predicted_statistics():
    model = _rational_model(0.3)
    lags = [(0, 0), (1, 0), (0, 1), (1, 1)]
    predicted = model.predicted_binary_covariances(lags)
    runs = [binary_statistics(synthesize_texture(model, 256, seed=s), lags) for s in range(8)]
    mean = np.mean([r.mean for r in runs])
    assert mean == pytest.approx(model.predicted_mean, abs=0.01)
    for k in lags:
        measured = np.mean([r.covariances[k] for r in runs])
        se = max(r.standard_errors[k] for r in runs)
        assert abs(measured - predicted[k]) < 3 * se + 1e-3


def test_texture_threshold_extremes():
    assert not np.any(synthesize_texture(_rational_model(10.0), 64, seed=1))
    half = synthesize_texture(_rational_model(0.0), 128, seed=2)
    assert np.mean(half) == pytest.approx(0.5, abs=0.03)
    assert half.dtype == np.uint8


def test_texture_size_must_fit_the_model():
    with pytest.raises(ValueError):
        synthesize_texture(_rational_model(0.3), (16, 16, 16), seed=0)


def test_identify_recovers_threshold_and_correlation_signs():
    truth = _rational_model(0.3)
    texture = synthesize_texture(truth, 256, seed=5)
    model = identify(texture, LAM2, config=SolverConfig(grid=GridSpec.uniform(2, 32)))
    assert model.tau == pytest.approx(0.3, abs=0.05)
    assert model.cx[(1, 0)].real > model.cx[(0, 1)].real > 0.0
    assert model.cx[(0, 0)] == 1.0


@pytest.fixture(scope="module")
def sample_texture():
    return synthesize_texture(_rational_model(0.3), 256, seed=5)


def test_identified_model_reproduces_texture_statistics(sample_texture):
    lags = [(1, 0), (0, 1)]
    model = identify(sample_texture, LAM2, config=SolverConfig(grid=GridSpec.uniform(2, 32)))
    original = binary_statistics(sample_texture, lags)
    runs = [binary_statistics(synthesize_texture(model, 256, seed=s), lags) for s in range(6)]
    # a fresh texture and the original differ by sampling noise on both sides
    spread = np.sqrt(1.0 + 1.0 / len(runs))
    means = [r.mean for r in runs]
    assert abs(original.mean - np.mean(means)) < 3 * np.std(means, ddof=1) * spread + 2e-3
    for k in lags:
        values = [r.covariances[k] for r in runs]
        assert abs(original.covariances[k] - np.mean(values)) < 3 * np.std(values, ddof=1) * spread + 2e-3


def test_white_binary_noise_gives_an_uncorrelated_model():
    rng = np.random.default_rng(12)
    y = (rng.random((256, 256)) < 0.4).astype(np.uint8)
    model = identify(y, LAM2, config=SolverConfig(grid=GridSpec.uniform(2, 32)))
    assert model.tau == pytest.approx(0.253347, abs=0.02)
    for k in [(1, 0), (0, 1), (1, 1), (1, -1)]:
        assert abs(model.cx[k].real) < 0.05
    stats = binary_statistics(synthesize_texture(model, 256, seed=3), [(1, 0), (0, 1)])
    assert all(abs(v) < 0.01 for v in stats.covariances.values())


def test_hard_identification_matches_the_mapped_soft_fit(sample_texture):
    cfg = SolverConfig(grid=GridSpec.uniform(2, 32))
    soft = identify(sample_texture, LAM2, config=cfg)
    hard = identify(sample_texture, LAM2, config=cfg, mode="hard")
    assert hard.tau == soft.tau
    np.testing.assert_allclose(hard.q.values, soft.q.values, atol=1e-5)


def test_hard_identification_with_an_explicit_radius(sample_texture):
    cfg = SolverConfig(grid=GridSpec.uniform(2, 32))
    model = identify(sample_texture, LAM2, WeightMatrix.scalar(1e-3, LAM2), cfg, mode="hard")
    assert model.cx[(1, 0)].real > model.cx[(0, 1)].real > 0.0
    with pytest.raises(ValueError, match="identification mode"):
        identify(sample_texture, LAM2, config=cfg, mode="exact")



def test_model_file_round_trip(tmp_path):
    model = _rational_model(0.3)
    back = load_model(save_model(model, tmp_path / "model.json"))
    assert back.tau == model.tau
    assert back.grid == model.grid
    np.testing.assert_array_equal(back.filter, model.filter)
    np.testing.assert_array_equal(back.q.values, model.q.values)


def test_model_file_must_carry_the_marker(tmp_path):
    path = tmp_path / "other.json"
    path.write_text('{"format": "something-else"}', encoding="utf-8")
    with pytest.raises(FormatError):
        load_model(path)


def test_binary_statistics_of_an_alternating_row():
    stats = binary_statistics(np.array([[1, 0, 1, 0]]), [(0, 0), (0, 1)])
    assert stats.mean == 0.5
    assert stats.covariances[(0, 0)] == pytest.approx(0.25)
    assert stats.covariances[(0, 1)] == pytest.approx(-0.25)


# -- netpbm images ------------------------------------------------------------------------------


def test_bitmap_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    bits = (rng.random((5, 13)) > 0.5).astype(np.uint8)
    np.testing.assert_array_equal(read_pnm(write_pbm(bits, tmp_path / "b.pbm")), bits)


@pytest.mark.parametrize("top", [200, 4000])
def test_graymap_round_trip(tmp_path, top):
    image = np.arange(12).reshape(3, 4) * (top // 11)
    back = read_pnm(write_pgm(image, tmp_path / "g.pgm"))
    np.testing.assert_array_equal(back, image)


def test_graymap_header_comments_are_skipped(tmp_path):
    path = tmp_path / "c.pgm"
    path.write_bytes(b"P5\n# made by hand\n2 1\n255\n" + bytes([7, 9]))
    np.testing.assert_array_equal(read_pnm(path), [[7, 9]])


def test_bad_images_are_rejected(tmp_path):
    wrong = tmp_path / "x.ppm"
    wrong.write_bytes(b"P6\n1 1\n255\n\x00\x00\x00")
    with pytest.raises(FormatError):
        read_pnm(wrong)
    short = tmp_path / "short.pgm"
    short.write_bytes(b"P5\n4 4\n255\n\x00\x01")
    with pytest.raises(FormatError, match="truncated"):
        read_pnm(short)


def test_binarize_uses_the_midpoint():
    image = np.array([[0, 50], [60, 151]])
    np.testing.assert_array_equal(binarize(image), [[0, 0], [0, 1]])
    with pytest.raises(ValueError):
        binarize(np.full((2, 2), 3))
