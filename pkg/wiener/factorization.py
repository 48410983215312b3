"""Approximate spectral factors of positive spectra on a grid.

The factor is the cepstral one: take the Fourier coefficients of log Φ,
keep the half-plane part (k > 0 lexicographically) with half of the
constant term, and exponentiate. Then |H|² = Φ holds exactly at the grid
nodes. In one dimension H is the minimum-phase factor; in higher
dimensions it is a heuristic with no stability claim.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from grid.spec import GridField, GridSpec
from grid.transforms import field_coefficients, field_from_coefficients, signed_frequencies

_IMAG_TOL = 1e-10


def _reflect(values: np.ndarray) -> np.ndarray:
    """Array ``A'`` with ``A'[k] = A[-k]`` in FFT layout."""
    axes = tuple(range(values.ndim))
    return np.roll(np.flip(values, axis=axes), 1, axis=axes)


def half_plane_weights(grid: GridSpec) -> np.ndarray:
    """1 on the positive half-plane, ½ at k = 0 and on self-conjugate frequencies, 0 elsewhere."""
    freqs = signed_frequencies(grid)
    w = np.zeros(grid.points)
    decided = np.zeros(grid.points, dtype=bool)
    for k in freqs:
        w[~decided & (k > 0)] = 1.0
        decided |= k != 0
    w[~decided] = 0.5
    return 0.5 * (w + 1.0 - _reflect(w))


def factorize_spectrum(spectrum: GridField) -> np.ndarray:
    """Coefficients h_k (FFT layout of the spectrum's grid) of a factor with |H|² = Φ.

    Raises:
        ValueError: If a spectrum sample is not strictly positive.
    """
    grid = spectrum.grid
    vals = spectrum.values
    if float(np.min(vals)) <= 0.0:
        raise ValueError(f"Spectrum must be strictly positive to factorize (min {float(np.min(vals)):.3e})")
    cepstrum = field_coefficients(np.log(vals), grid)
    log_h = field_from_coefficients(half_plane_weights(grid) * cepstrum, grid)
    h = field_coefficients(np.exp(log_h), grid)
    if float(np.max(np.abs(h.imag))) <= _IMAG_TOL * max(1.0, float(np.max(np.abs(h)))):
        return h.real
    return h


def embed_filter(filter_coeffs: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Move FFT-layout coefficients to an array of another ``shape`` (signed index mod size)."""
    h = np.asarray(filter_coeffs)
    if h.shape == tuple(shape):
        return h.copy()
    if h.ndim != len(shape):
        raise ValueError(f"Filter has {h.ndim} axes, target shape {tuple(shape)}")
    src = signed_frequencies(GridSpec(points=h.shape, offset=False))
    out = np.zeros(shape, dtype=h.dtype)
    np.add.at(out, tuple(np.mod(k, n).ravel() for k, n in zip(src, shape)), h.ravel())
    return out


def filter_response(filter_coeffs: np.ndarray, grid: GridSpec) -> np.ndarray:
    """H(θ) = Σ_k h_k e^{-i(k,θ)} on the nodes of ``grid``."""
    return field_from_coefficients(embed_filter(filter_coeffs, grid.points), grid)
