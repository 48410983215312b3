"""Fast-transform quadrature on uniform torus grids.

All integrals are Riemann sums (1/N^d)·Σ over the grid nodes, which is the
trapezoid rule on the torus and exact for trigonometric polynomials of low
enough degree. Index ``k`` is stored at array position ``k mod N``; on an
offset grid the half-sample shift is absorbed into a phase factor.

Typical usage::

    grid = GridSpec.uniform(1, 512)
    pfield = synthesize(p, grid)
    m = moments(GridField(grid, pfield.values / qfield.values), lam)
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from grid.spec import GridField, GridSpec
from trigcore.index_set import IndexSet
from trigcore.sequences import IMAG_TOL, HermitianSeq

# Relative tolerance for negative samples in a field that should be a density.
DENSITY_TOL = 1e-12


def _positions(index_set: IndexSet, grid: GridSpec) -> Tuple[np.ndarray, ...]:
    arr = index_set.array
    return tuple(np.mod(arr[:, a], grid.points[a]) for a in range(grid.dim))


def _shift_phase(index_array: np.ndarray, grid: GridSpec, sign: float) -> np.ndarray:
    """exp(sign·2πi Σ_j k_j s / N_j) for each row of ``index_array``."""
    if not grid.offset:
        return np.ones(index_array.shape[0], dtype=np.complex128)
    angle = np.zeros(index_array.shape[0])
    for a in range(grid.dim):
        angle += index_array[:, a] * grid.shift / grid.points[a]
    return np.exp(sign * 2j * np.pi * angle)


def signed_frequencies(grid: GridSpec) -> Tuple[np.ndarray, ...]:
    """Meshgrid of signed integer representatives of k mod N (numpy FFT layout)."""
    axes = [np.fft.fftfreq(n, d=1.0 / n).astype(np.int64) for n in grid.points]
    return tuple(np.meshgrid(*axes, indexing="ij"))


def _full_phase(grid: GridSpec, sign: float) -> np.ndarray:
    if not grid.offset:
        return np.ones(grid.points, dtype=np.complex128)
    angle = np.zeros(grid.points)
    for a, k in enumerate(signed_frequencies(grid)):
        angle = angle + k * grid.shift / grid.points[a]
    return np.exp(sign * 2j * np.pi * angle)


def synthesize_array(index_set: IndexSet, values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Complex samples of Σ_k v_k e^{-i(k,θ)} on the grid nodes (no symmetry checks)."""
    buf = np.zeros(grid.points, dtype=np.complex128)
    coeffs = np.asarray(values, dtype=np.complex128) * _shift_phase(index_set.array, grid, -1.0)
    np.add.at(buf, _positions(index_set, grid), coeffs)
    return np.fft.fftn(buf)


def moments_array(values: np.ndarray, index_set: IndexSet, grid: GridSpec) -> np.ndarray:
    """Riemann-sum moments (1/N^d) Σ_t f_t e^{i(k,θ_t)} for every k in Λ."""
    spectrum = np.fft.ifftn(values)
    return spectrum[_positions(index_set, grid)] * _shift_phase(index_set.array, grid, 1.0)


def synthesize(p: HermitianSeq, grid: GridSpec) -> GridField:
    """Evaluate P(e^{iθ}) = Σ p_k e^{-i(k,θ)} on every grid node.

    Raises:
        ValueError: If the grid does not resolve the index set.
    """
    grid.require_resolves(p.index_set)
    samples = synthesize_array(p.index_set, p.values, grid)
    scale = max(1.0, float(np.sum(np.abs(p.values))))
    residual = float(np.max(np.abs(samples.imag))) if samples.size else 0.0
    if residual > IMAG_TOL * scale:
        raise ValueError(f"Synthesized field has imaginary residual {residual:.3e}")
    return GridField(grid=grid, values=samples.real)


def moments(field: GridField, index_set: IndexSet, *, density: bool = True) -> HermitianSeq:
    """Approximate r_k = ∫ e^{i(k,θ)} Φ(θ) dm by the grid Riemann sum.

    Raises:
        ValueError: If ``density`` is set and the field has negative samples
            beyond rounding, or if the grid does not resolve ``index_set``.
    """
    grid = field.grid
    grid.require_resolves(index_set)
    vals = field.values
    if density and vals.size:
        scale = max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
        if float(np.min(vals)) < -DENSITY_TOL * scale:
            raise ValueError(f"Field has negative values (min {float(np.min(vals)):.3e}); not a density")
    raw = moments_array(vals, index_set, grid)
    return HermitianSeq(index_set=index_set, values=raw)


def entropy_like_integral(pfield: GridField, qfield: GridField) -> float:
    """Riemann sum of P·log Q.

    Raises:
        ValueError: If Q is not strictly positive on every node.
    """
    if pfield.grid != qfield.grid:
        raise ValueError("P and Q fields live on different grids")
    q = qfield.values
    if float(np.min(q)) <= 0.0:
        raise ValueError(f"Q must be strictly positive on the grid (min {float(np.min(q)):.3e})")
    return float(np.mean(pfield.values * np.log(q)))


def field_coefficients(values: np.ndarray, grid: GridSpec) -> np.ndarray:
    """All N^d Fourier coefficients of grid samples, in FFT layout.

    Entry at the position of k is (1/N^d) Σ_t f_t e^{i(k,θ_t)} with k the signed
    representative of its residue class.
    """
    return np.fft.ifftn(values) * _full_phase(grid, 1.0)


def field_from_coefficients(coefficients: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Inverse of :func:`field_coefficients` (complex samples)."""
    return np.fft.fftn(np.asarray(coefficients) * _full_phase(grid, -1.0))
