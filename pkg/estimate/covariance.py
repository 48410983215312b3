"""Covariance estimators for data records on the lattice box Z^d_N.

Both estimators use the zero-extension convention y_t = 0 outside the box.
The biased estimate equals the Fourier coefficients of the periodogram and is
therefore always a bona fide covariance sequence; the unbiased one is not.

Typical usage::

    lam = IndexSet.box(2, 2)
    c = biased_cov(y, lam)
    phi = periodogram(y, GridSpec.uniform(2, 64, offset=False))
"""

from __future__ import annotations

import logging
from typing import Tuple

import numpy as np

from grid.spec import GridField, GridSpec
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq

logger = logging.getLogger(__name__)


def _as_record(data: np.ndarray, index_set: IndexSet) -> np.ndarray:
    y = np.asarray(data)
    if not (np.issubdtype(y.dtype, np.number)):
        raise ValueError("Data record must be numeric")
    y = y.astype(np.complex128 if np.iscomplexobj(y) else float)
    if y.ndim != index_set.dim:
        raise ValueError(f"Data record has {y.ndim} axes, index set has dimension {index_set.dim}")
    if not np.all(np.isfinite(y)):
        raise ValueError("Data record contains non-finite samples")
    for axis, (n, m) in enumerate(zip(y.shape, index_set.max_abs)):
        if n <= m:
            raise ValueError(
                f"Record too short on axis {axis}: {n} samples cannot support lags up to {m}"
            )
    return y


def _overlap(shape: Tuple[int, ...], k: Tuple[int, ...]) -> Tuple[Tuple[slice, ...], Tuple[slice, ...]]:
    """Slices selecting y_t and y_{t+k} over the t where both lie in the box."""
    first, second = [], []
    for n, kj in zip(shape, k):
        if kj >= 0:
            first.append(slice(0, n - kj))
            second.append(slice(kj, n))
        else:
            first.append(slice(-kj, n))
            second.append(slice(0, n + kj))
    return tuple(first), tuple(second)


def _lagged_sums(y: np.ndarray, index_set: IndexSet) -> np.ndarray:
    sums = np.empty(len(index_set), dtype=np.complex128)
    for i, k in enumerate(index_set.exponents):
        a, b = _overlap(y.shape, k)
        sums[i] = np.sum(y[a] * np.conj(y[b]))
    return sums


def biased_cov(data: np.ndarray, index_set: IndexSet) -> HermitianSeq:
    """c_k = (1/Π N_j) Σ_t y_t conj(y_{t+k})."""
    y = _as_record(data, index_set)
    sums = _lagged_sums(y, index_set)
    return HermitianSeq(index_set=index_set, values=sums / float(np.prod(y.shape)))


def unbiased_cov(data: np.ndarray, index_set: IndexSet) -> HermitianSeq:
    """c_k = (1/Π (N_j − |k_j|)) Σ_t y_t conj(y_{t+k})."""
    y = _as_record(data, index_set)
    sums = _lagged_sums(y, index_set)
    divisors = np.prod(np.array(y.shape)[None, :] - np.abs(index_set.array), axis=1).astype(float)
    if np.any(divisors <= 0):
        raise ValueError("Zero divisor in unbiased estimate; record too short for the index set")
    return HermitianSeq(index_set=index_set, values=sums / divisors)


def periodogram(data: np.ndarray, grid: GridSpec) -> GridField:
    """Φ(θ) = (1/Π N_j) |Σ_t y_t e^{i(t,θ)}|² sampled on the grid nodes."""
    y = np.asarray(data, dtype=np.complex128)
    if y.ndim != grid.dim:
        raise ValueError(f"Data record has {y.ndim} axes, grid has dimension {grid.dim}")
    idx = np.indices(y.shape)
    phase = np.zeros(y.shape)
    for a in range(grid.dim):
        phase = phase + idx[a] * grid.shift / grid.points[a]
    weighted = y * np.exp(2j * np.pi * phase)
    folded = np.zeros(grid.points, dtype=np.complex128)
    np.add.at(folded, tuple(np.mod(idx[a], grid.points[a]) for a in range(grid.dim)), weighted)
    transform = np.fft.ifftn(folded) * grid.size
    values = np.abs(transform) ** 2 / float(np.prod(y.shape))
    logger.debug("[Periodogram] record %s on grid %s", y.shape, grid.points)
    return GridField(grid=grid, values=values)
