"""Membership surrogates for the covariance cone C_+ and the polynomial cone P_+.

Exact membership in C_+ is only decidable in one dimension (Toeplitz
positivity). For d >= 2 the multilevel Toeplitz test is a necessary
condition only, and positivity of polynomials is checked on grid nodes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np
import scipy.linalg

from grid.spec import GridSpec
from grid.transforms import synthesize
from trigcore.sequences import HermitianSeq

CLASSIFY_TOL = 1e-10


class ConeStatus(str, Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    OUTSIDE = "outside"


class Positivity(str, Enum):
    STRICTLY_POSITIVE = "strictly_positive"
    NONNEGATIVE_WITH_ZEROS = "nonnegative_with_zeros"
    NEGATIVE_SOMEWHERE = "negative_somewhere"


@dataclass(frozen=True)
class PositivityReport:
    status: Positivity
    min_value: float
    argmin: Tuple[float, ...]


def _classify(min_eig: float, scale: float, tol: float) -> ConeStatus:
    thr = tol * max(scale, np.finfo(float).tiny)
    if min_eig > thr:
        return ConeStatus.INTERIOR
    if min_eig >= -thr:
        return ConeStatus.BOUNDARY
    return ConeStatus.OUTSIDE


def toeplitz_matrix_1d(c: HermitianSeq) -> np.ndarray:
    lam = c.index_set
    if lam.dim != 1:
        raise ValueError(f"Toeplitz test needs a one-dimensional sequence, got dim={lam.dim}")
    if lam.box_radii is None:
        raise ValueError("Toeplitz test needs a contiguous index set {-n..n}")
    n = lam.max_abs[0]
    col = np.array([c[(-j,)] for j in range(n + 1)])
    row = np.array([c[(j,)] for j in range(n + 1)])
    return scipy.linalg.toeplitz(col, row)


def cone_test_toeplitz_1d(c: HermitianSeq, tol: float = CLASSIFY_TOL) -> ConeStatus:
    """Classify a 1-D sequence by the smallest eigenvalue of its Toeplitz matrix."""
    mat = toeplitz_matrix_1d(c)
    min_eig = float(scipy.linalg.eigvalsh(mat)[0])
    return _classify(min_eig, float(np.max(np.abs(c.values))), tol)


def multilevel_toeplitz(c: HermitianSeq) -> np.ndarray:
    """Matrix ``T[i, j] = c_{j - i}`` over i, j in the nonnegative box {0..n_1}x...x{0..n_d}."""
    radii = c.index_set.box_radii
    if radii is None:
        raise ValueError("Multilevel Toeplitz matrix needs a full-box index set")
    nodes = list(itertools.product(*[range(r + 1) for r in radii]))
    size = len(nodes)
    mat = np.empty((size, size), dtype=np.complex128)
    for i, a in enumerate(nodes):
        for j, b in enumerate(nodes):
            mat[i, j] = c[tuple(bj - aj for aj, bj in zip(a, b))]
    return mat


def cone_test_toeplitz_md(c: HermitianSeq, tol: float = CLASSIFY_TOL) -> ConeStatus:
    """Necessary-condition surrogate for C_+ in any dimension.

    OUTSIDE is conclusive; INTERIOR only means the test found no violation.
    """
    mat = multilevel_toeplitz(c)
    min_eig = float(scipy.linalg.eigvalsh(mat)[0])
    return _classify(min_eig, float(np.max(np.abs(c.values))), tol)


def grid_positivity_test(p: HermitianSeq, grid: GridSpec, tol: float = CLASSIFY_TOL) -> PositivityReport:
    """Classify P(e^{iθ}) on the nodes of ``grid`` and report its minimum."""
    field = synthesize(p, grid)
    vals = field.values
    flat = int(np.argmin(vals))
    idx = np.unravel_index(flat, vals.shape)
    argmin = tuple(float(t) for t in grid.node(idx))
    min_value = float(vals[idx])
    thr = tol * max(float(np.max(np.abs(vals))), np.finfo(float).tiny)
    if min_value > thr:
        status = Positivity.STRICTLY_POSITIVE
    elif min_value >= -thr:
        status = Positivity.NONNEGATIVE_WITH_ZEROS
    else:
        status = Positivity.NEGATIVE_SOMEWHERE
    return PositivityReport(status=status, min_value=min_value, argmin=argmin)
