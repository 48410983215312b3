"""Sufficient conditions for existence and for the absence of a singular part.

Typical usage::

    bound = singular_free_bound(c, p, WeightMatrix.scalar(3.0, lam))
    if bound.guaranteed:
        ...   # the soft solution has no atoms
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Dict

import numpy as np
import scipy.linalg

from trigcore.cones import ConeStatus, cone_test_toeplitz_1d, cone_test_toeplitz_md
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix

logger = logging.getLogger(__name__)

# largest |Λ| for which ‖·‖_{2,1} is computed exactly by sign enumeration
MAX_ENUMERATION = 20
_CHUNK = 1 << 14


@dataclass(frozen=True)
class SingularFreeBound:
    guaranteed: bool
    margin: float
    lhs: float
    rhs: float
    exact_norm: bool


def norm_2_to_1(matrix: np.ndarray) -> tuple[float, bool]:
    """Induced norm max_{‖x‖₂=1} ‖Ax‖₁ and whether it is exact.

    For real A the value is max over sign vectors s of ‖Aᵀs‖₂, enumerated
    for up to ``MAX_ENUMERATION`` rows. Otherwise √n·‖A‖₂ is returned, an
    upper bound.
    """
    a = np.asarray(matrix)
    n = a.shape[0]
    if np.iscomplexobj(a) and np.max(np.abs(a.imag)) <= 1e-14 * max(1.0, float(np.max(np.abs(a)))):
        a = a.real
    if np.iscomplexobj(a) or n > MAX_ENUMERATION:
        return float(np.sqrt(n) * np.linalg.norm(a, 2)), False
    at = a.T
    best = 0.0
    # s and -s give the same norm, so the first sign is fixed
    signs = itertools.product((1.0, -1.0), repeat=n - 1)
    while True:
        block = np.array(list(itertools.islice(signs, _CHUNK)))
        # with one row the only sign vector is empty, so count rows, not entries
        if len(block) == 0:
            break
        full = np.hstack((np.ones((len(block), 1)), block.reshape(len(block), n - 1)))
        best = max(best, float(np.max(np.linalg.norm(full @ at, axis=1))))
    return best, True


def singular_free_bound(c: HermitianSeq, p: HermitianSeq, W: WeightMatrix) -> SingularFreeBound:
    """Check ‖W^{-1/2}‖_{2,1} < 1/‖c − p‖_{W⁻¹}.

    When it holds, the soft-constrained solution is absolutely continuous.
    The condition is only sufficient. ``margin`` is right minus left side
    and is +inf when c = p.
    """
    c.index_set.require_same(p.index_set, "covariances and prior")
    lhs, exact = norm_2_to_1(W.inv_sqrt())
    mismatch = W.inv_norm(c - p)
    rhs = np.inf if mismatch == 0.0 else 1.0 / mismatch
    margin = float(rhs - lhs)
    logger.debug("[Bound] ‖W^-1/2‖_2,1=%.6g (exact=%s), 1/‖c-p‖=%.6g", lhs, exact, rhs)
    return SingularFreeBound(guaranteed=bool(lhs < rhs), margin=margin, lhs=lhs, rhs=float(rhs), exact_norm=exact)


def sufficient_hard_existence(c: HermitianSeq, W: WeightMatrix | np.ndarray) -> bool:
    """True iff W − cc* is positive definite.

    Then 0 is an interior point of the constraint set and the hard problem
    has a solution; in that case c*W⁻¹c < 1 as well.
    """
    mat = W.entries if isinstance(W, WeightMatrix) else np.asarray(W, dtype=np.complex128)
    v = c.values.reshape(-1, 1)
    diff = mat - v @ v.conj().T
    diff = 0.5 * (diff + diff.conj().T)
    scale = max(1.0, float(np.max(np.abs(mat))))
    holds = bool(scipy.linalg.eigvalsh(diff)[0] > 1e-12 * scale)
    if holds:
        quad = float(np.real(np.vdot(c.values, scipy.linalg.solve(mat, c.values, assume_a="her"))))
        if not quad < 1.0:
            raise RuntimeError(f"W > cc* holds but c*W^-1 c = {quad:.6g} >= 1; weight matrix is ill-conditioned")
    return holds


def cone_report(c: HermitianSeq) -> Dict[str, str]:
    """Results of the available covariance-cone surrogates for ``c``.

    Only the one-dimensional Toeplitz test is conclusive; the multilevel
    test can prove that c lies outside the cone but not inside.
    """
    lam = c.index_set
    report: Dict[str, str] = {}
    if lam.box_radii is None:
        report["multilevel_toeplitz"] = "unavailable (index set is not a full box)"
        return report
    if lam.dim == 1:
        report["toeplitz_1d"] = cone_test_toeplitz_1d(c).value
    status = cone_test_toeplitz_md(c)
    report["multilevel_toeplitz"] = status.value
    report["conclusive"] = str(lam.dim == 1 or status is ConeStatus.OUTSIDE).lower()
    return report
