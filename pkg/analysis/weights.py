"""Conversion of weights between the soft and hard formulations.

For a fixed optimal q̂ ≠ e, the soft problem with W_soft and the hard
problem with W_hard have the same solution when
W_soft = W_hard / ‖q̂ − e‖_{W_hard}, equivalently
W_hard = W_soft ‖q̂ − e‖²_{W_soft}.
"""

from __future__ import annotations

import numpy as np

from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix


def _distance(W: WeightMatrix, q_hat: HermitianSeq) -> float:
    d = W.norm(q_hat - HermitianSeq.unit(q_hat.index_set))
    if not d > 0.0:
        raise ValueError("q̂ equals e (trivial solution); the weight map is undefined there")
    return d


def soft_weight_from_hard(W_hard: WeightMatrix, q_hat: HermitianSeq) -> WeightMatrix:
    return W_hard.scaled(1.0 / _distance(W_hard, q_hat))


def hard_weight_from_soft(W_soft: WeightMatrix, q_hat: HermitianSeq) -> WeightMatrix:
    return W_soft.scaled(_distance(W_soft, q_hat) ** 2)


def scalar_hard_from_soft(lam_soft: float, q_hat: HermitianSeq) -> float:
    """λ_hard = λ_soft²‖q̂ − e‖₂² for W = λI."""
    if not lam_soft > 0:
        raise ValueError(f"Scalar weight must be positive, got {lam_soft}")
    d = (q_hat - HermitianSeq.unit(q_hat.index_set)).norm()
    if not d > 0.0:
        raise ValueError("q̂ equals e (trivial solution); the weight map is undefined there")
    return float(lam_soft**2 * d**2)


def scalar_soft_from_hard(lam_hard: float, q_hat: HermitianSeq) -> float:
    if not lam_hard > 0:
        raise ValueError(f"Scalar weight must be positive, got {lam_hard}")
    d = (q_hat - HermitianSeq.unit(q_hat.index_set)).norm()
    if not d > 0.0:
        raise ValueError("q̂ equals e (trivial solution); the weight map is undefined there")
    return float(np.sqrt(lam_hard) / d)
