"""Closed-form solution of a one-dimensional soft problem with a singular part.

Data: Λ = {-1, 0, 1}, c = (c1, 1, c1), prior P(θ) = 1 − cos θ and W = λI.
When c1 > 0 and λ < 2c1 the optimal Q̂ is q0·P, so Q̂ vanishes at θ = 0
and the solution carries an atom of mass β there.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq


@dataclass(frozen=True)
class OracleResult:
    singular: bool
    q0: float
    beta: float

    def q_coefficients(self) -> HermitianSeq:
        """q̂ = q0·(−½, 1, −½); only a solution when ``singular`` is True."""
        return HermitianSeq.from_values(IndexSet.box(1), [-0.5 * self.q0, self.q0, -0.5 * self.q0])


def example_data(c1: float) -> Tuple[HermitianSeq, HermitianSeq]:
    """The covariances (c1, 1, c1) and the prior 1 − cos θ."""
    lam = IndexSet.box(1)
    return (
        HermitianSeq.from_values(lam, [c1, 1.0, c1]),
        HermitianSeq.from_values(lam, [-0.5, 1.0, -0.5]),
    )


def oracle_1d_example(c1: float, lam: float) -> OracleResult:
    if not lam > 0:
        raise ValueError(f"Weight λ must be positive, got {lam}")
    s = lam + c1 - 1.0
    q0 = (s + np.sqrt(6.0 * lam + s * s)) / (3.0 * lam)
    beta = c1 - lam * q0 / 2.0
    return OracleResult(singular=bool(c1 > 0 and lam < 2.0 * c1), q0=float(q0), beta=float(beta))
