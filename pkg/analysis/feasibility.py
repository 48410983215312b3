"""Empirical bracket of the smallest feasible hard-constraint radius.

With W = λI the hard problem is solvable iff √λ is at least the distance
from c to the closed covariance cone. That distance is not computable
exactly for d ≥ 2, so it is bracketed by solving at trial values of λ.
"""

from __future__ import annotations

import logging
from typing import Optional, Sequence, Tuple

from solve.config import SolverConfig
from solve.dual_solvers import solve_hard
from solve.errors import NoSolutionError
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix

logger = logging.getLogger(__name__)


def hard_feasibility_bracket(
    c: HermitianSeq,
    p: HermitianSeq,
    lambdas: Sequence[float],
    config: Optional[SolverConfig] = None,
) -> Tuple[Optional[float], Optional[float]]:
    """Return (largest infeasible λ, smallest feasible λ) among ``lambdas``.

    Either end is None when no trial value fell on that side. Trials run in
    increasing order and stop at the first feasible one.
    """
    values = sorted(float(v) for v in lambdas)
    if not values or values[0] <= 0:
        raise ValueError("lambdas must be a non-empty list of positive numbers")
    lower: Optional[float] = None
    for lam in values:
        try:
            solve_hard(c, p, WeightMatrix.scalar(lam, c.index_set), config)
        except NoSolutionError:
            logger.info("[Bracket] λ=%.6g infeasible", lam)
            lower = lam
            continue
        logger.info("[Bracket] λ=%.6g feasible", lam)
        return lower, lam
    return lower, None
