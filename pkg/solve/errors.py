from __future__ import annotations

from typing import Optional


class SolverError(RuntimeError):
    """Base class for failures of the dual solvers."""


class DivergenceError(SolverError):
    """Newton iterates grew without bound or the line search stalled.

    For exact and soft matching this means the data lie outside (or too
    close to the boundary of) the covariance cone for the chosen grid.
    """

    def __init__(self, message: str, iterations: int = 0) -> None:
        super().__init__(message)
        self.iterations = iterations


class NoSolutionError(SolverError):
    """The hard-constrained problem has no solution for the given (c, W)."""

    def __init__(self, message: str, sufficient_condition: Optional[bool] = None) -> None:
        if sufficient_condition is not None:
            verdict = "holds" if sufficient_condition else "does not hold"
            message = f"{message} (sufficient existence condition W > cc* {verdict})"
        super().__init__(message)
        self.sufficient_condition = sufficient_condition


class SingularFitError(SolverError):
    """Atoms found on the grid do not reproduce the singular moments."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(message)
        self.residual = residual
