"""Damped Newton iteration for the smooth convex duals.

The log term of the duals is a natural barrier for the positivity of Q, so
no explicit constraint handling is needed: each step is cut back to a
fixed fraction of the distance to the boundary of the feasible set and then
shortened further by Armijo backtracking.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Protocol, Tuple

import numpy as np
import scipy.linalg

from solve.config import SolverConfig
from solve.errors import DivergenceError

logger = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


class NewtonProblem(Protocol):
    def evaluate(self, x: np.ndarray, order: int = 2) -> Tuple[float, np.ndarray, np.ndarray]: ...

    def feasible(self, x: np.ndarray) -> bool: ...

    def max_step(self, x: np.ndarray, dx: np.ndarray) -> float: ...

    def scale(self) -> float: ...


@dataclass(frozen=True)
class NewtonResult:
    x: np.ndarray
    value: float
    iterations: int
    grad_norm: float


def newton_direction(hessian: np.ndarray, grad: np.ndarray) -> np.ndarray:
    """Solve H d = −g, adding Levenberg damping while H is not numerically PD."""
    mu = 0.0
    diag_scale = max(1.0, float(np.max(np.abs(np.diag(hessian)))))
    n = hessian.shape[0]
    for _ in range(40):
        try:
            factor = scipy.linalg.cho_factor(hessian + mu * np.eye(n), lower=True, check_finite=True)
        except (np.linalg.LinAlgError, ValueError):
            mu = 1e-10 * diag_scale if mu == 0.0 else mu * 10.0
            continue
        if np.min(np.abs(np.diag(factor[0]))) <= 0.0:
            mu = 1e-10 * diag_scale if mu == 0.0 else mu * 10.0
            continue
        if mu > 0.0:
            logger.debug("[Newton] Hessian regularized with mu=%.3e", mu)
        return -scipy.linalg.cho_solve(factor, grad)
    raise DivergenceError("Newton system could not be factorized; Hessian is not usable")


def _within_kkt(g: np.ndarray, config: SolverConfig, scale: float) -> bool:
    return float(np.linalg.norm(g)) <= config.kkt_tol * scale


def damped_newton(problem: NewtonProblem, x0: np.ndarray, config: SolverConfig, label: str = "Newton") -> NewtonResult:
    """Minimize ``problem`` from the feasible start ``x0``.

    Stops when the gradient max-norm is below ``gradient_tol`` (scaled). Near
    singular optima the Hessian grows with the grid and the gradient floors at
    rounding level above that tolerance, so an iterate whose gradient is within
    ``kkt_tol`` is also accepted once the Newton decrement is negligible or the
    gradient has stopped shrinking for ``stall_iters`` iterations.

    Raises:
        DivergenceError: If the objective becomes non-finite, the iterates leave
            the ``divergence_bound`` box, or the iteration budget is exhausted
            (or the line search stalls) away from an acceptable point.
    """
    x = np.array(x0, dtype=float)
    if not problem.feasible(x):
        raise ValueError(f"[{label}] starting point is not feasible")
    scale = problem.scale()
    tol = config.gradient_tol * scale
    best = np.inf
    stagnant = 0
    gnorm = np.inf
    for it in range(1, config.max_newton_iters + 1):
        f, g, h = problem.evaluate(x, order=2)
        if not (np.isfinite(f) and np.all(np.isfinite(g))):
            raise DivergenceError(f"[{label}] objective is not finite at iteration {it}", it)
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= tol:
            logger.debug("[%s] converged after %d iterations (|g|=%.3e)", label, it - 1, gnorm)
            return NewtonResult(x=x, value=f, iterations=it - 1, grad_norm=gnorm)
        if gnorm < 0.5 * best:
            best, stagnant = gnorm, 0
        else:
            stagnant += 1
        dx = newton_direction(h, g)
        slope = float(g @ dx)
        logger.debug("[%s] iter=%d f=%.15g |g|=%.3e decrement=%.3e", label, it, f, gnorm, -slope)
        if _within_kkt(g, config, scale) and (
            0.5 * -slope <= config.decrement_tol * max(1.0, abs(f)) or stagnant >= config.stall_iters
        ):
            logger.debug("[%s] settled at rounding level after %d iterations (|g|=%.3e)", label, it - 1, gnorm)
            return NewtonResult(x=x, value=f, iterations=it - 1, grad_norm=gnorm)
        alpha = min(1.0, config.boundary_fraction * problem.max_step(x, dx))
        slack = 10.0 * _EPS * max(1.0, abs(f))
        while True:
            candidate = x + alpha * dx
            if problem.feasible(candidate):
                f_new = problem.evaluate(candidate, order=0)[0]
                if f_new <= f + config.armijo * alpha * slope + slack:
                    break
            alpha *= config.backtrack
            if alpha < 1e-16:
                if _within_kkt(g, config, scale):
                    logger.debug("[%s] line search stalled at rounding level (|g|=%.3e)", label, gnorm)
                    return NewtonResult(x=x, value=f, iterations=it - 1, grad_norm=gnorm)
                raise DivergenceError(f"[{label}] line search stalled at iteration {it} (|g|={gnorm:.3e})", it)
        x = candidate
        if float(np.max(np.abs(x))) > config.divergence_bound:
            raise DivergenceError(
                f"[{label}] iterates diverged (|x|∞ > {config.divergence_bound:g}) at iteration {it}", it
            )
    f, g, _ = problem.evaluate(x, order=1)
    gnorm = float(np.max(np.abs(g)))
    if gnorm <= tol or _within_kkt(g, config, scale):
        if gnorm > tol:
            logger.warning("[%s] iteration budget spent; accepting |g|=%.3e within kkt_tol", label, gnorm)
        return NewtonResult(x=x, value=f, iterations=config.max_newton_iters, grad_norm=gnorm)
    raise DivergenceError(
        f"[{label}] no convergence within {config.max_newton_iters} iterations (|g|={gnorm:.3e})",
        config.max_newton_iters,
    )
