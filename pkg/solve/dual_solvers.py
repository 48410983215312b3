"""Exact, soft-constrained and hard-constrained covariance matching.

Each solver minimizes the corresponding discretized dual with damped Newton,
recovers the primal quantities (r̂, ĉ, the singular atoms) and attaches a
KKT residual report.

Typical usage::

    lam = IndexSet.box(1)
    c = HermitianSeq.from_values(lam, [0.5, 1.0, 0.5])
    p = HermitianSeq.from_values(lam, [-0.5, 1.0, -0.5])
    sol = solve_soft(c, p, WeightMatrix.scalar(0.5, lam))
    sol.atoms        # [Atom(theta=(0.0,), mass=0.2113...)]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from analysis.bounds import sufficient_hard_existence
from grid.spec import GridField, GridSpec
from grid.transforms import synthesize_array
from solve.config import SolverConfig
from solve.errors import DivergenceError, NoSolutionError
from solve.kkt import KKTReport, kkt_report
from solve.newton import damped_newton
from solve.objectives import DualObjective, HardDualObjective
from solve.singular import Atom, recover_singular, split_measure
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverDiagnostics:
    iterations: int
    grad_norm: float
    min_q_grid: float
    primal_value: float
    dual_value: float
    duality_gap: float
    singular_branch: bool = False
    boundary_shift: float = 0.0


@dataclass(frozen=True, eq=False)
class DualSolution:
    """Optimal dual polynomial and the primal quantities recovered from it."""

    mode: str
    q_hat: HermitianSeq
    r_hat: HermitianSeq
    c_hat: HermitianSeq
    p: HermitianSeq
    grid: GridSpec
    diagnostics: SolverDiagnostics
    gamma: Optional[float] = None
    atoms: List[Atom] = field(default_factory=list)
    atom_residual: float = 0.0
    q_boundary: Optional[HermitianSeq] = None
    kkt: Optional[KKTReport] = None

    def __post_init__(self) -> None:
        if self.q_boundary is None:
            object.__setattr__(self, "q_boundary", self.q_hat)

    @property
    def index_set(self) -> IndexSet:
        return self.q_hat.index_set

    def spectrum(self, grid: Optional[GridSpec] = None) -> GridField:
        """Absolutely continuous part P/Q̂ sampled on ``grid`` (default: solver grid)."""
        g = grid or self.grid
        lam = self.index_set
        qf = synthesize_array(lam, self.q_hat.values, g).real
        if float(np.min(qf)) <= 0.0:
            raise ValueError("Q̂ is not positive on the requested grid; use an offset grid")
        pf = np.maximum(synthesize_array(lam, self.p.values, g).real, 0.0)
        return GridField(grid=g, values=pf / qf)


def resolve_grid(index_set: IndexSet, config: SolverConfig) -> GridSpec:
    """Grid from the config, or the default one made fine enough for the Hessian."""
    diff_set, _ = index_set.difference_layout()
    if config.grid is not None:
        config.grid.require_resolves(diff_set)
        return config.grid
    default = GridSpec.for_index_set(index_set)
    points = tuple(max(n, 2 * m + 1) for n, m in zip(default.points, diff_set.max_abs))
    return GridSpec(points=points, offset=True)


def _primal_value(
    mode: str, pfield: np.ndarray, qf: np.ndarray, r_hat: HermitianSeq, c: HermitianSeq, p: HermitianSeq, W
) -> float:
    value = float(np.mean(pfield * np.log(qf))) + r_hat.dc - p.dc
    if mode == "soft":
        value += 0.5 * W.inv_quad(r_hat - c)
    return value


def _finish(
    mode: str,
    problem: DualObjective,
    q_hat: HermitianSeq,
    r_hat: HermitianSeq,
    gamma: Optional[float],
    dual_value: float,
    iterations: int,
    grad_norm: float,
    config: SolverConfig,
    label: str,
) -> DualSolution:
    c, p, W, grid = problem.c, problem.p, problem.weight, problem.grid
    qf = problem.q_field(q_hat)
    split = split_measure(r_hat, q_hat, p, grid, config)
    atoms: List[Atom] = []
    atom_residual = 0.0
    if split.singular_branch:
        part = recover_singular(r_hat, split.c_hat, split.q_boundary, grid, config, strict=False)
        atoms, atom_residual = part.atoms, part.residual
    primal = _primal_value(mode, problem.pfield, qf, r_hat, c, p, W)
    diagnostics = SolverDiagnostics(
        iterations=iterations,
        grad_norm=grad_norm,
        min_q_grid=float(np.min(qf)),
        primal_value=primal,
        dual_value=dual_value,
        duality_gap=primal + dual_value,
        singular_branch=split.singular_branch,
        boundary_shift=split.boundary_shift,
    )
    solution = DualSolution(
        mode=mode,
        q_hat=q_hat,
        r_hat=r_hat,
        c_hat=split.c_hat,
        p=p,
        grid=grid,
        diagnostics=diagnostics,
        gamma=gamma,
        atoms=atoms,
        atom_residual=atom_residual,
        q_boundary=split.q_boundary,
    )
    report = kkt_report(solution, c, p, W, mode, tol=config.kkt_tol)
    logger.info(
        "[%s] %d iterations, |g|=%.2e, min Q=%.3e, |ĉ|=%.3e, atoms=%d",
        label, iterations, grad_norm, diagnostics.min_q_grid, split.c_hat.norm(), len(atoms),
    )
    return replace(solution, kkt=report)


def solve_exact(c: HermitianSeq, p: HermitianSeq, config: Optional[SolverConfig] = None) -> DualSolution:
    """Exact covariance matching: minimize ⟨c, q⟩ − ∫ P log Q dm.

    Raises:
        DivergenceError: If c is outside (or numerically on the boundary of)
            the covariance cone for the chosen grid.
    """
    cfg = config or SolverConfig.from_env()
    grid = resolve_grid(c.index_set, cfg)
    problem = DualObjective(c, p, grid, None)
    result = damped_newton(problem, problem.start(), cfg, "Exact")
    q_hat = problem.to_seq(result.x)
    return _finish("exact", problem, q_hat, c, None, result.value - c.dc, result.iterations, result.grad_norm, cfg, "Exact")


def solve_soft(
    c: HermitianSeq, p: HermitianSeq, W: WeightMatrix, config: Optional[SolverConfig] = None
) -> DualSolution:
    """Soft-constrained matching: minimize ⟨c, q⟩ − ∫ P log Q dm + ½‖q − e‖²_W.

    The fitted covariances are r̂ = c + W(q̂ − e).
    """
    cfg = config or SolverConfig.from_env()
    grid = resolve_grid(c.index_set, cfg)
    problem = DualObjective(c, p, grid, W)
    result = damped_newton(problem, problem.start(), cfg, "Soft")
    q_hat = problem.to_seq(result.x)
    r_hat = c + W.apply(q_hat - problem.e)
    return _finish("soft", problem, q_hat, r_hat, None, result.value - c.dc, result.iterations, result.grad_norm, cfg, "Soft")


def _trivial_hard(problem: HardDualObjective, config: SolverConfig) -> DualSolution:
    e = problem.e
    return _finish("hard", problem, e, problem.p, 0.0, 0.0, 0, 0.0, config, "Hard")


def solve_hard(
    c: HermitianSeq, p: HermitianSeq, W: WeightMatrix, config: Optional[SolverConfig] = None
) -> DualSolution:
    """Hard-constrained matching: minimum divergence subject to ‖r − c‖_{W⁻¹} ≤ 1.

    If the prior already satisfies the constraint it is returned unchanged.
    Otherwise the joint dual φ(q, γ) is minimized; the start is the
    minimizer over q for the fixed γ₀ = 0.1·‖c − p‖_W, which is a soft
    problem with weight W/(2γ₀).

    Raises:
        NoSolutionError: If the iterates diverge, which happens when the
            constraint ball does not meet the closed covariance cone.
    """
    cfg = config or SolverConfig.from_env()
    grid = resolve_grid(c.index_set, cfg)
    problem = HardDualObjective(c, p, grid, W)
    mismatch = W.inv_norm(p - c)
    if mismatch <= 1.0:
        logger.info("[Hard] prior inside the constraint set (‖p − c‖_W⁻¹ = %.6g); trivial solution", mismatch)
        return _trivial_hard(problem, cfg)

    gamma0 = max(0.1 * W.norm(c - p), 1e-8)
    warm = DualObjective(c, p, grid, W.scaled(1.0 / (2.0 * gamma0)))
    try:
        start = damped_newton(warm, warm.start(), cfg, "Hard/start")
        x0 = start.x
        gamma_start = 0.5 * W.norm(warm.to_seq(x0) - problem.e)
        if not gamma_start > 0.0:
            gamma_start = gamma0
        result = damped_newton(problem, np.concatenate((x0, [gamma_start])), cfg, "Hard")
    except DivergenceError as exc:
        exists = sufficient_hard_existence(c, W)
        logger.warning("[Hard] no solution: %s", exc)
        raise NoSolutionError(
            "Hard-constrained problem has no solution: the constraint ball does not meet the covariance cone "
            f"({exc})",
            sufficient_condition=exists,
        ) from exc

    q_hat, gamma = problem.split(result.x)
    dnorm = W.norm(q_hat - problem.e)
    r_hat = c + W.apply(q_hat - problem.e) * (1.0 / dnorm)
    return _finish("hard", problem, q_hat, r_hat, gamma, result.value - c.dc, result.iterations, result.grad_norm, cfg, "Hard")


def solve(
    c: HermitianSeq,
    p: HermitianSeq,
    mode: str,
    W: Optional[WeightMatrix] = None,
    config: Optional[SolverConfig] = None,
) -> DualSolution:
    """Dispatch to the solver for ``mode`` ('exact', 'soft' or 'hard')."""
    if mode == "exact":
        return solve_exact(c, p, config)
    if W is None:
        raise ValueError(f"{mode} mode needs a weight matrix")
    if mode == "soft":
        return solve_soft(c, p, W, config)
    if mode == "hard":
        return solve_hard(c, p, W, config)
    raise ValueError(f"Unknown mode {mode!r}; expected exact, soft or hard")
