"""Residuals of the optimality conditions of the three matching problems.

Blocks reported for every mode:

- feasibility:       max(0, −min Q̂) over the solver grid
- complementarity:   |⟨ĉ, q̂⟩| (with q̂ projected onto the cone boundary when
                     the solution has a singular part)
- moment residual:   ‖r̂ − Σ_t (P/Q̂)(θ_t) e^{i(k,θ_t)}/N^d‖, the stationarity of
                     the discretized dual
- weight relation:   exact ‖r̂ − c‖, soft ‖r̂ − c − W(q̂ − e)‖,
                     hard ‖(r̂ − c)‖q̂ − e‖_W − W(q̂ − e)‖

Hard mode additionally reports |‖r̂ − c‖_{W⁻¹} − 1| (or the excess over 1 on
the trivial branch) and |γ̂ − ½‖q̂ − e‖_W|.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import TYPE_CHECKING, Dict, List, Optional

import numpy as np

from grid.transforms import moments_array, synthesize_array
from trigcore.sequences import HermitianSeq, inner_product
from trigcore.weights import WeightMatrix

if TYPE_CHECKING:
    from solve.dual_solvers import DualSolution

logger = logging.getLogger(__name__)

MODES = ("exact", "soft", "hard")


@dataclass(frozen=True)
class KKTReport:
    feasibility: float
    complementarity: float
    moment_residual: float
    weight_residual: float
    atom_residual: float
    tol: float
    boundary_residual: Optional[float] = None
    gamma_residual: Optional[float] = None

    def blocks(self) -> Dict[str, float]:
        out = {
            "feasibility": self.feasibility,
            "complementarity": self.complementarity,
            "moment_residual": self.moment_residual,
            "weight_residual": self.weight_residual,
        }
        if self.boundary_residual is not None:
            out["boundary_residual"] = self.boundary_residual
        if self.gamma_residual is not None:
            out["gamma_residual"] = self.gamma_residual
        return out

    def flagged(self) -> List[str]:
        return [name for name, value in self.blocks().items() if not value <= self.tol]

    @property
    def ok(self) -> bool:
        return not self.flagged()

    def as_dict(self) -> Dict[str, Optional[float]]:
        return asdict(self)


def kkt_report(
    solution: "DualSolution",
    c: HermitianSeq,
    p: HermitianSeq,
    W: Optional[WeightMatrix],
    mode: str,
    tol: float = 1e-6,
) -> KKTReport:
    """Evaluate the optimality residuals of ``solution`` for data (c, p, W)."""
    if mode not in MODES:
        raise ValueError(f"Unknown mode {mode!r}; expected one of {MODES}")
    if mode != "exact" and W is None:
        raise ValueError(f"{mode} mode needs a weight matrix")
    lam = c.index_set
    grid = solution.grid
    q_hat, r_hat, c_hat = solution.q_hat, solution.r_hat, solution.c_hat
    e = HermitianSeq.unit(lam)

    qf = synthesize_array(lam, q_hat.values, grid).real
    pf = np.maximum(synthesize_array(lam, p.values, grid).real, 0.0)
    feasibility = max(0.0, -float(np.min(qf)))
    complementarity = abs(inner_product(c_hat, solution.q_boundary))
    if float(np.min(qf)) > 0.0:
        discrete = moments_array(pf / qf, lam, grid)
        moment_residual = float(np.linalg.norm(r_hat.values - discrete))
    else:
        moment_residual = np.inf

    d = q_hat - e
    gamma_residual = None
    boundary_residual = None
    if mode == "exact":
        weight_residual = (r_hat - c).norm()
    elif mode == "soft":
        weight_residual = float(np.linalg.norm(r_hat.values - c.values - W.entries @ d.values))
    else:
        dnorm = W.norm(d)
        weight_residual = float(np.linalg.norm((r_hat.values - c.values) * dnorm - W.entries @ d.values))
        distance = W.inv_norm(r_hat - c)
        if dnorm > 0.0:
            boundary_residual = abs(distance - 1.0)
        else:
            boundary_residual = max(0.0, distance - 1.0)
        gamma = solution.gamma if solution.gamma is not None else 0.0
        gamma_residual = abs(gamma - 0.5 * dnorm)

    scale = max(1.0, r_hat.norm())
    report = KKTReport(
        feasibility=feasibility,
        complementarity=complementarity,
        moment_residual=moment_residual,
        weight_residual=weight_residual,
        atom_residual=solution.atom_residual,
        tol=tol * scale,
        boundary_residual=boundary_residual,
        gamma_residual=gamma_residual,
    )
    if report.flagged():
        logger.warning("[KKT] %s residuals above tolerance: %s", mode, ", ".join(report.flagged()))
    return report
