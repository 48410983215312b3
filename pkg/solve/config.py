from __future__ import annotations

from dataclasses import dataclass, fields, replace
from typing import Any, Optional

from config.settings import get_float, get_int
from grid.spec import GridSpec


@dataclass(frozen=True)
class SolverConfig:
    """Numerical settings shared by the three dual solvers.

    ``grid`` may be left as None; the solvers then pick
    :meth:`GridSpec.for_index_set` for the data's index set.
    """

    grid: Optional[GridSpec] = None
    max_newton_iters: int = 200
    # stop when the gradient max-norm drops below gradient_tol·max(1, ‖c‖∞)
    gradient_tol: float = 1e-9
    # with the gradient already within kkt_tol, also stop once half the squared Newton
    # decrement is below decrement_tol·max(1, |f|) or the gradient stalls for stall_iters steps
    decrement_tol: float = 1e-18
    stall_iters: int = 3
    armijo: float = 1e-4
    backtrack: float = 0.5
    # fraction of the distance to the positivity boundary a Newton step may cover
    boundary_fraction: float = 0.99
    positivity_margin: float = 1e-12
    divergence_bound: float = 1e6
    kkt_tol: float = 1e-6
    # singular-part detection thresholds
    singular_ratio: float = 1e-6
    zero_ratio: float = 1e-4
    # refinement factor of the grid used to integrate the regular part and locate atoms
    refine_factor: int = 4
    atom_fit_tol: float = 1e-6

    def __post_init__(self) -> None:
        if self.max_newton_iters < 1:
            raise ValueError(f"max_newton_iters must be >= 1, got {self.max_newton_iters}")
        for name in ("gradient_tol", "decrement_tol", "armijo", "positivity_margin", "kkt_tol", "singular_ratio", "zero_ratio", "atom_fit_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if not 0.0 < self.backtrack < 1.0:
            raise ValueError(f"backtrack factor must lie in (0, 1), got {self.backtrack}")
        if not 0.0 < self.boundary_fraction < 1.0:
            raise ValueError(f"boundary_fraction must lie in (0, 1), got {self.boundary_fraction}")
        if self.stall_iters < 1:
            raise ValueError(f"stall_iters must be >= 1, got {self.stall_iters}")
        if self.refine_factor < 1:
            raise ValueError(f"refine_factor must be >= 1, got {self.refine_factor}")

    @classmethod
    def from_env(cls, **overrides: Any) -> "SolverConfig":
        """Defaults, then ``COVEXT_*`` environment values, then explicit overrides."""
        base = cls(
            max_newton_iters=get_int("MAX_NEWTON_ITERS", cls.max_newton_iters),
            gradient_tol=get_float("GRADIENT_TOL", cls.gradient_tol),
            kkt_tol=get_float("KKT_TOL", cls.kkt_tol),
        )
        known = {f.name for f in fields(cls)}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"Unknown solver settings: {sorted(unknown)}")
        return replace(base, **{k: v for k, v in overrides.items() if v is not None})

    def with_grid(self, grid: GridSpec) -> "SolverConfig":
        return replace(self, grid=grid)
