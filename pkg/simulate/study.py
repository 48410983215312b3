"""Monte-Carlo comparison of exact and approximate covariance matching.

Each replicate simulates the system, estimates covariances from the last
``window`` x ``window`` samples and runs three procedures:

- ``biased_exact``: exact matching of the biased estimate,
- ``biased_approx``: approximate matching of the biased estimate,
- ``unbiased_approx``: approximate matching of the unbiased estimate,

where the approximate procedures use W = λI with λ = ‖c_true − c_est‖²₂
(soft weight, or the squared radius of the hard constraint). The error
reported is ‖r̂ − c_true‖₂.

Replicate seeds are spawned from one ``SeedSequence``, so the records do
not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from estimate.covariance import biased_cov, unbiased_cov
from simulate.arma2d import Arma2D, UnstableSystemError, default_system, numerator_prior, simulate_field, true_covariances
from solve.config import SolverConfig
from solve.dual_solvers import solve
from solve.errors import SolverError
from trigcore.cones import ConeStatus, cone_test_toeplitz_md
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix

logger = logging.getLogger(__name__)

PROCEDURES = ("biased_exact", "biased_approx", "unbiased_approx")
PRIORS = ("me", "true")
WEIGHT_MODES = ("soft", "hard")


@dataclass(frozen=True)
class StudyConfig:
    steps: int = 500
    window: int = 9
    replicates: int = 100
    seed: int = 0
    prior: str = "me"
    weight_mode: str = "soft"
    # keep only runs whose unbiased estimate fails the covariance-cone surrogate
    unbiased_outside: bool = False
    jobs: int = 1
    max_attempts: Optional[int] = None

    def __post_init__(self) -> None:
        if self.prior not in PRIORS:
            raise ValueError(f"prior must be one of {PRIORS}, got {self.prior!r}")
        if self.weight_mode not in WEIGHT_MODES:
            raise ValueError(f"weight_mode must be one of {WEIGHT_MODES}, got {self.weight_mode!r}")
        if self.replicates < 1 or self.jobs < 1:
            raise ValueError("replicates and jobs must be >= 1")
        if self.window < 1 or self.steps < self.window:
            raise ValueError(f"window must lie in [1, steps], got window={self.window}, steps={self.steps}")


@dataclass(frozen=True)
class StudyRecord:
    replicate: int
    attempt: int
    procedure: str
    error: Optional[float]
    lam: Optional[float] = None
    failure: Optional[str] = None

    def as_dict(self) -> Dict[str, object]:
        return asdict(self)


@dataclass
class StudyResult:
    records: List[StudyRecord] = field(default_factory=list)
    attempts: int = 0

    def summary(self) -> Dict[str, Dict[str, float]]:
        out: Dict[str, Dict[str, float]] = {}
        for name in PROCEDURES:
            errs = [r.error for r in self.records if r.procedure == name and r.error is not None]
            failures = sum(1 for r in self.records if r.procedure == name and r.error is None)
            out[name] = {
                "mean": float(np.mean(errs)) if errs else float("nan"),
                "std": float(np.std(errs, ddof=1)) if len(errs) > 1 else float("nan"),
                "count": len(errs),
                "failures": failures,
            }
        return out


@dataclass(frozen=True)
class _Attempt:
    attempt: int
    accepted: bool
    records: List[StudyRecord]


def _run_procedure(
    name: str, c_est: HermitianSeq, c_true: HermitianSeq, p: HermitianSeq, mode: str, solver: SolverConfig
) -> tuple[Optional[float], Optional[float], Optional[str]]:
    lam = None
    try:
        if name == "biased_exact":
            sol = solve(c_est, p, "exact", config=solver)
        else:
            lam = float((c_true - c_est).norm() ** 2)
            sol = solve(c_est, p, mode, WeightMatrix.scalar(lam, c_est.index_set), solver)
    except (SolverError, ValueError) as exc:
        logger.warning("[Study] %s failed: %s", name, exc)
        return None, lam, str(exc)
    return float((sol.r_hat - c_true).norm()), lam, None


def _attempt(
    attempt: int,
    system: Arma2D,
    c_true: HermitianSeq,
    p: HermitianSeq,
    cfg: StudyConfig,
    solver: SolverConfig,
) -> _Attempt:
    seq = np.random.SeedSequence(cfg.seed, spawn_key=(attempt,))
    lam_set = c_true.index_set
    try:
        y = simulate_field(system, cfg.steps, np.random.default_rng(seq))
    except UnstableSystemError as exc:
        logger.warning("[Study] attempt %d: %s", attempt, exc)
        return _Attempt(attempt, False, [])
    window = y[-cfg.window:, -cfg.window:]
    c_b = biased_cov(window, lam_set)
    c_u = unbiased_cov(window, lam_set)
    if cfg.unbiased_outside and cone_test_toeplitz_md(c_u) is not ConeStatus.OUTSIDE:
        logger.debug("[Study] attempt %d discarded: unbiased estimate not shown outside the cone", attempt)
        return _Attempt(attempt, False, [])
    records = []
    for name, c_est in zip(PROCEDURES, (c_b, c_b, c_u)):
        err, lam, failure = _run_procedure(name, c_est, c_true, p, cfg.weight_mode, solver)
        records.append(StudyRecord(replicate=-1, attempt=attempt, procedure=name, error=err, lam=lam, failure=failure))
    return _Attempt(attempt, True, records)


def run_study(
    cfg: StudyConfig,
    system: Optional[Arma2D] = None,
    solver: Optional[SolverConfig] = None,
) -> StudyResult:
    """Run replicates until ``cfg.replicates`` of them are accepted.

    Raises:
        RuntimeError: If ``max_attempts`` (default 50 x replicates) runs out
            before enough replicates are accepted.
    """
    sys_ = system or default_system()
    solver_cfg = solver or SolverConfig.from_env()
    lam = sys_.index_set
    c_true = true_covariances(sys_, lam)
    p = numerator_prior(sys_, lam) if cfg.prior == "true" else HermitianSeq.unit(lam)
    limit = cfg.max_attempts or 50 * cfg.replicates
    result = StudyResult()
    accepted = 0
    next_attempt = 0
    logger.info(
        "[Study] system=%s N=%d window=%d replicates=%d prior=%s weight=%s",
        sys_.name, cfg.steps, cfg.window, cfg.replicates, cfg.prior, cfg.weight_mode,
    )
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        while accepted < cfg.replicates:
            if next_attempt >= limit:
                raise RuntimeError(
                    f"Only {accepted} of {cfg.replicates} replicates accepted after {limit} attempts"
                )
            batch = range(next_attempt, min(limit, next_attempt + cfg.replicates - accepted))
            next_attempt = batch.stop
            # map keeps submission order, so acceptance is independent of scheduling
            for outcome in pool.map(lambda a: _attempt(a, sys_, c_true, p, cfg, solver_cfg), batch):
                if not outcome.accepted or accepted >= cfg.replicates:
                    continue
                result.records.extend(
                    StudyRecord(accepted, r.attempt, r.procedure, r.error, r.lam, r.failure) for r in outcome.records
                )
                accepted += 1
    result.attempts = next_attempt
    logger.info("[Study] %d replicates from %d attempts", accepted, next_attempt)
    return result
