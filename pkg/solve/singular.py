"""Recovery of the singular part dν̂ of an optimal measure.

On a finite grid the dual optimum reproduces the moments exactly with a
purely discrete measure, so a singular part shows up as narrow spikes of
P/Q̂ at the nodes next to a zero of Q̂, and the trigonometric polynomial Q̂
dips slightly below zero between those nodes. Recovery therefore

1. shifts Q̂ in its constant coefficient so that its minimum over the torus
   is exactly zero (the projection onto the boundary of the positive cone),
2. integrates the regular part P/Q̃ on a refined offset grid,
3. takes ĉ = r̂ − (regular moments), and
4. fits nonnegative masses at the zeros of Q̃ to ĉ.

The atoms are one nonnegative-least-squares representative; the singular
measure itself need not be unique.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.ndimage
import scipy.optimize

from grid.spec import GridSpec
from grid.transforms import moments_array, synthesize_array
from solve.config import SolverConfig
from solve.errors import SingularFitError
from trigcore.sequences import HermitianSeq

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Atom:
    theta: Tuple[float, ...]
    mass: float


@dataclass(frozen=True)
class SingularPart:
    atoms: List[Atom] = field(default_factory=list)
    residual: float = 0.0


@dataclass(frozen=True)
class MeasureSplit:
    """Decomposition r̂ = regular moments + ĉ of an optimal solution."""

    c_hat: HermitianSeq
    q_boundary: HermitianSeq
    boundary_shift: float
    singular_branch: bool


def poly_derivatives(q: HermitianSeq, theta: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray]:
    """Value, gradient and Hessian of Q(θ) = Σ q_k e^{-i(k,θ)} at one point."""
    k = q.index_set.array.astype(float)
    w = q.values * np.exp(-1j * (k @ theta))
    value = float(np.real(np.sum(w)))
    grad = np.real((-1j * k).T @ w)
    hess = -np.real((k.T * w) @ k)
    return value, grad, hess


def refine_minimum(q: HermitianSeq, theta0: np.ndarray, radius: float) -> Tuple[np.ndarray, float]:
    """Polish a grid minimizer of Q with a trust-region Newton method."""
    theta0 = np.asarray(theta0, dtype=float)
    base = poly_derivatives(q, theta0)[0]
    res = scipy.optimize.minimize(
        lambda t: poly_derivatives(q, t)[0],
        theta0,
        jac=lambda t: poly_derivatives(q, t)[1],
        hess=lambda t: poly_derivatives(q, t)[2],
        method="trust-exact",
        options={"gtol": 1e-13, "maxiter": 100},
    )
    theta = np.asarray(res.x, dtype=float)
    value = poly_derivatives(q, theta)[0]
    if not np.all(np.isfinite(theta)) or np.max(np.abs(theta - theta0)) > radius or value > base:
        return theta0, base
    return np.mod(theta, TWO_PI), value


def _fine_grid(grid: GridSpec, config: SolverConfig) -> GridSpec:
    return grid.refined(config.refine_factor, offset=False)


def _cell_radius(grid: GridSpec) -> float:
    return 2.0 * TWO_PI / min(grid.points)


def continuum_minimum(q: HermitianSeq, grid: GridSpec, config: SolverConfig) -> Tuple[float, np.ndarray]:
    """Minimum of Q over the torus: refined-grid search followed by local polishing."""
    fine = _fine_grid(grid, config)
    values = synthesize_array(q.index_set, q.values, fine).real
    idx = np.unravel_index(int(np.argmin(values)), values.shape)
    theta, value = refine_minimum(q, fine.node(idx), _cell_radius(fine))
    return min(value, float(values[idx])), theta


def atom_candidates(q: HermitianSeq, grid: GridSpec, config: SolverConfig) -> List[np.ndarray]:
    """Local minima of Q on the refined grid whose value is near zero."""
    fine = _fine_grid(grid, config)
    values = synthesize_array(q.index_set, q.values, fine).real
    top = float(np.max(np.abs(values)))
    local = values <= scipy.ndimage.minimum_filter(values, size=3, mode="wrap")
    small = values < config.zero_ratio * top
    found: List[np.ndarray] = []
    for idx in zip(*np.nonzero(local & small)):
        theta, _ = refine_minimum(q, fine.node(idx), _cell_radius(fine))
        if all(_torus_distance(theta, other) > 1e-6 for other in found):
            found.append(theta)
    return found


def _torus_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = np.mod(a - b + np.pi, TWO_PI) - np.pi
    return float(np.max(np.abs(d)))


def fit_atoms(c_hat: HermitianSeq, candidates: List[np.ndarray]) -> SingularPart:
    """Nonnegative masses at ``candidates`` whose moments best match ĉ."""
    if not candidates:
        return SingularPart(atoms=[], residual=c_hat.norm())
    k = c_hat.index_set.array.astype(float)
    thetas = np.array(candidates, dtype=float).reshape(len(candidates), -1)
    exps = np.exp(1j * (k @ thetas.T))
    design = np.vstack((exps.real, exps.imag))
    target = np.concatenate((c_hat.values.real, c_hat.values.imag))
    masses, residual = scipy.optimize.nnls(design, target)
    limit = len(c_hat.index_set) - 1
    keep = np.flatnonzero(masses > 1e-14 * max(1.0, float(np.max(masses))))
    if len(keep) > limit:
        keep = keep[np.argsort(masses[keep])[::-1][:limit]]
        masses_sub, residual = scipy.optimize.nnls(design[:, keep], target)
        masses = np.zeros_like(masses)
        masses[keep] = masses_sub
    atoms = [
        Atom(theta=tuple(float(t) for t in thetas[j]), mass=float(masses[j]))
        for j in sorted(keep, key=lambda j: tuple(thetas[j]))
        if masses[j] > 0.0
    ]
    return SingularPart(atoms=atoms, residual=float(residual))


def recover_singular(
    r_hat: HermitianSeq,
    c_hat: HermitianSeq,
    q_hat: HermitianSeq,
    grid: GridSpec,
    config: Optional[SolverConfig] = None,
    strict: bool = True,
) -> SingularPart:
    """Atoms (θ_j, mass_j) supported at the zeros of Q̂ reproducing ĉ.

    Raises:
        SingularFitError: If ``strict`` and the atom moments miss ĉ by more
            than ``atom_fit_tol``·max(1, ‖ĉ‖); usually a sign the grid is too coarse.
    """
    cfg = config or SolverConfig()
    if c_hat.norm() <= cfg.singular_ratio * max(r_hat.norm(), np.finfo(float).tiny):
        return SingularPart(atoms=[], residual=c_hat.norm())
    part = fit_atoms(c_hat, atom_candidates(q_hat, grid, cfg))
    bound = cfg.atom_fit_tol * max(1.0, c_hat.norm())
    logger.info("[Singular] %d atom(s), fit residual %.3e", len(part.atoms), part.residual)
    if part.residual > bound:
        msg = f"[Singular] atom fit residual {part.residual:.3e} exceeds {bound:.3e}; refine the grid"
        if strict:
            raise SingularFitError(msg, part.residual)
        logger.warning(msg)
    return part


def split_measure(
    r_hat: HermitianSeq,
    q_hat: HermitianSeq,
    p: HermitianSeq,
    grid: GridSpec,
    config: SolverConfig,
) -> MeasureSplit:
    """Compute ĉ = r̂ − ∫ e^{i(k,θ)} P/Q̂ dm, detecting the singular branch."""
    lam = q_hat.index_set
    qf = synthesize_array(lam, q_hat.values, grid).real
    pf = synthesize_array(lam, p.values, grid).real
    top = float(np.max(qf))
    regular = HermitianSeq(lam, r_hat.values - moments_array(pf / qf, lam, grid))
    if float(np.min(qf)) >= config.zero_ratio * top:
        return MeasureSplit(c_hat=regular, q_boundary=q_hat, boundary_shift=0.0, singular_branch=False)
    q_min, _ = continuum_minimum(q_hat, grid, config)
    if q_min > config.positivity_margin * top:
        logger.debug("[Singular] Q̂ small (min %.3e) but positive on the torus; regular solution", q_min)
        return MeasureSplit(c_hat=regular, q_boundary=q_hat, boundary_shift=0.0, singular_branch=False)
    q_tilde = q_hat - HermitianSeq.unit(lam) * q_min
    fine = grid.refined(config.refine_factor, offset=True)
    qt = synthesize_array(lam, q_tilde.values, fine).real
    pt = np.maximum(synthesize_array(lam, p.values, fine).real, 0.0)
    floor = 1e-14 * float(np.max(qt))
    if float(np.min(qt)) < floor:
        logger.warning("[Singular] projected Q touches a refined node (min %.3e); flooring", float(np.min(qt)))
    c_hat = HermitianSeq(lam, r_hat.values - moments_array(pt / np.maximum(qt, floor), lam, fine))
    logger.info("[Singular] boundary shift %.3e, |ĉ| = %.6g", -q_min, c_hat.norm())
    return MeasureSplit(c_hat=c_hat, q_boundary=q_tilde, boundary_shift=-q_min, singular_branch=True)
