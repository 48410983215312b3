"""Discretized dual functionals of the covariance matching problems.

Exact matching:   J(q) = ⟨c, q⟩ − ∫ P log Q dm
Soft matching:    J(q) = ⟨c, q⟩ − ∫ P log Q dm + ½‖q − e‖²_W
Hard matching:    φ(q, γ) = ⟨c, q⟩ − ∫ P log Q dm + ‖q − e‖²_W / (4γ) + γ

The integrals are Riemann sums on the solver grid. Gradients are returned as
Hermitian sequences g with directional derivative ⟨g, d⟩; Hessians as the
complex |Λ|×|Λ| matrices H with ``dg = H d``. The Newton solver works in the
real coordinates of :meth:`HermitianSeq.to_real`, where the gradient is
``Re(Tᴴ g)`` and the Hessian ``Re(Tᴴ H T)``.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

from grid.spec import GridSpec
from grid.transforms import DENSITY_TOL, moments_array, synthesize_array
from trigcore.sequences import HermitianSeq, inner_product, real_basis
from trigcore.weights import WeightMatrix


class DualObjective:
    """Exact (``weight=None``) or soft-constrained dual on a fixed grid."""

    def __init__(
        self,
        c: HermitianSeq,
        p: HermitianSeq,
        grid: GridSpec,
        weight: Optional[WeightMatrix] = None,
    ) -> None:
        c.index_set.require_same(p.index_set, "covariances and prior")
        if weight is not None:
            c.index_set.require_same(weight.index_set, "covariances and weight")
        self.index_set = c.index_set
        self.c = c
        self.p = p
        self.weight = weight
        self.grid = grid
        self.diff_set, self.layout = self.index_set.difference_layout()
        grid.require_resolves(self.diff_set)
        pfield = synthesize_array(self.index_set, p.values, grid).real
        scale = max(float(np.max(np.abs(pfield))), np.finfo(float).tiny)
        if float(np.min(pfield)) < -DENSITY_TOL * scale:
            raise ValueError(f"Prior P is negative on the grid (min {float(np.min(pfield)):.3e})")
        if float(np.max(pfield)) <= 0.0:
            raise ValueError("Prior P vanishes identically on the grid")
        self.pfield = np.maximum(pfield, 0.0)
        self.e = HermitianSeq.unit(self.index_set)
        self.basis = real_basis(self.index_set)

    # -- grid quantities -------------------------------------------------
    def q_field(self, q: HermitianSeq | np.ndarray) -> np.ndarray:
        vals = q.values if isinstance(q, HermitianSeq) else np.asarray(q)
        return synthesize_array(self.index_set, vals, self.grid).real

    def _checked_field(self, q: HermitianSeq) -> np.ndarray:
        qf = self.q_field(q)
        if float(np.min(qf)) <= 0.0:
            raise ValueError(f"Q must be strictly positive on the grid (min {float(np.min(qf)):.3e})")
        return qf

    def ratio_moments(self, q: HermitianSeq) -> HermitianSeq:
        """Grid moments of P/Q on Λ."""
        qf = self._checked_field(q)
        return HermitianSeq(self.index_set, moments_array(self.pfield / qf, self.index_set, self.grid))

    def _hessian_block(self, qf: np.ndarray) -> np.ndarray:
        m2 = moments_array(self.pfield / qf**2, self.diff_set, self.grid)
        return m2[self.layout]

    # -- functional --------------------------------------------------------
    def value(self, q: HermitianSeq) -> float:
        qf = self._checked_field(q)
        val = inner_product(self.c, q) - float(np.mean(self.pfield * np.log(qf)))
        if self.weight is not None:
            val += 0.5 * self.weight.quad(q - self.e)
        return val

    def gradient(self, q: HermitianSeq) -> HermitianSeq:
        qf = self._checked_field(q)
        m = moments_array(self.pfield / qf, self.index_set, self.grid)
        g = self.c.values - m
        if self.weight is not None:
            g = g + self.weight.entries @ (q.values - self.e.values)
        return HermitianSeq(self.index_set, g)

    def hessian(self, q: HermitianSeq) -> np.ndarray:
        qf = self._checked_field(q)
        h = self._hessian_block(qf)
        if self.weight is not None:
            h = h + self.weight.entries
        return h

    # -- real coordinates for the Newton solver -----------------------------
    def to_seq(self, x: np.ndarray) -> HermitianSeq:
        return HermitianSeq(self.index_set, self.basis @ x)

    def start(self) -> np.ndarray:
        return self.e.to_real()

    def feasible(self, x: np.ndarray) -> bool:
        return float(np.min(self.q_field(self.basis @ x))) > 0.0

    def max_step(self, x: np.ndarray, dx: np.ndarray) -> float:
        """Largest α with Q(x + α dx) > 0 on every node (inf if unbounded)."""
        return _positivity_step(self.q_field(self.basis @ x), self.q_field(self.basis @ dx))

    def evaluate(self, x: np.ndarray, order: int = 2) -> Tuple[float, Optional[np.ndarray], Optional[np.ndarray]]:
        q = self.to_seq(x)
        f = self.value(q)
        if order == 0:
            return f, None, None
        t = self.basis
        g = np.real(t.conj().T @ self.gradient(q).values)
        if order == 1:
            return f, g, None
        h = np.real(t.conj().T @ self.hessian(q) @ t)
        return f, g, 0.5 * (h + h.T)

    def scale(self) -> float:
        return max(1.0, float(np.max(np.abs(self.c.values))))


class HardDualObjective(DualObjective):
    """Joint dual φ(q, γ) of the hard-constrained problem; real coordinates (x, γ)."""

    def __init__(self, c: HermitianSeq, p: HermitianSeq, grid: GridSpec, weight: WeightMatrix) -> None:
        if weight is None:
            raise ValueError("Hard-constrained matching needs a weight matrix")
        super().__init__(c, p, grid, weight)

    def joint_value(self, q: HermitianSeq, gamma: float) -> float:
        if not gamma > 0:
            raise ValueError(f"γ must be positive, got {gamma}")
        qf = self._checked_field(q)
        s = self.weight.quad(q - self.e)
        return inner_product(self.c, q) - float(np.mean(self.pfield * np.log(qf))) + s / (4.0 * gamma) + gamma

    def joint_gradient(self, q: HermitianSeq, gamma: float) -> Tuple[HermitianSeq, float]:
        qf = self._checked_field(q)
        d = q.values - self.e.values
        wd = self.weight.entries @ d
        s = float(np.real(np.vdot(d, wd)))
        m = moments_array(self.pfield / qf, self.index_set, self.grid)
        gq = HermitianSeq(self.index_set, self.c.values - m + wd / (2.0 * gamma))
        return gq, 1.0 - s / (4.0 * gamma**2)

    def joint_hessian(self, q: HermitianSeq, gamma: float) -> Tuple[np.ndarray, np.ndarray, float]:
        """Blocks (H_qq, h_qγ, h_γγ) of the joint Hessian in complex form."""
        qf = self._checked_field(q)
        d = q.values - self.e.values
        wd = self.weight.entries @ d
        s = float(np.real(np.vdot(d, wd)))
        hqq = self._hessian_block(qf) + self.weight.entries / (2.0 * gamma)
        return hqq, -wd / (2.0 * gamma**2), s / (2.0 * gamma**3)

    def start(self) -> np.ndarray:
        return np.concatenate((self.e.to_real(), [1.0]))

    def split(self, z: np.ndarray) -> Tuple[HermitianSeq, float]:
        return self.to_seq(z[:-1]), float(z[-1])

    def feasible(self, z: np.ndarray) -> bool:
        return z[-1] > 0.0 and super().feasible(z[:-1])

    def max_step(self, z: np.ndarray, dz: np.ndarray) -> float:
        alpha = super().max_step(z[:-1], dz[:-1])
        if dz[-1] < 0.0:
            alpha = min(alpha, -z[-1] / dz[-1])
        return alpha

    def evaluate(self, z: np.ndarray, order: int = 2) -> Tuple[float, Optional[np.ndarray], Optional[np.ndarray]]:
        q, gamma = self.split(z)
        f = self.joint_value(q, gamma)
        if order == 0:
            return f, None, None
        t = self.basis
        gq, gg = self.joint_gradient(q, gamma)
        grad = np.concatenate((np.real(t.conj().T @ gq.values), [gg]))
        if order == 1:
            return f, grad, None
        hqq, hqg, hgg = self.joint_hessian(q, gamma)
        n = t.shape[1]
        h = np.empty((n + 1, n + 1))
        h[:n, :n] = np.real(t.conj().T @ hqq @ t)
        h[:n, n] = np.real(t.conj().T @ hqg)
        h[n, :n] = h[:n, n]
        h[n, n] = hgg
        return f, grad, 0.5 * (h + h.T)


def _positivity_step(qf: np.ndarray, dqf: np.ndarray) -> float:
    neg = dqf < 0.0
    if not np.any(neg):
        return np.inf
    return float(np.min(-qf[neg] / dqf[neg]))


def _make(c, p, W, grid):
    return DualObjective(c, p, grid, W)


def objective_soft(q: HermitianSeq, c: HermitianSeq, p: HermitianSeq, W: Optional[WeightMatrix], grid: GridSpec) -> float:
    """Value of the discretized soft dual (exact dual when ``W`` is None)."""
    return _make(c, p, W, grid).value(q)


def gradient_soft(q: HermitianSeq, c: HermitianSeq, p: HermitianSeq, W: Optional[WeightMatrix], grid: GridSpec) -> HermitianSeq:
    """g_k = c_k − moments(P/Q)_k + [W(q − e)]_k."""
    return _make(c, p, W, grid).gradient(q)


def hessian_soft(q: HermitianSeq, c: HermitianSeq, p: HermitianSeq, W: Optional[WeightMatrix], grid: GridSpec) -> np.ndarray:
    """H[l, k] = ∫ e^{i(λ_l − λ_k, θ)} P/Q² dm + W[l, k]."""
    return _make(c, p, W, grid).hessian(q)


def objective_hard(q: HermitianSeq, gamma: float, c: HermitianSeq, p: HermitianSeq, W: WeightMatrix, grid: GridSpec) -> float:
    return HardDualObjective(c, p, grid, W).joint_value(q, gamma)


def gradient_hard(
    q: HermitianSeq, gamma: float, c: HermitianSeq, p: HermitianSeq, W: WeightMatrix, grid: GridSpec
) -> Tuple[HermitianSeq, float]:
    return HardDualObjective(c, p, grid, W).joint_gradient(q, gamma)
