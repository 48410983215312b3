"""Hermitian coefficient sequences on an exponent set and their basic algebra.

A :class:`HermitianSeq` stores one complex value per exponent of its
:class:`~trigcore.index_set.IndexSet` and satisfies ``v[-k] == conj(v[k])``.
Covariance data ``c``, priors ``p``, dual variables ``q`` and the unit
sequence ``e`` are all represented this way.

Typical usage::

    lam = IndexSet.box(1)
    c = HermitianSeq.from_values(lam, [0.5, 1.0, 0.5])
    inner_product(c, HermitianSeq.unit(lam))   # -> 1.0
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from trigcore.index_set import IndexSet

# Relative size of an imaginary residual tolerated before symmetry is declared corrupted.
IMAG_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class HermitianSeq:
    """Complex sequence on Λ with conjugate symmetry."""

    index_set: IndexSet
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.complex128).reshape(-1)
        if vals.shape[0] != len(self.index_set):
            raise ValueError(
                f"HermitianSeq needs {len(self.index_set)} values, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("HermitianSeq values must be finite")
        mirrored = np.conj(vals[self.index_set.reflection])
        scale = max(1.0, float(np.max(np.abs(vals))))
        if np.max(np.abs(vals - mirrored)) > IMAG_TOL * scale:
            raise ValueError("Values violate the symmetry c[-k] = conj(c[k])")
        # remove rounding-level asymmetry so that downstream sums are exactly real
        vals = 0.5 * (vals + mirrored)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, index_set: IndexSet, values: Sequence[complex] | np.ndarray) -> "HermitianSeq":
        return cls(index_set=index_set, values=np.asarray(values))

    @classmethod
    def zeros(cls, index_set: IndexSet) -> "HermitianSeq":
        return cls(index_set=index_set, values=np.zeros(len(index_set)))

    @classmethod
    def unit(cls, index_set: IndexSet) -> "HermitianSeq":
        """The sequence e with e_0 = 1 and e_k = 0 otherwise."""
        vals = np.zeros(len(index_set))
        vals[index_set.zero_position] = 1.0
        return cls(index_set=index_set, values=vals)

    @classmethod
    def from_real(cls, index_set: IndexSet, x: np.ndarray) -> "HermitianSeq":
        """Inverse of :meth:`to_real`."""
        return cls(index_set=index_set, values=real_basis(index_set) @ np.asarray(x, dtype=float))

    def to_real(self) -> np.ndarray:
        """Real coordinates ``[q_0, Re q_k..., Im q_k...]`` over the positive half of Λ."""
        half = self.index_set.half_positions
        v = self.values
        return np.concatenate(([v[self.index_set.zero_position].real], v[half].real, v[half].imag))

    def __getitem__(self, k: Sequence[int]) -> complex:
        return complex(self.values[self.index_set.position(k)])

    @property
    def dc(self) -> float:
        return float(self.values[self.index_set.zero_position].real)

    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def _coerce(self, other: "HermitianSeq") -> np.ndarray:
        self.index_set.require_same(other.index_set)
        return other.values

    def __add__(self, other: "HermitianSeq") -> "HermitianSeq":
        return HermitianSeq(self.index_set, self.values + self._coerce(other))

    def __sub__(self, other: "HermitianSeq") -> "HermitianSeq":
        return HermitianSeq(self.index_set, self.values - self._coerce(other))

    def __mul__(self, scalar: float) -> "HermitianSeq":
        if isinstance(scalar, complex) or np.iscomplexobj(scalar):
            raise TypeError("Hermitian sequences can only be scaled by real numbers")
        return HermitianSeq(self.index_set, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "HermitianSeq":
        return HermitianSeq(self.index_set, -self.values)

    def allclose(self, other: "HermitianSeq", atol: float = 1e-12) -> bool:
        return bool(np.allclose(self.values, self._coerce(other), rtol=0.0, atol=atol))

    def __repr__(self) -> str:
        return f"HermitianSeq(|Λ|={len(self.index_set)}, values={np.array2string(self.values, precision=6)})"


@lru_cache(maxsize=64)
def _real_basis_cached(index_set: IndexSet) -> np.ndarray:
    n = len(index_set)
    half = index_set.half_positions
    mirror = index_set.reflection
    m = len(half)
    basis = np.zeros((n, 1 + 2 * m), dtype=np.complex128)
    basis[index_set.zero_position, 0] = 1.0
    for j, pos in enumerate(half):
        basis[pos, 1 + j] = 1.0
        basis[mirror[pos], 1 + j] = 1.0
        basis[pos, 1 + m + j] = 1.0j
        basis[mirror[pos], 1 + m + j] = -1.0j
    basis.setflags(write=False)
    return basis


def real_basis(index_set: IndexSet) -> np.ndarray:
    """Complex matrix T with ``q = T x`` mapping real coordinates to Hermitian values."""
    return _real_basis_cached(index_set)


def inner_product(a: HermitianSeq, b: HermitianSeq) -> float:
    """Return ⟨a, b⟩ = Σ_k a_k conj(b_k).

    Raises:
        IndexSetMismatchError: If the sequences live on different index sets.
        ValueError: If the imaginary part exceeds ``1e-9·‖a‖‖b‖``.
    """
    a.index_set.require_same(b.index_set, "inner product operands")
    total = complex(np.vdot(b.values, a.values))
    bound = IMAG_TOL * max(np.linalg.norm(a.values) * np.linalg.norm(b.values), np.finfo(float).tiny)
    if abs(total.imag) > bound:
        raise ValueError(f"Inner product has imaginary residual {total.imag:.3e}; symmetry corrupted")
    return total.real


def exponential_sequence(index_set: IndexSet, theta: Sequence[float]) -> np.ndarray:
    """Values e^{i(k,θ)} for every k in Λ (not Hermitian-checked)."""
    th = np.asarray(theta, dtype=float).reshape(-1)
    if th.shape[0] != index_set.dim:
        raise ValueError(f"theta has dimension {th.shape[0]}, expected {index_set.dim}")
    return np.exp(1j * (index_set.array @ th))


def eval_poly(p: HermitianSeq, theta: Sequence[float]) -> float:
    """Evaluate P(e^{iθ}) = Σ_k p_k e^{-i(k,θ)} at a single point."""
    value = complex(np.sum(p.values * np.conj(exponential_sequence(p.index_set, theta))))
    scale = max(1.0, float(np.sum(np.abs(p.values))))
    if abs(value.imag) > IMAG_TOL * scale:
        raise ValueError(f"Polynomial value has imaginary residual {value.imag:.3e}")
    return value.real
