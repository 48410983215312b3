from __future__ import annotations

from dataclasses import dataclass, field
from typing import Tuple

import numpy as np
import scipy.linalg

from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq

_SYM_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class WeightMatrix:
    """Hermitian positive-definite weight W on sequences over Λ.

    Besides being Hermitian and positive definite, W must commute with the
    conjugate reflection ``x_k -> conj(x_{-k})``; this is what makes
    ``W (q - e)`` a Hermitian sequence again. Use :meth:`symmetrized` to
    project an arbitrary Hermitian matrix onto that class.
    """

    index_set: IndexSet
    entries: np.ndarray
    _factor: Tuple[np.ndarray, bool] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        n = len(self.index_set)
        mat = np.array(self.entries, dtype=np.complex128)
        if mat.shape != (n, n):
            raise ValueError(f"Weight matrix must be {n}x{n}, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("Weight matrix has non-finite entries")
        scale = max(1.0, float(np.max(np.abs(mat))))
        if np.max(np.abs(mat - mat.conj().T)) > _SYM_TOL * scale:
            raise ValueError("Weight matrix is not Hermitian")
        rev = self.index_set.reflection
        if np.max(np.abs(mat - np.conj(mat[np.ix_(rev, rev)]))) > _SYM_TOL * scale:
            raise ValueError(
                "Weight matrix does not map Hermitian sequences to Hermitian sequences "
                "(need W[-l,-k] = conj(W[l,k])); see WeightMatrix.symmetrized"
            )
        mat = 0.5 * (mat + mat.conj().T)
        try:
            factor = scipy.linalg.cho_factor(mat, lower=True)
        except np.linalg.LinAlgError:
            raise ValueError("Weight matrix is not positive definite") from None
        if np.min(np.abs(np.diag(factor[0]))) <= 0.0:
            raise ValueError("Weight matrix is not positive definite")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)
        object.__setattr__(self, "_factor", factor)

    @classmethod
    def scalar(cls, lam: float, index_set: IndexSet) -> "WeightMatrix":
        """W = λ·I."""
        if not lam > 0:
            raise ValueError(f"Scalar weight must be positive, got {lam}")
        return cls(index_set=index_set, entries=lam * np.eye(len(index_set)))

    @classmethod
    def symmetrized(cls, matrix: np.ndarray, index_set: IndexSet) -> "WeightMatrix":
        """Average ``matrix`` with its conjugate transpose and conjugate reflection."""
        mat = np.asarray(matrix, dtype=np.complex128)
        mat = 0.5 * (mat + mat.conj().T)
        rev = index_set.reflection
        mat = 0.5 * (mat + np.conj(mat[np.ix_(rev, rev)]))
        return cls(index_set=index_set, entries=mat)

    @property
    def size(self) -> int:
        return len(self.index_set)

    def _vec(self, x: HermitianSeq | np.ndarray) -> np.ndarray:
        if isinstance(x, HermitianSeq):
            self.index_set.require_same(x.index_set, "weight and sequence")
            return x.values
        return np.asarray(x, dtype=np.complex128)

    def apply(self, x: HermitianSeq) -> HermitianSeq:
        return HermitianSeq(self.index_set, self.entries @ self._vec(x))

    def solve(self, x: HermitianSeq) -> HermitianSeq:
        return HermitianSeq(self.index_set, scipy.linalg.cho_solve(self._factor, self._vec(x)))

    def quad(self, x: HermitianSeq | np.ndarray) -> float:
        """x* W x."""
        v = self._vec(x)
        return float(np.real(np.vdot(v, self.entries @ v)))

    def inv_quad(self, x: HermitianSeq | np.ndarray) -> float:
        """x* W^{-1} x."""
        v = self._vec(x)
        return float(np.real(np.vdot(v, scipy.linalg.cho_solve(self._factor, v))))

    def norm(self, x: HermitianSeq | np.ndarray) -> float:
        return float(np.sqrt(max(self.quad(x), 0.0)))

    def inv_norm(self, x: HermitianSeq | np.ndarray) -> float:
        return float(np.sqrt(max(self.inv_quad(x), 0.0)))

    def scaled(self, factor: float) -> "WeightMatrix":
        if not factor > 0:
            raise ValueError(f"Weight scaling factor must be positive, got {factor}")
        return WeightMatrix(self.index_set, self.entries * factor)

    def eigenvalues(self) -> np.ndarray:
        return scipy.linalg.eigvalsh(self.entries)

    def inv_sqrt(self) -> np.ndarray:
        """The Hermitian square root of W^{-1}."""
        vals, vecs = scipy.linalg.eigh(self.entries)
        return (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T

    def scalar_value(self) -> float | None:
        """λ if W = λ·I (to rounding), otherwise None."""
        diag = np.real(np.diag(self.entries))
        lam = float(diag[0])
        if np.allclose(self.entries, lam * np.eye(self.size), rtol=0.0, atol=1e-14 * max(1.0, lam)):
            return lam
        return None
