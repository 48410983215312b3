"""Finite symmetric exponent sets Λ ⊂ Z^d.

Exponents are kept in lexicographic order. For a symmetric set this order has
a convenient property: negation reverses it, so the exponent at position
``i`` has its mirror image ``-k`` at position ``n - 1 - i`` and the zero
vector sits in the middle.

Typical usage::

    lam = IndexSet.box(2, 2)        # all k with |k1| <= 2, |k2| <= 2
    lam.position((1, -2))
    diff, layout = lam.difference_layout()
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from trigcore.errors import IndexSetMismatchError

Exponent = Tuple[int, ...]


@dataclass(frozen=True)
class IndexSet:
    """Ordered symmetric exponent set containing the origin."""

    dim: int
    exponents: Tuple[Exponent, ...]
    _positions: Dict[Exponent, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError(f"IndexSet dimension must be positive, got {self.dim}")
        exps = tuple(tuple(int(v) for v in k) for k in self.exponents)
        for k in exps:
            if len(k) != self.dim:
                raise ValueError(f"Exponent {k} does not have dimension {self.dim}")
        if len(set(exps)) != len(exps):
            raise ValueError("IndexSet contains duplicate exponents")
        exps = tuple(sorted(exps))
        present = set(exps)
        zero = (0,) * self.dim
        if zero not in present:
            raise ValueError("IndexSet must contain the zero exponent")
        for k in exps:
            if tuple(-v for v in k) not in present:
                raise ValueError(f"IndexSet is not symmetric: {k} present but its negative is missing")
        object.__setattr__(self, "exponents", exps)
        object.__setattr__(self, "_positions", {k: i for i, k in enumerate(exps)})

    @classmethod
    def box(cls, *radii: int) -> "IndexSet":
        """Full box ``{k : |k_j| <= radii[j]}``."""
        if not radii:
            raise ValueError("IndexSet.box needs at least one radius")
        if any(r < 0 for r in radii):
            raise ValueError(f"Box radii must be nonnegative, got {radii}")
        axes = [range(-r, r + 1) for r in radii]
        return cls(dim=len(radii), exponents=tuple(itertools.product(*axes)))

    @classmethod
    def from_exponents(cls, exponents: Iterable[Sequence[int]]) -> "IndexSet":
        exps = [tuple(int(v) for v in k) for k in exponents]
        if not exps:
            raise ValueError("IndexSet needs at least one exponent")
        return cls(dim=len(exps[0]), exponents=tuple(exps))

    def __len__(self) -> int:
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)

    def __contains__(self, k: object) -> bool:
        return tuple(k) in self._positions  # type: ignore[arg-type]

    def position(self, k: Sequence[int]) -> int:
        key = tuple(int(v) for v in k)
        try:
            return self._positions[key]
        except KeyError:
            raise KeyError(f"Exponent {key} not in index set") from None

    @property
    def zero_position(self) -> int:
        return len(self.exponents) // 2

    @cached_property
    def array(self) -> np.ndarray:
        """Exponents as an integer array of shape ``(|Λ|, d)``."""
        return np.array(self.exponents, dtype=np.int64).reshape(len(self), self.dim)

    @cached_property
    def reflection(self) -> np.ndarray:
        """Permutation mapping the position of ``k`` to the position of ``-k``."""
        return np.arange(len(self) - 1, -1, -1)

    @cached_property
    def half_positions(self) -> np.ndarray:
        """Positions of the exponents strictly after the origin (one per ±k pair)."""
        return np.arange(self.zero_position + 1, len(self))

    @cached_property
    def max_abs(self) -> Tuple[int, ...]:
        return tuple(int(v) for v in np.abs(self.array).max(axis=0))

    @cached_property
    def box_radii(self) -> Tuple[int, ...] | None:
        """Radii if this set is a full box, otherwise None."""
        candidate = IndexSet.box(*self.max_abs)
        return self.max_abs if candidate.exponents == self.exponents else None

    def require_same(self, other: "IndexSet", what: str = "operands") -> None:
        if self != other:
            raise IndexSetMismatchError(
                f"Index sets of {what} differ ({len(self)} vs {len(other)} exponents, dims {self.dim}/{other.dim})"
            )

    def difference_layout(self) -> Tuple["IndexSet", np.ndarray]:
        """Return (Λ − Λ, L) with ``L[l, k]`` the position of ``λ_l − λ_k`` in Λ − Λ."""
        return _difference_layout(self)


def _difference_layout_uncached(index_set: IndexSet) -> Tuple[IndexSet, np.ndarray]:
    arr = index_set.array
    diffs = arr[:, None, :] - arr[None, :, :]
    flat: List[Exponent] = sorted({tuple(int(v) for v in row) for row in diffs.reshape(-1, index_set.dim)})
    diff_set = IndexSet(dim=index_set.dim, exponents=tuple(flat))
    lookup = diff_set._positions
    n = len(index_set)
    layout = np.empty((n, n), dtype=np.int64)
    for l in range(n):
        for k in range(n):
            layout[l, k] = lookup[tuple(int(v) for v in diffs[l, k])]
    return diff_set, layout


_LAYOUT_CACHE: Dict[IndexSet, Tuple[IndexSet, np.ndarray]] = {}


def _difference_layout(index_set: IndexSet) -> Tuple[IndexSet, np.ndarray]:
    cached = _LAYOUT_CACHE.get(index_set)
    if cached is None:
        cached = _difference_layout_uncached(index_set)
        _LAYOUT_CACHE[index_set] = cached
    return cached
