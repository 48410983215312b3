from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from config.settings import default_grid_points
from trigcore.index_set import IndexSet


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the torus T^d with nodes θ_j = 2π(j + s)/N.

    Args:
        points: Number of nodes per axis.
        offset: If True, nodes are shifted by half a sample (s = 1/2).
    """

    points: Tuple[int, ...]
    offset: bool = True

    def __post_init__(self) -> None:
        pts = tuple(int(n) for n in self.points)
        if not pts:
            raise ValueError("GridSpec needs at least one axis")
        if any(n < 1 for n in pts):
            raise ValueError(f"Grid points per axis must be positive, got {pts}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, dim: int, points: int, offset: bool = True) -> "GridSpec":
        return cls(points=(points,) * dim, offset=offset)

    @classmethod
    def for_index_set(
        cls, index_set: IndexSet, points: Optional[int | Sequence[int]] = None, offset: bool = True
    ) -> "GridSpec":
        """Default grid for Λ (512 nodes in 1-D, 50x50 in 2-D unless configured)."""
        if points is None:
            pts: Tuple[int, ...] = (default_grid_points(index_set.dim),) * index_set.dim
        elif isinstance(points, (int, np.integer)):
            pts = (int(points),) * index_set.dim
        else:
            pts = tuple(int(n) for n in points)
        spec = cls(points=pts, offset=offset)
        spec.require_resolves(index_set)
        return spec

    @property
    def dim(self) -> int:
        return len(self.points)

    @property
    def size(self) -> int:
        return int(np.prod(self.points))

    @property
    def shift(self) -> float:
        return 0.5 if self.offset else 0.0

    def refined(self, factor: int, offset: Optional[bool] = None) -> "GridSpec":
        return GridSpec(
            points=tuple(n * int(factor) for n in self.points),
            offset=self.offset if offset is None else offset,
        )

    def require_resolves(self, index_set: IndexSet) -> None:
        """Raise ValueError unless N_j >= 2·max|k_j| + 1 on every axis."""
        if index_set.dim != self.dim:
            raise ValueError(f"Grid has dimension {self.dim} but index set has dimension {index_set.dim}")
        for axis, (n, m) in enumerate(zip(self.points, index_set.max_abs)):
            if n < 2 * m + 1:
                raise ValueError(
                    f"Grid too coarse on axis {axis}: {n} points, need at least {2 * m + 1} for |k| <= {m}"
                )

    def axis_nodes(self, axis: int) -> np.ndarray:
        n = self.points[axis]
        return 2.0 * np.pi * (np.arange(n) + self.shift) / n

    def node(self, index: Sequence[int]) -> np.ndarray:
        return np.array([2.0 * np.pi * (int(j) + self.shift) / n for j, n in zip(index, self.points)])

    def nodes(self) -> Tuple[np.ndarray, ...]:
        """Meshgrid of node coordinates, each of shape ``points``."""
        return tuple(np.meshgrid(*[self.axis_nodes(a) for a in range(self.dim)], indexing="ij"))


@dataclass(frozen=True, eq=False)
class GridField:
    """Real samples of a function on the nodes of a :class:`GridSpec`."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float)
        if vals.shape != self.grid.points:
            raise ValueError(f"Field shape {vals.shape} does not match grid {self.grid.points}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("GridField values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def mean(self) -> float:
        return float(np.mean(self.values))

    def min(self) -> float:
        return float(np.min(self.values))

    def max(self) -> float:
        return float(np.max(self.values))
