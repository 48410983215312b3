"""Index sets, Hermitian coefficient sequences, weight matrices and cone tests.

The cone tests live in :mod:`trigcore.cones`; they need the grid package and
are therefore not imported here.
"""

from .index_set import IndexSet  # noqa: F401
from .sequences import HermitianSeq, eval_poly, inner_product  # noqa: F401
from .weights import WeightMatrix  # noqa: F401

__all__ = ["IndexSet", "HermitianSeq", "WeightMatrix", "eval_poly", "inner_product"]
