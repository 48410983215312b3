from __future__ import annotations


class FormatError(ValueError):
    """Raised when an input file does not follow the expected text/binary layout."""


class IndexSetMismatchError(ValueError):
    """Raised when two objects are defined on different exponent sets."""
