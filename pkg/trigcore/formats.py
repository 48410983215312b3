"""Text formats for coefficient sequences and weight matrices.

Coefficient files::

    d n1 ... nd
    k1 ... kd re im      (one line per exponent of the full box, lexicographic)

Weight files::

    W n
    re im re im ...      (n rows of n complex entries)

Writers emit 17 significant digits so that a write/read cycle is exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import List

import numpy as np

from trigcore.errors import FormatError, IndexSetMismatchError
from trigcore.index_set import IndexSet
from trigcore.sequences import HermitianSeq
from trigcore.weights import WeightMatrix


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _content_lines(path: Path) -> List[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"Cannot read {path}: {exc}") from None
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def write_coefficients(seq: HermitianSeq, path: str | Path) -> Path:
    radii = seq.index_set.box_radii
    if radii is None:
        raise ValueError("Coefficient files describe full-box index sets only")
    out = Path(path)
    lines = [" ".join(str(v) for v in (seq.index_set.dim, *radii))]
    for k, v in zip(seq.index_set.exponents, seq.values):
        lines.append(" ".join([*(str(j) for j in k), _fmt(v.real), _fmt(v.imag)]))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def read_coefficients(path: str | Path) -> HermitianSeq:
    p = Path(path)
    lines = _content_lines(p)
    if not lines:
        raise FormatError(f"{p}: empty coefficient file")
    try:
        header = [int(v) for v in lines[0].split()]
    except ValueError:
        raise FormatError(f"{p}: header must be integers 'd n1 ... nd'") from None
    if len(header) < 2 or header[0] != len(header) - 1:
        raise FormatError(f"{p}: header {lines[0]!r} does not match 'd n1 ... nd'")
    dim = header[0]
    index_set = IndexSet.box(*header[1:])
    body = lines[1:]
    if len(body) != len(index_set):
        raise FormatError(f"{p}: expected {len(index_set)} coefficient lines, found {len(body)}")
    values = np.empty(len(index_set), dtype=np.complex128)
    for line, expected in zip(body, index_set.exponents):
        parts = line.split()
        if len(parts) != dim + 2:
            raise FormatError(f"{p}: line {line!r} should have {dim + 2} fields")
        try:
            k = tuple(int(v) for v in parts[:dim])
            re, im = float(parts[dim]), float(parts[dim + 1])
        except ValueError:
            raise FormatError(f"{p}: non-numeric entry in line {line!r}") from None
        if k != expected:
            raise FormatError(f"{p}: exponent {k} out of lexicographic order (expected {expected})")
        values[index_set.position(k)] = complex(re, im)
    try:
        return HermitianSeq(index_set=index_set, values=values)
    except ValueError as exc:
        raise FormatError(f"{p}: {exc}") from None


def write_weight(weight: WeightMatrix, path: str | Path) -> Path:
    out = Path(path)
    n = weight.size
    lines = [f"W {n}"]
    for row in weight.entries:
        lines.append(" ".join(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in row))
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def read_weight(path: str | Path, index_set: IndexSet) -> WeightMatrix:
    p = Path(path)
    lines = _content_lines(p)
    if not lines or not lines[0].startswith("W "):
        raise FormatError(f"{p}: weight file must start with 'W n'")
    try:
        n = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise FormatError(f"{p}: malformed weight header {lines[0]!r}") from None
    if n != len(index_set):
        raise IndexSetMismatchError(f"{p}: weight has size {n}, index set has {len(index_set)} exponents")
    if len(lines) - 1 != n:
        raise FormatError(f"{p}: expected {n} matrix rows, found {len(lines) - 1}")
    mat = np.empty((n, n), dtype=np.complex128)
    for i, line in enumerate(lines[1:]):
        try:
            nums = [float(v) for v in line.split()]
        except ValueError:
            raise FormatError(f"{p}: non-numeric entry in row {i}") from None
        if len(nums) != 2 * n:
            raise FormatError(f"{p}: row {i} should have {2 * n} numbers")
        mat[i] = np.array(nums[0::2]) + 1j * np.array(nums[1::2])
    try:
        return WeightMatrix(index_set=index_set, entries=mat)
    except ValueError as exc:
        raise FormatError(f"{p}: {exc}") from None
