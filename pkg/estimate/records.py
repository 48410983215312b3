"""Data record (tensor) files.

Text form (``.txt``/``.csv``/``.dat``)::

    d N1 ... Nd
    value            (real records, one per line, row-major)
    re im            (complex records)

Binary form (``.bin``): magic, then little-endian int64 ``d``, complex flag,
``N1..Nd``, followed by float64 samples (real/imaginary interleaved for
complex records).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from trigcore.errors import FormatError

_MAGIC = b"CVXTENS1"
BINARY_SUFFIXES = {".bin"}


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_tensor(data: np.ndarray, path: str | Path) -> Path:
    out = Path(path)
    arr = np.asarray(data)
    is_complex = np.iscomplexobj(arr)
    if out.suffix.lower() in BINARY_SUFFIXES:
        with out.open("wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<qq", arr.ndim, int(is_complex)))
            fh.write(struct.pack(f"<{arr.ndim}q", *arr.shape))
            if is_complex:
                payload = np.ascontiguousarray(arr, dtype=np.complex128).view("<f8")
            else:
                payload = np.ascontiguousarray(arr, dtype="<f8")
            fh.write(payload.tobytes())
        return out
    lines = [" ".join(str(v) for v in (arr.ndim, *arr.shape))]
    flat = arr.reshape(-1)
    if is_complex:
        lines.extend(f"{_fmt(z.real)} {_fmt(z.imag)}" for z in flat)
    else:
        lines.extend(_fmt(x) for x in flat)
    out.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return out


def read_tensor(path: str | Path) -> np.ndarray:
    """Read a record written by :func:`write_tensor`.

    Raises:
        FormatError: On a malformed header or a sample count mismatch.
    """
    p = Path(path)
    if p.suffix.lower() in BINARY_SUFFIXES:
        return _read_binary(p)
    try:
        raw = [ln.split() for ln in p.read_text(encoding="utf-8").splitlines() if ln.strip()]
    except OSError as exc:
        raise FormatError(f"Cannot read {p}: {exc}") from None
    if not raw:
        raise FormatError(f"{p}: empty record file")
    try:
        header = [int(v) for v in raw[0]]
    except ValueError:
        raise FormatError(f"{p}: header must be integers 'd N1 ... Nd'") from None
    if len(header) < 2 or header[0] != len(header) - 1 or any(n < 1 for n in header[1:]):
        raise FormatError(f"{p}: header {raw[0]} does not match 'd N1 ... Nd'")
    shape = tuple(header[1:])
    body = raw[1:]
    if len(body) != int(np.prod(shape)):
        raise FormatError(f"{p}: expected {int(np.prod(shape))} samples, found {len(body)}")
    widths = {len(row) for row in body}
    if widths - {1, 2}:
        raise FormatError(f"{p}: samples must be 'value' or 're im'")
    try:
        if widths == {1}:
            return np.array([float(row[0]) for row in body]).reshape(shape)
        values = [complex(float(row[0]), float(row[1]) if len(row) == 2 else 0.0) for row in body]
    except ValueError:
        raise FormatError(f"{p}: non-numeric sample") from None
    return np.array(values, dtype=np.complex128).reshape(shape)


def _read_binary(p: Path) -> np.ndarray:
    data = p.read_bytes()
    if not data.startswith(_MAGIC):
        raise FormatError(f"{p}: not a tensor record")
    pos = len(_MAGIC)
    try:
        ndim, is_complex = struct.unpack_from("<qq", data, pos)
        pos += 16
        shape = struct.unpack_from(f"<{ndim}q", data, pos)
        pos += 8 * ndim
    except struct.error:
        raise FormatError(f"{p}: truncated header") from None
    count = int(np.prod(shape)) * (2 if is_complex else 1)
    values = np.frombuffer(data, dtype="<f8", offset=pos)
    if values.size != count:
        raise FormatError(f"{p}: expected {count} float64 values, found {values.size}")
    if is_complex:
        return values.astype(float).view(np.complex128).reshape(shape)
    return values.astype(float).reshape(shape)
