"""Binary netpbm images: P5 graymaps and P4 bitmaps.

Bitmaps store 1 for black, and bit fields written here use the same
convention, so reading back a written bitmap returns the original field.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple

import numpy as np

from trigcore.errors import FormatError


def _header(raw: bytes, count: int) -> Tuple[List[int], int]:
    """Parse ``count`` integers after the magic number; return them and the payload offset."""
    values: List[int] = []
    pos = 2
    while len(values) < count:
        while pos < len(raw) and raw[pos : pos + 1].isspace():
            pos += 1
        if pos < len(raw) and raw[pos : pos + 1] == b"#":
            while pos < len(raw) and raw[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(raw) and raw[pos : pos + 1].isdigit():
            pos += 1
        if start == pos:
            raise FormatError("Truncated or malformed netpbm header")
        values.append(int(raw[start:pos]))
    # exactly one whitespace byte separates the header from the raster
    return values, pos + 1


def read_pnm(path: str | Path) -> np.ndarray:
    """Read a P5 graymap (uint8/uint16 array) or a P4 bitmap (0/1 uint8 array)."""
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise FormatError(f"Cannot read image {p}: {exc}") from None
    magic = raw[:2]
    if magic == b"P5":
        (width, height, maxval), offset = _header(raw, 3)
        if not 0 < maxval < 65536:
            raise FormatError(f"Invalid maxval {maxval} in {p}")
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
        expected = width * height * dtype.itemsize
        payload = raw[offset : offset + expected]
        if len(payload) != expected:
            raise FormatError(f"Graymap {p} is truncated: {len(payload)} of {expected} bytes")
        return np.frombuffer(payload, dtype=dtype).reshape(height, width).astype(dtype.newbyteorder("="))
    if magic == b"P4":
        (width, height), offset = _header(raw, 2)
        row_bytes = (width + 7) // 8
        expected = row_bytes * height
        payload = raw[offset : offset + expected]
        if len(payload) != expected:
            raise FormatError(f"Bitmap {p} is truncated: {len(payload)} of {expected} bytes")
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8).reshape(height, row_bytes), axis=1)
        return bits[:, :width].astype(np.uint8)
    raise FormatError(f"{p} is not a binary netpbm image (magic {magic!r}); expected P5 or P4")


def write_pgm(image: np.ndarray, path: str | Path) -> Path:
    arr = np.asarray(image)
    if arr.ndim != 2:
        raise ValueError(f"Graymap must be 2-D, got shape {arr.shape}")
    maxval = 65535 if arr.max(initial=0) > 255 else 255
    dtype = np.dtype(">u2") if maxval > 255 else np.dtype(np.uint8)
    out = Path(path)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n{maxval}\n".encode("ascii")
    out.write_bytes(header + np.clip(arr, 0, maxval).astype(dtype).tobytes())
    return out


def write_pbm(bits: np.ndarray, path: str | Path) -> Path:
    arr = np.asarray(bits)
    if arr.ndim != 2:
        raise ValueError(f"Bitmap must be 2-D, got shape {arr.shape}")
    packed = np.packbits((arr != 0).astype(np.uint8), axis=1)
    out = Path(path)
    header = f"P4\n{arr.shape[1]} {arr.shape[0]}\n".encode("ascii")
    out.write_bytes(header + packed.tobytes())
    return out


def binarize(image: np.ndarray) -> np.ndarray:
    """1 where a pixel exceeds the midpoint of the image's minimum and maximum."""
    arr = np.asarray(image, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    if lo == hi:
        raise ValueError("Image is constant; midpoint threshold is undefined")
    return (arr > 0.5 * (lo + hi)).astype(np.uint8)
