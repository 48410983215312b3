from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from grid.spec import GridField, GridSpec
from trigcore.errors import FormatError

_MAGIC = b"CVXGRID1"


def write_field_csv(field: GridField, path: str | Path) -> Path:
    """Write ``theta1,...,thetad,value`` rows in row-major node order."""
    out = Path(path)
    grid = field.grid
    coords = [c.reshape(-1) for c in grid.nodes()]
    values = field.values.reshape(-1)
    header = [f"theta{a + 1}" for a in range(grid.dim)] + ["value"]
    with out.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# points={' '.join(str(n) for n in grid.points)} offset={int(grid.offset)}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(values.shape[0]):
            writer.writerow([repr(float(c[i])) for c in coords] + [repr(float(values[i]))])
    return out


def read_field_csv(path: str | Path) -> GridField:
    p = Path(path)
    with p.open("r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if not first.startswith("# points="):
            raise FormatError(f"{p}: missing '# points=... offset=...' header")
        try:
            pts_part, off_part = first[len("# points="):].split(" offset=")
            points = tuple(int(v) for v in pts_part.split())
            offset = bool(int(off_part))
        except ValueError:
            raise FormatError(f"{p}: malformed grid header {first!r}") from None
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[-1] != "value" or len(header) != len(points) + 1:
            raise FormatError(f"{p}: unexpected column header {header}")
        try:
            values = [float(row[-1]) for row in reader if row]
        except (ValueError, IndexError):
            raise FormatError(f"{p}: non-numeric value column") from None
    grid = GridSpec(points=points, offset=offset)
    if len(values) != grid.size:
        raise FormatError(f"{p}: expected {grid.size} rows, found {len(values)}")
    return GridField(grid=grid, values=np.array(values).reshape(points))


def write_field_binary(field: GridField, path: str | Path) -> Path:
    """Little-endian dump: magic, d, offset flag, N_1..N_d (int64), then float64 values."""
    out = Path(path)
    grid = field.grid
    with out.open("wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<qq", grid.dim, int(grid.offset)))
        fh.write(struct.pack(f"<{grid.dim}q", *grid.points))
        fh.write(np.ascontiguousarray(field.values, dtype="<f8").tobytes())
    return out


def read_field_binary(path: str | Path) -> GridField:
    p = Path(path)
    data = p.read_bytes()
    if not data.startswith(_MAGIC):
        raise FormatError(f"{p}: not a grid field dump")
    pos = len(_MAGIC)
    try:
        dim, offset = struct.unpack_from("<qq", data, pos)
        pos += 16
        points = struct.unpack_from(f"<{dim}q", data, pos)
        pos += 8 * dim
    except struct.error:
        raise FormatError(f"{p}: truncated header") from None
    grid = GridSpec(points=tuple(points), offset=bool(offset))
    values = np.frombuffer(data, dtype="<f8", offset=pos)
    if values.size != grid.size:
        raise FormatError(f"{p}: expected {grid.size} values, found {values.size}")
    return GridField(grid=grid, values=values.reshape(grid.points).astype(float))
