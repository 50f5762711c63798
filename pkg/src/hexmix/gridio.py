"""Text serialization of height fields and trajectories.

Height-grid format: a header line ``hex na nb nc`` followed by one line per
y (ascending), whitespace-separated entries per x, with ``.`` at lattice
points outside the hexagon.  Round trips are byte-exact.

Trajectory format: ``key: value`` metadata lines, a blank line, then
``snapshot t=<time>`` sections each followed by a height grid.
"""

from __future__ import annotations

import hashlib
import io

import numpy as np

from .hexlattice import OUTSIDE, HexDomain, HeightField, HexlatticeError, is_admissible


class GridFormatError(ValueError):
    pass


def dump_field(f: HeightField) -> str:
    d = f.domain
    lines = [f"hex {d.na} {d.nb} {d.nc}"]
    for y in range(d.ny):
        row = []
        for x in range(d.nx):
            row.append(str(int(f.h[x, y])) if d.contains(x, y) else ".")
        lines.append(" ".join(row))
    return "\n".join(lines) + "\n"


def load_field(text: str) -> HeightField:
    lines = text.splitlines()
    if not lines:
        raise GridFormatError("empty height-grid document")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "hex":
        raise GridFormatError(f"bad header line {lines[0]!r}")
    try:
        na, nb, nc = (int(s) for s in head[1:])
        d = HexDomain(na, nb, nc)
    except (ValueError, HexlatticeError) as e:
        raise GridFormatError(f"bad header line {lines[0]!r}") from e
    if len(lines) < 1 + d.ny:
        raise GridFormatError(f"expected {d.ny} grid rows, got {len(lines) - 1}")
    h = np.full((d.nx, d.ny), OUTSIDE, dtype=np.int64)
    for y in range(d.ny):
        row = lines[1 + y].split()
        if len(row) != d.nx:
            raise GridFormatError(f"row y={y}: expected {d.nx} entries, got {len(row)}")
        for x, tok in enumerate(row):
            inside = d.contains(x, y)
            if tok == ".":
                if inside:
                    raise GridFormatError(f"missing value at in-domain vertex {(x, y)}")
                continue
            if not inside:
                raise GridFormatError(f"value given at out-of-domain vertex {(x, y)}")
            try:
                h[x, y] = int(tok)
            except ValueError as e:
                raise GridFormatError(f"bad entry {tok!r} at {(x, y)}") from e
    f = HeightField(d, h)
    if not is_admissible(f):
        raise GridFormatError("grid is not an admissible height field")
    return f


def field_digest(f: HeightField) -> str:
    return hashlib.sha256(dump_field(f).encode()).hexdigest()[:16]


def dump_trajectory(meta: dict, snapshots: list[tuple[float, HeightField]]) -> str:
    out = io.StringIO()
    for k, v in meta.items():
        out.write(f"{k}: {v}\n")
    out.write("\n")
    for t, f in snapshots:
        out.write(f"snapshot t={t!r}\n")
        out.write(dump_field(f))
    return out.getvalue()


def load_trajectory(text: str) -> tuple[dict, list[tuple[float, HeightField]]]:
    head, _, body = text.partition("\n\n")
    meta = {}
    for line in head.splitlines():
        k, sep, v = line.partition(": ")
        if not sep:
            raise GridFormatError(f"bad metadata line {line!r}")
        meta[k] = v
    snaps = []
    chunks = body.split("snapshot t=")
    if chunks and chunks[0].strip():
        raise GridFormatError("trajectory body must start with a snapshot")
    for chunk in chunks[1:]:
        tline, _, grid = chunk.partition("\n")
        snaps.append((float(tline), load_field(grid)))
    return meta, snaps
