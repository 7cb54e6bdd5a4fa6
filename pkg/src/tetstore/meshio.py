"""Text and binary mesh formats, plus the structured box generator.

Text files have no header row.  Layouts::

    vertices   VertexID,x,y,z
    tets       ElemID,v0,v1,v2,v3
    field      VertexID,value
    points     x,y,z
    locate     x,y,z,ElemID          (-1 if not contained)
    partition  ElemID,PartitionID
    surface    TriID,v0,v1,v2
    surface    TriID,Rank,VertexID   (normalized form)

The archive (``.tmq``) is a little-endian binary snapshot::

    magic "TMQ1" | u32 version | u32 flags | u64 n_vertices | u64 n_rows
    i32[n_vertices] vertex ids
    f64[n_vertices, 3] coordinates
    i32[n_rows, 3] (elem_id, rank, vertex_id) rows
    if flags & 1:
        f64[3] box min | f64[3] box max | u32 bits | u32 reserved
        u64 n_tets | i64[n_tets] Hilbert codes (element first-appearance order)
"""

from __future__ import annotations

import csv
import itertools
import math
import os
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CorruptArchiveError, ParseError
from .hilbert import Quantizer, attach_hcodes
from .mesh import INT32_MAX, INT32_MIN, MeshStore, TetQuad, Vertex

ARCHIVE_MAGIC = b"TMQ1"
ARCHIVE_VERSION = 1
FLAG_HCODES = 1

_HEADER = struct.Struct("<4sIIQQ")
_QUANT = struct.Struct("<6dIIQ")


def parse_delimiter(name: str) -> str:
    """Map CLI spellings (``tab``, ``\\t``, ``comma``) to a single character."""
    aliases = {"tab": "\t", "\\t": "\t", "comma": ",", "space": " "}
    d = aliases.get(name, name)
    if len(d) != 1:
        raise ValueError(f"delimiter must be a single character, got {name!r}")
    return d


def _rows(path, delimiter):
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f, delimiter=delimiter), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            yield lineno, [c.strip() for c in row]


def _int(text, path, lineno, what):
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not an integer", path, lineno) from None


def _float(text, path, lineno, what):
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{what} {text!r} is not a number", path, lineno) from None
    if not math.isfinite(v):
        raise ParseError(f"{what} {text!r} is not finite", path, lineno)
    return v


def _expect(row, n, path, lineno, layout):
    if len(row) != n:
        raise ParseError(f"expected {n} fields ({layout}), got {len(row)}", path, lineno)


def load_vertices_csv(path, delimiter: str = ",") -> list[Vertex]:
    out = []
    seen = set()
    for lineno, row in _rows(path, delimiter):
        _expect(row, 4, path, lineno, "VertexID,x,y,z")
        vid = _int(row[0], path, lineno, "VertexID")
        if vid in seen:
            raise ParseError(f"duplicate VertexID {vid}", path, lineno)
        seen.add(vid)
        x, y, z = (_float(c, path, lineno, "coordinate") for c in row[1:])
        out.append(Vertex(vid, x, y, z))
    return out


def load_tets_csv(path, delimiter: str = ",") -> list[TetQuad]:
    out = []
    seen = set()
    for lineno, row in _rows(path, delimiter):
        _expect(row, 5, path, lineno, "ElemID,v0,v1,v2,v3")
        eid = _int(row[0], path, lineno, "ElemID")
        if eid in seen:
            raise ParseError(f"duplicate ElemID {eid}", path, lineno)
        seen.add(eid)
        out.append(TetQuad(eid, *(_int(c, path, lineno, "VertexID") for c in row[1:])))
    return out


def load_points_csv(path, delimiter: str = ",") -> np.ndarray:
    pts = []
    for lineno, row in _rows(path, delimiter):
        _expect(row, 3, path, lineno, "x,y,z")
        pts.append([_float(c, path, lineno, "coordinate") for c in row])
    return np.array(pts, dtype=np.float64).reshape(-1, 3)


def load_field_csv(path, delimiter: str = ",") -> dict[int, float]:
    values = {}
    for lineno, row in _rows(path, delimiter):
        _expect(row, 2, path, lineno, "VertexID,value")
        vid = _int(row[0], path, lineno, "VertexID")
        if vid in values:
            raise ParseError(f"duplicate VertexID {vid}", path, lineno)
        values[vid] = _float(row[1], path, lineno, "value")
    return values


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(int(v))


def write_rows(path, rows: Iterable[Sequence], delimiter: str = ",") -> int:
    n = 0
    with open(path, "w", newline="") as f:
        for row in rows:
            f.write(delimiter.join(_fmt(v) for v in row))
            f.write("\n")
            n += 1
    return n


def write_vertices_csv(store: MeshStore, path, delimiter: str = ",") -> int:
    return write_rows(path, ((int(i), float(x), float(y), float(z))
                             for i, (x, y, z) in zip(store.vertex_ids.tolist(),
                                                     store.coords.tolist())), delimiter)


def write_tets_csv(store: MeshStore, path, delimiter: str = ",") -> int:
    return write_rows(path, ((q.elem_id, *q.vertices) for q in store.quads()), delimiter)


# -- archive --------------------------------------------------------------

def _as_int32(arr, what):
    arr = np.asarray(arr, dtype=np.int64)
    if arr.size and (arr.min() < INT32_MIN or arr.max() > INT32_MAX):
        raise ValueError(f"{what} do not fit in 32 bits")
    return arr.astype("<i4")


def archive_bytes(store: MeshStore) -> bytes:
    store.freeze()
    has_codes = store.hcodes is not None
    rows = np.stack([store.row_elem, store.row_rank, store.row_vertex], axis=1)
    parts = [
        _HEADER.pack(ARCHIVE_MAGIC, ARCHIVE_VERSION, FLAG_HCODES if has_codes else 0,
                     store.n_vertices, len(rows)),
        _as_int32(store.vertex_ids, "vertex ids").tobytes(),
        store.coords.astype("<f8").tobytes(),
        _as_int32(rows, "tet-vertex rows").tobytes(),
    ]
    if has_codes:
        q = store.quantizer
        parts.append(_QUANT.pack(*q.lo, *q.hi, q.bits, 0, store.n_tets))
        parts.append(np.asarray(store.hcodes, dtype="<i8").tobytes())
    return b"".join(parts)


def save_archive(store: MeshStore, path) -> None:
    data = archive_bytes(store)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)


def load_archive(path) -> MeshStore:
    """Read an archive into a frozen store; stored Hilbert codes are reused as is."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CorruptArchiveError(f"{path}: file too short for header")
    magic, version, flags, nv, nrows = _HEADER.unpack_from(data, 0)
    if magic != ARCHIVE_MAGIC:
        raise CorruptArchiveError(f"{path}: bad magic {magic!r}")
    if version != ARCHIVE_VERSION:
        raise CorruptArchiveError(f"{path}: unsupported archive version {version}")
    if flags & ~FLAG_HCODES:
        raise CorruptArchiveError(f"{path}: unknown flags {flags:#x}")
    off = _HEADER.size
    need = off + 4 * nv + 24 * nv + 12 * nrows
    if len(data) < need:
        raise CorruptArchiveError(f"{path}: truncated ({len(data)} < {need} bytes)")
    vids = np.frombuffer(data, "<i4", nv, off).astype(np.int64)
    off += 4 * nv
    coords = np.frombuffer(data, "<f8", 3 * nv, off).reshape(nv, 3).astype(np.float64)
    off += 24 * nv
    rows = np.frombuffer(data, "<i4", 3 * nrows, off).reshape(nrows, 3).astype(np.int64)
    off += 12 * nrows
    codes = q = None
    if flags & FLAG_HCODES:
        if len(data) < off + _QUANT.size:
            raise CorruptArchiveError(f"{path}: truncated Hilbert block")
        *box, bits, _, ntets = _QUANT.unpack_from(data, off)
        off += _QUANT.size
        if len(data) < off + 8 * ntets:
            raise CorruptArchiveError(f"{path}: truncated Hilbert block")
        codes = np.frombuffer(data, "<i8", ntets, off).astype(np.int64)
        off += 8 * ntets
        try:
            q = Quantizer(tuple(box[:3]), tuple(box[3:]), bits)
        except ValueError as exc:
            raise CorruptArchiveError(f"{path}: bad quantizer block: {exc}") from None
    if off != len(data):
        raise CorruptArchiveError(f"{path}: {len(data) - off} trailing byte(s)")
    store = MeshStore(vids, coords, rows[:, 0], rows[:, 1], rows[:, 2])
    try:
        store.freeze()
    except ValueError as exc:
        raise CorruptArchiveError(f"{path}: {exc}") from exc
    if codes is not None:
        if len(codes) != store.n_tets:
            raise CorruptArchiveError(f"{path}: {len(codes)} codes for {store.n_tets} elements")
        attach_hcodes(store, q, codes)
    return store


# -- generator ------------------------------------------------------------

def _kuhn_offsets() -> list[tuple[tuple[int, int, int], ...]]:
    """Six positively oriented tetrahedra of the unit cube around its main diagonal."""
    tets = []
    for perm in itertools.permutations(range(3)):
        c = [0, 0, 0]
        path = [tuple(c)]
        for axis in perm:
            c[axis] = 1
            path.append(tuple(c))
        e = np.array(path[1:]) - np.array(path[0])
        if np.linalg.det(e) < 0:
            path[2], path[3] = path[3], path[2]
        tets.append(tuple(path))
    return tets


KUHN_TETS = _kuhn_offsets()


def generate_box(nx: int, ny: int, nz: int, lo=(0.0, 0.0, 0.0), hi=(1.0, 1.0, 1.0)) -> MeshStore:
    """Structured ``nx * ny * nz`` grid, six Kuhn tetrahedra per cell.

    Vertex and element ids start at 1.  The result is frozen.
    """
    for name, n in (("nx", nx), ("ny", ny), ("nz", nz)):
        if int(n) != n or n < 1:
            raise ValueError(f"{name} must be a positive integer, got {n}")
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if not (lo < hi).all():
        raise ValueError(f"box needs min < max on every axis: {lo} {hi}")
    xs = np.linspace(lo[0], hi[0], nx + 1)
    ys = np.linspace(lo[1], hi[1], ny + 1)
    zs = np.linspace(lo[2], hi[2], nz + 1)
    Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
    coords = np.stack([X.ravel(), Y.ravel(), Z.ravel()], axis=1)
    vids = np.arange(1, len(coords) + 1, dtype=np.int64)

    k, j, i = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij")
    i, j, k = i.ravel(), j.ravel(), k.ravel()
    tets = []
    for tet in KUHN_TETS:
        corners = [1 + (i + di) + (nx + 1) * ((j + dj) + (ny + 1) * (k + dk))
                   for di, dj, dk in tet]
        tets.append(np.stack(corners, axis=1))
    # element order: cell-major, then the six Kuhn tets
    conn = np.stack(tets, axis=1).reshape(-1, 4)
    elem_ids = np.arange(1, len(conn) + 1, dtype=np.int64)
    return MeshStore.from_arrays(vids, coords, elem_ids, conn).freeze()
