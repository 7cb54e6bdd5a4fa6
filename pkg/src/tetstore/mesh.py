"""Core tetrahedral mesh model.

The tetrahedron-vertex relation is kept in normalized form, one
``(elem_id, rank, vertex_id)`` row per corner.  The quadruple form
``(elem_id, v0, v1, v2, v3)`` is a view pivoted from those rows on demand.
"""

from __future__ import annotations

import threading
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import DegenerateTetError, MalformedElementError, MeshError

INT32_MIN = -(2**31)
INT32_MAX = 2**31 - 1
BOUNDARY = -1

# |signed volume| at or below this is treated as degenerate.
DEGENERATE_VOLUME = 1e-300


@dataclass(frozen=True)
class Vertex:
    vertex_id: int
    x: float
    y: float
    z: float


class TetVertexRow(NamedTuple):
    elem_id: int
    rank: int
    vertex_id: int


@dataclass(frozen=True)
class TetQuad:
    elem_id: int
    v0: int
    v1: int
    v2: int
    v3: int

    @property
    def vertices(self) -> tuple[int, int, int, int]:
        return (self.v0, self.v1, self.v2, self.v3)


def to_quad(rows: Iterable[TetVertexRow]) -> TetQuad:
    """Pivot the four normalized rows of one element into a quadruple.

    Raises
    ------
    MalformedElementError
        If the rows span several elements, a rank is missing or repeated,
        a rank is outside 0..3, or a vertex appears twice.
    """
    rows = [TetVertexRow(*r) for r in rows]
    if not rows:
        raise MalformedElementError("no rows given")
    elem_ids = {r.elem_id for r in rows}
    if len(elem_ids) != 1:
        raise MalformedElementError(f"rows belong to several elements: {sorted(elem_ids)}")
    elem_id = rows[0].elem_id
    by_rank: dict[int, int] = {}
    for r in rows:
        if not 0 <= r.rank <= 3:
            raise MalformedElementError(f"element {elem_id}: rank {r.rank} outside 0..3")
        if r.rank in by_rank:
            raise MalformedElementError(f"element {elem_id}: duplicate rank {r.rank}")
        by_rank[r.rank] = r.vertex_id
    if len(by_rank) != 4:
        missing = sorted(set(range(4)) - set(by_rank))
        raise MalformedElementError(f"element {elem_id}: missing rank(s) {missing}")
    verts = tuple(by_rank[i] for i in range(4))
    if len(set(verts)) != 4:
        raise MalformedElementError(f"element {elem_id}: repeated vertex in {verts}")
    return TetQuad(elem_id, *verts)


def to_normalized(quad: TetQuad) -> list[TetVertexRow]:
    """Unpivot a quadruple into its four ``(elem_id, rank, vertex_id)`` rows."""
    verts = quad.vertices
    if len(set(verts)) != 4:
        raise MalformedElementError(f"element {quad.elem_id}: repeated vertex in {verts}")
    return [TetVertexRow(quad.elem_id, rank, v) for rank, v in enumerate(verts)]


@dataclass(frozen=True)
class Finding:
    kind: str
    detail: str
    elem_id: int | None = None
    vertex_id: int | None = None


@dataclass
class ValidationReport:
    findings: list[Finding] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.findings

    def __bool__(self):
        return self.ok

    def __len__(self):
        return len(self.findings)

    def __iter__(self):
        return iter(self.findings)

    def kinds(self) -> Counter:
        return Counter(f.kind for f in self.findings)

    def add(self, kind, detail, elem_id=None, vertex_id=None):
        self.findings.append(Finding(kind, detail, elem_id, vertex_id))


class MeshStore:
    """Vertices plus the normalized tetrahedron-vertex relation.

    A store is built once, then :meth:`freeze` derives the per-element
    arrays (pivoted vertex indices, corner coordinates, centroids) and
    locks them read-only.  Spatial keys and the vertex incidence index are
    attached afterwards by :func:`tetstore.hilbert.assign_hcodes` and
    :func:`tetstore.adjacency.build_incidence`.
    """

    def __init__(self, vertex_ids, coords, row_elem, row_rank, row_vertex):
        self.vertex_ids = np.asarray(vertex_ids, dtype=np.int64).reshape(-1)
        self.coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
        if len(self.vertex_ids) != len(self.coords):
            raise MeshError("vertex id and coordinate counts differ")
        self.row_elem = np.asarray(row_elem, dtype=np.int64).reshape(-1)
        self.row_rank = np.asarray(row_rank, dtype=np.int64).reshape(-1)
        self.row_vertex = np.asarray(row_vertex, dtype=np.int64).reshape(-1)
        if not len(self.row_elem) == len(self.row_rank) == len(self.row_vertex):
            raise MeshError("tet-vertex row columns differ in length")

        self.frozen = False
        self.elem_ids: np.ndarray | None = None
        self.tet_vidx: np.ndarray | None = None
        self.centroids: np.ndarray | None = None
        self.vertex_index: dict[int, int] = {}
        self.elem_index: dict[int, int] = {}

        # filled by hilbert.assign_hcodes
        self.quantizer = None
        self.hcodes: np.ndarray | None = None
        self.hcode_order: np.ndarray | None = None
        self.sorted_hcodes: np.ndarray | None = None

        # filled by adjacency
        self.incidence = None
        self.neighbor_cache: dict[tuple[int, int], int] = {}
        self._lock = threading.Lock()
        self._corner_cache: list | None = None

    # -- construction -----------------------------------------------------

    @classmethod
    def from_quads(cls, vertices: Iterable[Vertex], quads: Iterable[TetQuad]) -> "MeshStore":
        vertices = list(vertices)
        vids = [v.vertex_id for v in vertices]
        coords = [(v.x, v.y, v.z) for v in vertices]
        rows = [row for q in quads for row in to_normalized(q)]
        return cls.from_rows(vids, coords, rows)

    @classmethod
    def from_rows(cls, vertex_ids, coords, rows: Iterable[TetVertexRow]) -> "MeshStore":
        rows = list(rows)
        cols = np.array(rows, dtype=np.int64).reshape(-1, 3)
        return cls(vertex_ids, np.asarray(coords, dtype=np.float64).reshape(-1, 3),
                   cols[:, 0], cols[:, 1], cols[:, 2])

    @classmethod
    def from_arrays(cls, vertex_ids, coords, elem_ids, tets) -> "MeshStore":
        """Build from a vertex table and an ``(n, 4)`` array of vertex ids."""
        elem_ids = np.asarray(elem_ids, dtype=np.int64)
        tets = np.asarray(tets, dtype=np.int64).reshape(-1, 4)
        if len(elem_ids) != len(tets):
            raise MeshError("element id and connectivity counts differ")
        return cls(vertex_ids, coords,
                   np.repeat(elem_ids, 4),
                   np.tile(np.arange(4, dtype=np.int64), len(elem_ids)),
                   tets.reshape(-1))

    # -- views ------------------------------------------------------------

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_ids)

    @property
    def n_tets(self) -> int:
        if self.elem_ids is not None:
            return len(self.elem_ids)
        return len(np.unique(self.row_elem))

    def rows(self) -> list[TetVertexRow]:
        return [TetVertexRow(int(e), int(r), int(v))
                for e, r, v in zip(self.row_elem, self.row_rank, self.row_vertex)]

    def vertices(self) -> list[Vertex]:
        return [Vertex(int(i), float(x), float(y), float(z))
                for i, (x, y, z) in zip(self.vertex_ids, self.coords)]

    def quads(self) -> list[TetQuad]:
        """Quadruple view of the relation, elements in first-appearance order."""
        groups: dict[int, list[TetVertexRow]] = {}
        for row in self.rows():
            groups.setdefault(row.elem_id, []).append(row)
        return [to_quad(g) for g in groups.values()]

    def quad(self, elem_id: int) -> TetQuad:
        self._require_frozen()
        idx = self.elem_index[elem_id]
        return TetQuad(int(elem_id), *(int(v) for v in self.vertex_ids[self.tet_vidx[idx]]))

    def tet_vertex_ids(self) -> np.ndarray:
        """``(n_tets, 4)`` vertex ids in rank order (frozen stores only)."""
        self._require_frozen()
        return self.vertex_ids[self.tet_vidx]

    def corners(self, idx: int):
        """Corner coordinates of element *index* ``idx`` as four 3-tuples."""
        cache = self._corner_cache
        if cache is None:
            pts = self.coords[self.tet_vidx].tolist()
            cache = [tuple(tuple(p) for p in tet) for tet in pts]
            self._corner_cache = cache
        return cache[idx]

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n_vertices == 0:
            raise MeshError("mesh has no vertices")
        return self.coords.min(axis=0), self.coords.max(axis=0)

    # -- freeze -----------------------------------------------------------

    def freeze(self) -> "MeshStore":
        """Check structure, derive per-element arrays and lock the store.

        Raises
        ------
        MeshError
            On any structural violation (see :func:`validate_mesh`).
        DegenerateTetError
            If an element has ``|signed volume| <= 1e-300``.
        """
        if self.frozen:
            return self
        report = ValidationReport()
        _check_structure(self, report)
        if report.findings:
            first = report.findings[0]
            raise MeshError(f"cannot freeze mesh ({len(report)} finding(s)); "
                            f"first: {first.kind}: {first.detail}")
        if len(self.row_elem) == 0:
            raise MeshError("mesh has no elements")

        self.vertex_index = {int(v): i for i, v in enumerate(self.vertex_ids)}
        elem_ids, tet_vid = _pivot(self.row_elem, self.row_rank, self.row_vertex)
        lookup = self.vertex_index
        tet_vidx = np.array([lookup[int(v)] for v in tet_vid.reshape(-1)],
                            dtype=np.int64).reshape(-1, 4)
        pts = self.coords[tet_vidx]
        vols = _signed_volumes(pts)
        bad = np.flatnonzero(np.abs(vols) <= DEGENERATE_VOLUME)
        if len(bad):
            raise DegenerateTetError(
                f"{len(bad)} degenerate element(s), first elem_id {int(elem_ids[bad[0]])}")

        self.elem_ids = elem_ids
        self.tet_vidx = tet_vidx
        self.centroids = pts.mean(axis=1)
        self.elem_index = {int(e): i for i, e in enumerate(elem_ids)}
        for arr in (self.vertex_ids, self.coords, self.row_elem, self.row_rank,
                    self.row_vertex, self.elem_ids, self.tet_vidx, self.centroids):
            arr.flags.writeable = False
        self.frozen = True
        return self

    def _require_frozen(self):
        if not self.frozen:
            raise MeshError("operation requires a frozen mesh (call freeze())")


def _pivot(row_elem, row_rank, row_vertex):
    """Group rows by element (first-appearance order) into an (n, 4) array."""
    uniq, first, inverse = np.unique(row_elem, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    position = np.empty_like(order)
    position[order] = np.arange(len(order))
    elem_pos = position[inverse]
    tets = np.empty((len(uniq), 4), dtype=np.int64)
    tets[elem_pos, row_rank] = row_vertex
    return uniq[order], tets


def _signed_volumes(pts: np.ndarray) -> np.ndarray:
    e = pts[:, 1:, :] - pts[:, :1, :]
    return np.linalg.det(e) / 6.0


def _check_structure(store: MeshStore, report: ValidationReport) -> set[int]:
    """Record key/reference violations; return the set of broken elem_ids."""
    broken: set[int] = set()

    finite = np.isfinite(store.coords).all(axis=1)
    for i in np.flatnonzero(~finite):
        vid = int(store.vertex_ids[i])
        report.add("non-finite-coordinate", f"vertex {vid} has non-finite coordinates",
                   vertex_id=vid)

    vid_counts = Counter(store.vertex_ids.tolist())
    for vid, n in sorted(vid_counts.items()):
        if n > 1:
            report.add("duplicate-vertex-id", f"vertex id {vid} appears {n} times", vertex_id=vid)
        if not INT32_MIN <= vid <= INT32_MAX:
            report.add("id-range", f"vertex id {vid} does not fit in 32 bits", vertex_id=vid)
    known = set(vid_counts)

    ranks: dict[int, list[int]] = defaultdict(list)
    verts: dict[int, list[int]] = defaultdict(list)
    for e, r, v in zip(store.row_elem.tolist(), store.row_rank.tolist(),
                       store.row_vertex.tolist()):
        ranks[e].append(r)
        verts[e].append(v)

    for e in ranks:
        if not 0 <= e <= INT32_MAX:
            report.add("id-range", f"elem id {e} must be a non-negative 32-bit integer",
                       elem_id=e)
            broken.add(e)
        rs = ranks[e]
        bad_ranks = sorted({r for r in rs if not 0 <= r <= 3})
        if bad_ranks:
            report.add("bad-rank", f"element {e}: rank(s) {bad_ranks} outside 0..3", elem_id=e)
            broken.add(e)
        dup_ranks = sorted(r for r, n in Counter(rs).items() if n > 1)
        if dup_ranks:
            report.add("duplicate-rank", f"element {e}: rank(s) {dup_ranks} repeated", elem_id=e)
            broken.add(e)
        missing = sorted(set(range(4)) - set(rs))
        if missing:
            report.add("missing-rank", f"element {e}: rank(s) {missing} missing", elem_id=e)
            broken.add(e)
        dup_verts = sorted(v for v, n in Counter(verts[e]).items() if n > 1)
        if dup_verts:
            report.add("duplicate-vertex-in-element",
                       f"element {e}: vertex id(s) {dup_verts} repeated (degenerate quad)",
                       elem_id=e)
            broken.add(e)
        for v in verts[e]:
            if v not in known:
                report.add("dangling-vertex", f"element {e} references missing vertex {v}",
                           elem_id=e, vertex_id=v)
                broken.add(e)
    return broken


def validate_mesh(store: MeshStore) -> ValidationReport:
    """Check every relational invariant of the mesh and report violations.

    Never raises.  Besides the key and reference constraints, the face
    tally flags any triangle shared by more than two elements and any pair
    of elements that coincide on all four vertices.  Degenerate volumes are
    reported for structurally sound elements.
    """
    report = ValidationReport()
    broken = _check_structure(store, report)

    vmap = {}
    for i, v in enumerate(store.vertex_ids.tolist()):
        vmap.setdefault(v, i)
    elems: dict[int, list[int]] = {}
    by_elem: dict[int, dict[int, int]] = defaultdict(dict)
    for e, r, v in zip(store.row_elem.tolist(), store.row_rank.tolist(),
                       store.row_vertex.tolist()):
        by_elem[e][r] = v
    for e, m in by_elem.items():
        if e not in broken:
            elems[e] = [m[r] for r in range(4)]

    finite = np.isfinite(store.coords).all(axis=1)
    for e, vs in elems.items():
        idx = [vmap[v] for v in vs]
        if not finite[idx].all():
            continue
        vol = _signed_volumes(store.coords[idx][None])[0]
        if abs(vol) <= DEGENERATE_VOLUME:
            report.add("degenerate-volume", f"element {e} has zero volume", elem_id=e)

    tally: dict[tuple[int, int, int], list[tuple[int, int]]] = defaultdict(list)
    for e, vs in elems.items():
        for opp in range(4):
            face = tuple(sorted(vs[k] for k in range(4) if k != opp))
            tally[face].append((e, vs[opp]))
    for face, owners in tally.items():
        if len(owners) > 2:
            report.add("face-count",
                       f"face {face} shared by {len(owners)} elements "
                       f"{sorted(e for e, _ in owners)}")
        elif len(owners) == 2 and owners[0][1] == owners[1][1]:
            report.add("face-count",
                       f"face {face} duplicated by coincident elements "
                       f"{owners[0][0]} and {owners[1][0]}")
    return report


def quads_to_arrays(quads: Sequence[TetQuad]) -> tuple[np.ndarray, np.ndarray]:
    elem_ids = np.array([q.elem_id for q in quads], dtype=np.int64)
    tets = np.array([q.vertices for q in quads], dtype=np.int64).reshape(-1, 4)
    return elem_ids, tets
