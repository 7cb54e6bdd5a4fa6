"""Boundary triangle extraction and orientation recovery.

A face triple belongs to the surface iff exactly one element has it.
Surface triangles are first collected in sorted (unoriented) form, then
oriented by looking up the owning element and emitting the matching face
in FemLib order::

    face 0: (v0, v1, v2)    face 1: (v1, v3, v2)
    face 2: (v2, v3, v0)    face 3: (v0, v3, v1)

For a positively oriented element these faces have normals pointing into
the element, so a closed surface from a positively oriented mesh comes out
with inward normals.
"""

from __future__ import annotations

from collections import Counter
from typing import NamedTuple, Sequence

import numpy as np

from .errors import ConnectivityError, MeshError
from .mesh import MeshStore

# (tet face rank, tet vertex rank, triangle vertex rank)
FEMLIB_TET_FACES = (
    (0, 0, 0),
    (0, 1, 1),
    (0, 2, 2),
    (1, 1, 0),
    (1, 3, 1),
    (1, 2, 2),
    (2, 2, 0),
    (2, 3, 1),
    (2, 0, 2),
    (3, 0, 0),
    (3, 3, 1),
    (3, 1, 2),
)


def _face_orders(table):
    orders = [[None] * 3 for _ in range(4)]
    for face, tet_rank, tri_rank in table:
        orders[face][tri_rank] = tet_rank
    return tuple(tuple(o) for o in orders)


# FEMLIB_FACE_ORDER[f] lists tet vertex ranks in triangle order for face f
FEMLIB_FACE_ORDER = _face_orders(FEMLIB_TET_FACES)


class UnorientedTriangle(NamedTuple):
    tri_id: int
    a: int
    b: int
    c: int


class OrientedTriangle(NamedTuple):
    tri_id: int
    elem_id: int
    face_rank: int
    v: tuple[int, int, int]


def femlib_face(quad: Sequence[int], face_rank: int) -> tuple[int, int, int]:
    """Oriented triangle ``face_rank`` of the tetrahedron ``quad = (v0, v1, v2, v3)``."""
    a, b, c = FEMLIB_FACE_ORDER[face_rank]
    return (quad[a], quad[b], quad[c])


def _sorted_faces(store: MeshStore) -> np.ndarray:
    """``(4n, 3)`` sorted vertex-id triples, FemLib face order within each element."""
    tv = store.tet_vertex_ids()
    faces = tv[:, np.array(FEMLIB_FACE_ORDER)]
    return np.sort(faces, axis=-1).reshape(-1, 3)


def face_multiplicities(store: MeshStore) -> tuple[np.ndarray, np.ndarray]:
    """Distinct sorted face triples (lexicographic) and how many elements share each."""
    store.freeze()
    return np.unique(_sorted_faces(store), axis=0, return_counts=True)


def extract_unoriented(store: MeshStore) -> list[UnorientedTriangle]:
    """Sorted triples bounding exactly one element, numbered 1.. in lexicographic order.

    Raises
    ------
    ConnectivityError
        If some triple is shared by more than two elements.
    """
    triples, counts = face_multiplicities(store)
    over = np.flatnonzero(counts > 2)
    if len(over):
        worst = tuple(int(v) for v in triples[over[0]])
        raise ConnectivityError(
            f"{len(over)} face(s) shared by more than two elements, e.g. {worst} "
            f"({int(counts[over[0]])} elements)")
    boundary = triples[counts == 1].tolist()
    return [UnorientedTriangle(i, a, b, c) for i, (a, b, c) in enumerate(boundary, start=1)]


def orient(store: MeshStore, tris: Sequence[UnorientedTriangle]) -> list[OrientedTriangle]:
    """Give each surface triangle the vertex order of its owning element's FemLib face.

    Raises
    ------
    MeshError
        If a triangle matches no element face, or more than one.
    """
    store.freeze()
    if not tris:
        return []
    tri_rows = np.sort(np.array([(t.a, t.b, t.c) for t in tris], dtype=np.int64), axis=-1)
    faces = _sorted_faces(store)
    m = len(tri_rows)
    _, inv = np.unique(np.concatenate([tri_rows, faces]), axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    tri_key, face_key = inv[:m], inv[m:]
    if len(np.unique(tri_key)) != m:
        raise MeshError("duplicate triangles in orientation input")
    slot = np.full(inv.max() + 1, -1, dtype=np.int64)
    slot[tri_key] = np.arange(m)
    match = slot[face_key]

    hits = np.flatnonzero(match >= 0)
    per_tri = np.bincount(match[hits], minlength=m)
    if (per_tri != 1).any():
        k = int(np.flatnonzero(per_tri != 1)[0])
        raise MeshError(f"triangle {tris[k].tri_id} {tuple(tri_rows[k])} matches "
                        f"{int(per_tri[k])} element faces; expected exactly one")

    tv = store.tet_vertex_ids()
    out: list[OrientedTriangle | None] = [None] * m
    for h in hits.tolist():
        idx, face = divmod(h, 4)
        k = int(match[h])
        quad = tv[idx].tolist()
        out[k] = OrientedTriangle(tris[k].tri_id, int(store.elem_ids[idx]), face,
                                  femlib_face(quad, face))
    return sorted(out, key=lambda t: t.tri_id)


def oriented_surface(store: MeshStore) -> list[OrientedTriangle]:
    return orient(store, extract_unoriented(store))


def normalized_rows(oriented: Sequence[OrientedTriangle]) -> list[tuple[int, int, int]]:
    """``(tri_id, rank, vertex_id)`` rows of oriented triangles."""
    return [(t.tri_id, r, v) for t in oriented for r, v in enumerate(t.v)]


def coherence_defects(oriented: Sequence[OrientedTriangle]) -> list[tuple[int, int]]:
    """Directed edges breaking pairwise opposite traversal.

    On a coherently oriented closed surface every directed edge ``(a, b)``
    occurs once and its reverse ``(b, a)`` occurs once.
    """
    directed = Counter()
    for t in oriented:
        a, b, c = t.v
        directed.update(((a, b), (b, c), (c, a)))
    bad = []
    for (a, b), n in directed.items():
        if n != 1 or directed.get((b, a), 0) != 1:
            bad.append((a, b))
    return sorted(bad)
