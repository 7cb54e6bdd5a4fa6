"""Vertex incidence index and lazily memoized face-neighbor lookup."""

from __future__ import annotations

import numpy as np

from .errors import ConnectivityError, NotFoundError
from .mesh import BOUNDARY, MeshStore


def build_incidence(store: MeshStore) -> list[tuple[int, ...]]:
    """Per vertex index, the ascending tuple of element indices using it."""
    store.freeze()
    with store._lock:
        if store.incidence is not None:
            return store.incidence
        flat = store.tet_vidx.reshape(-1)
        order = np.argsort(flat, kind="stable")
        elems = (order // 4).tolist()
        counts = np.bincount(flat, minlength=store.n_vertices)
        bounds = np.concatenate([[0], np.cumsum(counts)]).tolist()
        store.incidence = [tuple(elems[bounds[v]:bounds[v + 1]])
                           for v in range(store.n_vertices)]
    return store.incidence


def neighbor_index(store: MeshStore, idx: int, rank: int) -> int:
    """Element index across face ``rank`` of element index ``idx``, or -1.

    Results are memoized in ``store.neighbor_cache`` together with the
    symmetric entry seen from the neighbor.  Concurrent callers may compute
    the same entry twice; both write the same value.
    """
    cache = store.neighbor_cache
    hit = cache.get((idx, rank))
    if hit is not None:
        return hit
    incidence = store.incidence
    if incidence is None:
        incidence = build_incidence(store)
    vs = store.tet_vidx[idx].tolist()
    face = [vs[k] for k in range(4) if k != rank]
    found = set(incidence[face[0]]).intersection(incidence[face[1]], incidence[face[2]])
    found.discard(idx)
    if len(found) > 1:
        ids = sorted(int(store.elem_ids[i]) for i in found)
        raise ConnectivityError(
            f"face {rank} of element {int(store.elem_ids[idx])} is shared by "
            f"several other elements {ids}; the connectivity is corrupt")
    if not found:
        cache[(idx, rank)] = BOUNDARY
        return BOUNDARY
    nb = found.pop()
    shared = set(face)
    nvs = store.tet_vidx[nb].tolist()
    back = next(k for k in range(4) if nvs[k] not in shared)
    cache[(idx, rank)] = nb
    cache.setdefault((nb, back), idx)
    return nb


def _elem_idx(store: MeshStore, elem_id: int) -> int:
    store.freeze()
    try:
        return store.elem_index[int(elem_id)]
    except KeyError:
        raise NotFoundError(f"unknown element {elem_id}") from None


def face_neighbor(store: MeshStore, elem_id: int, opposite_vertex: int) -> int:
    """Id of the element sharing the face opposite corner ``opposite_vertex``.

    Returns -1 when that face lies on the mesh surface.

    Raises
    ------
    NotFoundError
        Unknown ``elem_id``.
    ConnectivityError
        More than one other element shares the face.
    """
    if not 0 <= opposite_vertex <= 3:
        raise ValueError(f"face rank must be in 0..3, got {opposite_vertex}")
    idx = _elem_idx(store, elem_id)
    nb = neighbor_index(store, idx, opposite_vertex)
    return BOUNDARY if nb == BOUNDARY else int(store.elem_ids[nb])


def elements_of_vertex(store: MeshStore, vertex_id: int) -> list[int]:
    """Sorted ids of every element that uses ``vertex_id``."""
    store.freeze()
    try:
        v = store.vertex_index[int(vertex_id)]
    except KeyError:
        raise NotFoundError(f"unknown vertex {vertex_id}") from None
    incidence = store.incidence or build_incidence(store)
    return sorted(int(store.elem_ids[i]) for i in incidence[v])


def boundary_face_count(store: MeshStore) -> int:
    """Number of ``(element, rank)`` pairs whose face neighbor is -1."""
    store.freeze()
    return sum(1 for idx in range(store.n_tets) for r in range(4)
               if neighbor_index(store, idx, r) == BOUNDARY)
