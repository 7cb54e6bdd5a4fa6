"""Element partitioning by rank along the Hilbert curve."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .adjacency import neighbor_index
from .hilbert import assign_hcodes
from .mesh import BOUNDARY, MeshStore


@dataclass(frozen=True)
class PartitionAssignment:
    """Parallel arrays: ``elem_ids`` in (hcode, elem_id) order and their 1-based partition."""

    elem_ids: np.ndarray
    partition_ids: np.ndarray
    n_parts: int

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.elem_ids.tolist(), self.partition_ids.tolist()))

    def sizes(self) -> list[int]:
        return np.bincount(self.partition_ids, minlength=self.n_parts + 1)[1:].tolist()


def ntile(n_items: int, n: int) -> np.ndarray:
    """Bucket numbers 1..n for ``n_items`` ranked items.

    The first ``n_items % n`` buckets get one extra item.
    """
    if n_items < 1 or not 1 <= n <= n_items:
        raise ValueError(f"number of partitions must be in 1..{n_items}, got {n}")
    small, extra = divmod(n_items, n)
    sizes = np.full(n, small, dtype=np.int64)
    sizes[:extra] += 1
    return np.repeat(np.arange(1, n + 1, dtype=np.int64), sizes)


def partition(store: MeshStore, n: int) -> PartitionAssignment:
    """Split the elements into ``n`` Hilbert-contiguous parts of near-equal size."""
    store.freeze()
    if store.hcodes is None:
        assign_hcodes(store)
    if not 1 <= n <= store.n_tets:
        raise ValueError(f"number of partitions must be in 1..{store.n_tets}, got {n}")
    order = np.lexsort((store.elem_ids, store.hcodes))
    return PartitionAssignment(store.elem_ids[order].copy(), ntile(len(order), n), n)


def cut_faces(store: MeshStore, assignment: PartitionAssignment) -> int:
    """Number of interior faces whose two elements sit in different partitions."""
    part = np.empty(store.n_tets, dtype=np.int64)
    lookup = store.elem_index
    for e, p in zip(assignment.elem_ids.tolist(), assignment.partition_ids.tolist()):
        part[lookup[e]] = p
    cut = 0
    for idx in range(store.n_tets):
        for r in range(4):
            nb = neighbor_index(store, idx, r)
            if nb != BOUNDARY and nb > idx and part[nb] != part[idx]:
                cut += 1
    return cut
