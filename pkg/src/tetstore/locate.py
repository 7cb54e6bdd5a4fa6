"""Point location by directed local search.

A query point is quantized and Hilbert-encoded; the elements whose stored
centroid codes are nearest to it seed a walk across shared faces, always
leaving through the face hit by the ray from the current centroid towards
the point.  If every seed fails (walk leaves the domain, cycles, or hits
the step limit) an exhaustive scan settles the answer.
"""

from __future__ import annotations

import math
import os
from bisect import bisect_left
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .adjacency import build_incidence, neighbor_index
from .errors import NotFoundError
from .geometry import (
    DEFAULT_EPSILON,
    barycentric_batch,
    centroid,
    face_cone_coords,
    solve_barycentric,
)
from .hilbert import assign_hcodes, h_encode, h_encode_array
from .mesh import BOUNDARY, MeshStore

FOUND = "found"
FALLBACK = "fallback"
EXIT = "exit"
STEP_LIMIT = "step-limit"
STUCK = "stuck"
OUTSIDE = "outside"
MISS = "miss"

NOT_FOUND = -1


@dataclass(frozen=True)
class LocatorConfig:
    epsilon: float = DEFAULT_EPSILON
    max_steps: int | None = None
    fanout: int = 4
    fallback: bool = True

    def __post_init__(self):
        if not self.epsilon >= 0:
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ValueError(f"max_steps must be >= 1, got {self.max_steps}")
        if self.fanout < 1:
            raise ValueError(f"fanout must be >= 1, got {self.fanout}")

    def step_limit(self, n_tets: int) -> int:
        if self.max_steps is not None:
            return self.max_steps
        return 10 * _icbrt_ceil(n_tets) + 100


def _icbrt_ceil(n: int) -> int:
    c = max(int(round(n ** (1.0 / 3.0))), 0)
    while c ** 3 < n:
        c += 1
    while c > 0 and (c - 1) ** 3 >= n:
        c -= 1
    return c


class LocateResult(NamedTuple):
    elem_id: int
    steps: int
    candidate_elem: int
    status: str


@dataclass
class BatchResult:
    results: list[LocateResult]
    distinct: int

    @property
    def elem_ids(self) -> list[int]:
        return [r.elem_id for r in self.results]


def prepare(store: MeshStore, quantizer=None) -> MeshStore:
    """Freeze the store and build whatever query indices are still missing."""
    store.freeze()
    if store.hcodes is None:
        assign_hcodes(store, quantizer)
    if store.incidence is None:
        build_incidence(store)
    if getattr(store, "_box", None) is None:
        lo, hi = store.bounding_box()
        diag = float(np.linalg.norm(hi - lo))
        scale = float(np.abs(store.coords).max())
        store._box = (tuple(lo.tolist()), tuple(hi.tolist()), diag, scale)
    return store


def _box_margin(store, eps):
    _, _, diag, scale = store._box
    # a point outside the box by less than this may still pass the eps test
    return eps * diag + 1e-12 * (diag + scale)


def _outside_box(store, p, eps) -> bool:
    lo, hi, _, _ = store._box
    m = _box_margin(store, eps)
    x, y, z = p
    return not (lo[0] - m <= x <= hi[0] + m and lo[1] - m <= y <= hi[1] + m
                and lo[2] - m <= z <= hi[2] + m)


def _nearest_codes(store: MeshStore, h: int, fanout: int) -> list[int]:
    codes = store.sorted_hcode_list
    order = store.hcode_order_list
    n = len(codes)
    hi = bisect_left(codes, h)
    lo = hi - 1
    out = []
    while len(out) < fanout and (lo >= 0 or hi < n):
        if hi < n and (lo < 0 or codes[hi] - h < h - codes[lo]):
            out.append(order[hi])
            hi += 1
        else:
            out.append(order[lo])
            lo -= 1
    return out


def _point(p) -> tuple[float, float, float]:
    x, y, z = (float(v) for v in p)
    if math.isnan(x) or math.isnan(y) or math.isnan(z):
        raise ValueError(f"query point has NaN coordinates: {(x, y, z)}")
    return x, y, z


def select_candidate(store: MeshStore, p, fanout: int = 4) -> list[int]:
    """Ids of up to ``fanout`` elements whose centroid codes are nearest to ``p``'s."""
    prepare(store)
    if store.n_tets == 0:
        raise NotFoundError("mesh has no elements")
    if fanout < 1:
        raise ValueError("fanout must be >= 1")
    p = _point(p)
    h = h_encode(*store.quantizer.quantize(*p), order=store.quantizer.bits)
    return [int(store.elem_ids[i]) for i in _nearest_codes(store, h, fanout)]


def _walk(store: MeshStore, idx: int, p, eps: float, max_steps: int):
    """Walk from element index ``idx``; returns ``(idx or -1, steps, status)``."""
    corners = store.corners
    prev = BOUNDARY
    steps = 0
    while True:
        t = corners(idx)
        lam, mu, nu = solve_barycentric(t, p)
        if lam >= -eps and mu >= -eps and nu >= -eps and lam + mu + nu <= 1.0 + eps:
            return idx, steps, FOUND
        if steps >= max_steps:
            return NOT_FOUND, steps, STEP_LIMIT
        c = centroid(t)
        nxt = None
        for face in range(4):
            a, b, g = face_cone_coords(t, p, face, c)
            if a >= -eps and b >= -eps and g >= -eps:
                nb = neighbor_index(store, idx, face)
                if nb == prev and prev != BOUNDARY:
                    continue
                nxt = nb
                break
        if nxt is None:
            return NOT_FOUND, steps, STUCK
        if nxt == BOUNDARY:
            return NOT_FOUND, steps, EXIT
        prev, idx = idx, nxt
        steps += 1


def traverse(store: MeshStore, start_elem: int, p, cfg: LocatorConfig | None = None) -> LocateResult:
    """Walk the face graph from ``start_elem`` towards ``p``.

    The status is ``"found"``, ``"exit"`` (the walk left the domain),
    ``"step-limit"`` or ``"stuck"``; ``elem_id`` is -1 unless found.
    """
    cfg = cfg or LocatorConfig()
    prepare(store)
    try:
        idx = store.elem_index[int(start_elem)]
    except KeyError:
        raise NotFoundError(f"unknown element {start_elem}") from None
    p = _point(p)
    hit, steps, status = _walk(store, idx, p, cfg.epsilon, cfg.step_limit(store.n_tets))
    elem = int(store.elem_ids[hit]) if hit != NOT_FOUND else NOT_FOUND
    return LocateResult(elem, steps, int(start_elem), status)


def _all_corners(store: MeshStore) -> np.ndarray:
    arr = getattr(store, "_corner_array", None)
    if arr is None:
        arr = store.coords[store.tet_vidx]
        arr.flags.writeable = False
        store._corner_array = arr
    return arr


def scan(store: MeshStore, p, eps: float = DEFAULT_EPSILON) -> int:
    """Exhaustive search; element index of the first containing element, or -1."""
    bc = barycentric_batch(_all_corners(store), p)
    slack = eps + 1e-9
    lam, mu, nu = bc[:, 0], bc[:, 1], bc[:, 2]
    near = np.flatnonzero((lam >= -slack) & (mu >= -slack) & (nu >= -slack)
                          & (lam + mu + nu <= 1.0 + slack))
    for idx in near.tolist():
        b = solve_barycentric(store.corners(idx), p)
        if b[0] >= -eps and b[1] >= -eps and b[2] >= -eps and b[0] + b[1] + b[2] <= 1.0 + eps:
            return idx
    return NOT_FOUND


def _locate_code(store: MeshStore, p, h: int, cfg: LocatorConfig, max_steps: int) -> LocateResult:
    eps = cfg.epsilon
    if _outside_box(store, p, eps):
        return LocateResult(NOT_FOUND, 0, NOT_FOUND, OUTSIDE)
    cands = _nearest_codes(store, h, cfg.fanout)
    first = int(store.elem_ids[cands[0]])
    total = 0
    for c in cands:
        hit, steps, status = _walk(store, c, p, eps, max_steps)
        total += steps
        if hit != NOT_FOUND:
            return LocateResult(int(store.elem_ids[hit]), steps, int(store.elem_ids[c]), FOUND)
    if cfg.fallback:
        hit = scan(store, p, eps)
        if hit != NOT_FOUND:
            return LocateResult(int(store.elem_ids[hit]), total, first, FALLBACK)
    return LocateResult(NOT_FOUND, total, first, MISS)


def locate(store: MeshStore, p, cfg: LocatorConfig | None = None) -> LocateResult:
    """Find an element containing ``p``.

    With ``cfg.fallback`` enabled (the default) the answer is exact: -1 is
    returned only if no element contains the point at ``cfg.epsilon``.
    A point on a shared face may resolve to either incident element.
    """
    cfg = cfg or LocatorConfig()
    prepare(store)
    p = _point(p)
    q = store.quantizer
    h = h_encode(*q.quantize(*p), order=q.bits)
    return _locate_code(store, p, h, cfg, cfg.step_limit(store.n_tets))


def locate_batch(store: MeshStore, points, cfg: LocatorConfig | None = None,
                 threads: int | None = None) -> BatchResult:
    """Locate many points; results keep input order for any thread count.

    ``distinct`` counts the different element ids returned, ignoring -1.
    """
    cfg = cfg or LocatorConfig()
    prepare(store)
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if np.isnan(pts).any():
        raise ValueError("query points contain NaN coordinates")
    n = len(pts)
    if n == 0:
        return BatchResult([], 0)
    q = store.quantizer
    ijk, _ = q.quantize_array(pts)
    codes = h_encode_array(ijk, order=q.bits).tolist()
    plist = [tuple(p) for p in pts.tolist()]
    max_steps = cfg.step_limit(store.n_tets)
    results: list[LocateResult | None] = [None] * n

    def work(lo, hi):
        for i in range(lo, hi):
            results[i] = _locate_code(store, plist[i], codes[i], cfg, max_steps)

    threads = threads or os.cpu_count() or 1
    if threads <= 1 or n < 2 * threads:
        work(0, n)
    else:
        chunk = -(-n // threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(work, lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
            for f in futures:
                f.result()
    distinct = len({r.elem_id for r in results if r.elem_id != NOT_FOUND})
    return BatchResult(results, distinct)
