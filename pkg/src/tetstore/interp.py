"""Nodal field evaluation with linear tetrahedral shape functions."""

from __future__ import annotations

import math
import weakref
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple

import numpy as np

from .errors import MeshError, NotContainedError
from .geometry import solve_barycentric
from .locate import NOT_FOUND, LocatorConfig, locate, locate_batch, prepare
from .mesh import MeshStore


class ShapeValues(NamedTuple):
    s0: float
    s1: float
    s2: float
    s3: float


@dataclass
class NodalField:
    """Scalar values attached to mesh vertices, keyed by vertex id."""

    values: Mapping[int, float]
    name: str = "field"
    _aligned: weakref.WeakKeyDictionary = field(
        default_factory=weakref.WeakKeyDictionary, repr=False, compare=False)

    def __post_init__(self):
        self.values = {int(k): float(v) for k, v in self.values.items()}
        bad = [k for k, v in self.values.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"field {self.name!r} has non-finite values at vertices {bad[:5]}")

    @classmethod
    def from_function(cls, store: MeshStore, fn, name: str = "field") -> "NodalField":
        return cls({int(v): fn(*xyz) for v, xyz in zip(store.vertex_ids.tolist(),
                                                        store.coords.tolist())}, name)

    def aligned(self, store: MeshStore) -> np.ndarray:
        """Values in the store's vertex order; every vertex must have one."""
        arr = self._aligned.get(store)
        if arr is None:
            try:
                arr = np.array([self.values[v] for v in store.vertex_ids.tolist()])
            except KeyError as exc:
                raise MeshError(f"field {self.name!r} has no value for vertex {exc.args[0]}") from None
            self._aligned[store] = arr
        return arr


def shape_values(t, p) -> ShapeValues:
    """Linear shape function weights of the four corners at ``p``."""
    lam, mu, nu = solve_barycentric(t, p)
    return ShapeValues(1.0 - lam - mu - nu, lam, mu, nu)


def interpolate_in(store: MeshStore, fld: NodalField, elem_id: int, p) -> float:
    """Evaluate the field at ``p`` using element ``elem_id``'s shape functions."""
    prepare(store)
    idx = store.elem_index[int(elem_id)]
    t = store.corners(idx)
    f = fld.aligned(store)[store.tet_vidx[idx]]
    p = tuple(float(v) for v in p)
    for k in range(4):
        # exact nodal values; the solve can be off by an ulp at corners
        if p == t[k]:
            return float(f[k])
    s = shape_values(t, p)
    return float(s[0] * f[0] + s[1] * f[1] + s[2] * f[2] + s[3] * f[3])


def interpolate(store: MeshStore, fld: NodalField, p, cfg: LocatorConfig | None = None) -> float:
    """Field value at ``p``.

    Raises
    ------
    NotContainedError
        If no element contains ``p``.
    """
    res = locate(store, p, cfg)
    if res.elem_id == NOT_FOUND:
        raise NotContainedError(f"point {tuple(p)} is not inside the mesh")
    return interpolate_in(store, fld, res.elem_id, p)


def interpolate_batch(store: MeshStore, fld: NodalField, points,
                      cfg: LocatorConfig | None = None, threads: int | None = None) -> np.ndarray:
    """Vectorized over points; uncontained points give NaN."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    batch = locate_batch(store, pts, cfg, threads)
    out = np.full(len(pts), np.nan)
    for i, r in enumerate(batch.results):
        if r.elem_id != NOT_FOUND:
            out[i] = interpolate_in(store, fld, r.elem_id, pts[i])
    return out
