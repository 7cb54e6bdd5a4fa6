"""Algebraic kernels on a single tetrahedron.

Corners are passed as four 3-sequences ``(p0, p1, p2, p3)``.  Face ``i`` is
the face opposite corner ``i``.  The scalar routines use plain Python floats
(they sit on the per-query hot path); the ``*_batch`` variants evaluate the
same expressions, in the same order, over numpy arrays.
"""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .errors import DegenerateTetError, TraversalStuckError

DEFAULT_EPSILON = 1e-15
INSIDE = 4

# Cramer determinants at or below this are rejected (|volume| <= 1e-300).
_DET_FLOOR = 6e-300

# corners spanning face i (face i is opposite corner i), in ascending order
FACE_CORNERS = ((1, 2, 3), (0, 2, 3), (0, 1, 3), (0, 1, 2))

Vec3 = Sequence[float]


class BarycentricCoords(NamedTuple):
    lam: float
    mu: float
    nu: float


def _det3(a, b, c):
    return (a[0] * (b[1] * c[2] - b[2] * c[1])
            - a[1] * (b[0] * c[2] - b[2] * c[0])
            + a[2] * (b[0] * c[1] - b[1] * c[0]))


def _solve3(u, v, w, d):
    """Coefficients of ``d`` in the basis ``(u, v, w)`` by Cramer's rule."""
    det = _det3(u, v, w)
    if -_DET_FLOOR <= det <= _DET_FLOOR:
        raise DegenerateTetError(f"degenerate tetrahedron (det={det!r})")
    return _det3(d, v, w) / det, _det3(u, d, w) / det, _det3(u, v, d) / det


def solve_barycentric(t: Sequence[Vec3], p: Vec3) -> BarycentricCoords:
    """Solve ``p = p0 + lam*e1 + mu*e2 + nu*e3`` with ``e_i = p_i - p0``."""
    p0, p1, p2, p3 = t
    x0, y0, z0 = p0
    e1 = (p1[0] - x0, p1[1] - y0, p1[2] - z0)
    e2 = (p2[0] - x0, p2[1] - y0, p2[2] - z0)
    e3 = (p3[0] - x0, p3[1] - y0, p3[2] - z0)
    d = (p[0] - x0, p[1] - y0, p[2] - z0)
    return BarycentricCoords(*_solve3(e1, e2, e3, d))


def contains(bc: BarycentricCoords, eps: float = DEFAULT_EPSILON) -> bool:
    lam, mu, nu = bc
    return lam >= -eps and mu >= -eps and nu >= -eps and lam + mu + nu <= 1.0 + eps


def point_in_tet(t: Sequence[Vec3], p: Vec3, eps: float = DEFAULT_EPSILON) -> bool:
    """True if ``p`` lies in the closed tetrahedron, widened by ``eps``.

    Points on faces, edges and corners count as inside.  Degenerate
    tetrahedra raise :class:`DegenerateTetError`.
    """
    return contains(solve_barycentric(t, p), eps)


def centroid(t: Sequence[Vec3]) -> tuple[float, float, float]:
    p0, p1, p2, p3 = t
    return ((p0[0] + p1[0] + p2[0] + p3[0]) / 4.0,
            (p0[1] + p1[1] + p2[1] + p3[1]) / 4.0,
            (p0[2] + p1[2] + p2[2] + p3[2]) / 4.0)


def signed_volume(t: Sequence[Vec3]) -> float:
    p0, p1, p2, p3 = t
    x0, y0, z0 = p0
    e1 = (p1[0] - x0, p1[1] - y0, p1[2] - z0)
    e2 = (p2[0] - x0, p2[1] - y0, p2[2] - z0)
    e3 = (p3[0] - x0, p3[1] - y0, p3[2] - z0)
    return _det3(e1, e2, e3) / 6.0


def face_cone_coords(t: Sequence[Vec3], p: Vec3, face: int,
                     c: Vec3 | None = None) -> tuple[float, float, float]:
    """Coefficients of ``p - c`` in the basis ``(p_j - c, p_k - c, p_l - c)``.

    ``j < k < l`` are the corners of ``face``; ``c`` defaults to the centroid.
    All three coefficients are non-negative iff the ray from ``c`` through
    ``p`` crosses that face.
    """
    if c is None:
        c = centroid(t)
    cx, cy, cz = c
    j, k, l = FACE_CORNERS[face]
    pj, pk, pl = t[j], t[k], t[l]
    u = (pj[0] - cx, pj[1] - cy, pj[2] - cz)
    v = (pk[0] - cx, pk[1] - cy, pk[2] - cz)
    w = (pl[0] - cx, pl[1] - cy, pl[2] - cz)
    d = (p[0] - cx, p[1] - cy, p[2] - cz)
    return _solve3(u, v, w, d)


def exit_face(t: Sequence[Vec3], p: Vec3, eps: float = DEFAULT_EPSILON) -> int:
    """Rank of the face crossed by the ray from the centroid towards ``p``.

    Returns :data:`INSIDE` (4) when ``p`` is in the tetrahedron.  Faces are
    tried in rank order and the first whose cone contains ``p - c`` wins, so
    a ray grazing an edge or corner resolves to the lowest candidate rank.
    """
    if point_in_tet(t, p, eps):
        return INSIDE
    c = centroid(t)
    for face in range(4):
        a, b, g = face_cone_coords(t, p, face, c)
        if a >= -eps and b >= -eps and g >= -eps:
            return face
    raise TraversalStuckError(f"no face of the tetrahedron is crossed towards {tuple(p)}")


def exit_faces(t: Sequence[Vec3], p: Vec3, eps: float = DEFAULT_EPSILON) -> list[int]:
    """All face ranks passing the cone test, in rank order (``[4]`` if inside)."""
    if point_in_tet(t, p, eps):
        return [INSIDE]
    c = centroid(t)
    hits = []
    for face in range(4):
        a, b, g = face_cone_coords(t, p, face, c)
        if a >= -eps and b >= -eps and g >= -eps:
            hits.append(face)
    return hits


# -- batch forms ----------------------------------------------------------

def _det3_batch(a, b, c):
    return (a[..., 0] * (b[..., 1] * c[..., 2] - b[..., 2] * c[..., 1])
            - a[..., 1] * (b[..., 0] * c[..., 2] - b[..., 2] * c[..., 0])
            + a[..., 2] * (b[..., 0] * c[..., 1] - b[..., 1] * c[..., 0]))


def barycentric_batch(corners: np.ndarray, p) -> np.ndarray:
    """``(n, 3)`` barycentric solutions of one point against ``(n, 4, 3)`` corners.

    Degenerate rows yield non-finite values instead of raising.
    """
    corners = np.asarray(corners, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    p0 = corners[:, 0, :]
    e1 = corners[:, 1, :] - p0
    e2 = corners[:, 2, :] - p0
    e3 = corners[:, 3, :] - p0
    d = p - p0
    with np.errstate(divide="ignore", invalid="ignore"):
        det = _det3_batch(e1, e2, e3)
        lam = _det3_batch(d, e2, e3) / det
        mu = _det3_batch(e1, d, e3) / det
        nu = _det3_batch(e1, e2, d) / det
    return np.stack([lam, mu, nu], axis=-1)


def contains_batch(bc: np.ndarray, eps: float = DEFAULT_EPSILON) -> np.ndarray:
    lam, mu, nu = bc[..., 0], bc[..., 1], bc[..., 2]
    return (lam >= -eps) & (mu >= -eps) & (nu >= -eps) & (lam + mu + nu <= 1.0 + eps)


def signed_volume_batch(corners: np.ndarray) -> np.ndarray:
    corners = np.asarray(corners, dtype=np.float64)
    p0 = corners[:, 0, :]
    return _det3_batch(corners[:, 1, :] - p0, corners[:, 2, :] - p0, corners[:, 3, :] - p0) / 6.0
