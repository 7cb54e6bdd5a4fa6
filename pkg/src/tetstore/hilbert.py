"""3D Hilbert curve keys for tetrahedron centroids.

Lattice points ``(i, j, k)`` with 21 bits per axis map to a 63-bit code,
which fits a signed 64-bit integer.  The curve is generated from the
Gray-code transform formulation (entry point ``e``, intra-cell direction
``d``); the per-level transform is compiled into a small state table at
import time, so encoding costs one table lookup per level.

The curve starts at the origin: ``h_encode(0, 0, 0) == 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import HilbertRangeError

DIMS = 3
BITS = 21
MAX_ORDER = 21


class LatticePoint(NamedTuple):
    i: int
    j: int
    k: int


# -- transform primitives -------------------------------------------------

def _gray(i):
    return i ^ (i >> 1)


def _gray_inverse(g):
    i = g
    j = 1
    while j < DIMS:
        i ^= g >> j
        j += 1
    return i


def _trailing_ones(i):
    n = 0
    while i & 1:
        n += 1
        i >>= 1
    return n


def _entry(w):
    return 0 if w == 0 else _gray(2 * ((w - 1) // 2))


def _direction(w):
    if w == 0:
        return 0
    if w % 2 == 0:
        return _trailing_ones(w - 1) % DIMS
    return _trailing_ones(w) % DIMS


def _rotr(b, r):
    r %= DIMS
    mask = (1 << DIMS) - 1
    return ((b >> r) | (b << (DIMS - r))) & mask


def _rotl(b, r):
    return _rotr(b, DIMS - (r % DIMS))


def _build_tables():
    """Enumerate the reachable (entry, direction) states.

    Returns two flat tables indexed by ``state * 8 + digit``:
    ``enc[state*8 + octant] = (next_state*8) << 3 | hilbert_digit`` and
    ``dec[state*8 + digit] = (next_state*8) << 3 | octant``.
    """
    states = {(0, 0): 0}
    queue = [(0, 0)]
    transitions = {}
    while queue:
        e, d = queue.pop(0)
        for octant in range(8):
            w = _gray_inverse(_rotr(octant ^ e, d + 1))
            ne = e ^ _rotl(_entry(w), d + 1)
            nd = (d + _direction(w) + 1) % DIMS
            if (ne, nd) not in states:
                states[(ne, nd)] = len(states)
                queue.append((ne, nd))
            transitions[(e, d, octant)] = (w, (ne, nd))
    enc = [0] * (8 * len(states))
    dec = [0] * (8 * len(states))
    for (e, d, octant), (w, nxt) in transitions.items():
        base = states[(e, d)] * 8
        nbase = states[nxt] * 8
        enc[base + octant] = (nbase << 3) | w
        dec[base + w] = (nbase << 3) | octant
    return tuple(enc), tuple(dec), len(states)


_ENC, _DEC, N_STATES = _build_tables()
_ENC_NP = np.array(_ENC, dtype=np.uint64)
_DEC_NP = np.array(_DEC, dtype=np.uint64)
_SHIFTS = {order: tuple(range(3 * (order - 1), -1, -3)) for order in range(1, MAX_ORDER + 1)}


def _spread(x):
    """Insert two zero bits between each of the low 21 bits of ``x``."""
    x &= 0x1FFFFF
    x = (x | x << 32) & 0x1F00000000FFFF
    x = (x | x << 16) & 0x1F0000FF0000FF
    x = (x | x << 8) & 0x100F00F00F00F00F
    x = (x | x << 4) & 0x10C30C30C30C30C3
    x = (x | x << 2) & 0x1249249249249249
    return x


def _compact(x):
    x &= 0x1249249249249249
    x = (x ^ (x >> 2)) & 0x10C30C30C30C30C3
    x = (x ^ (x >> 4)) & 0x100F00F00F00F00F
    x = (x ^ (x >> 8)) & 0x1F0000FF0000FF
    x = (x ^ (x >> 16)) & 0x1F00000000FFFF
    x = (x ^ (x >> 32)) & 0x1FFFFF
    return x


def _check_order(order):
    if not 1 <= order <= MAX_ORDER:
        raise HilbertRangeError(f"order must be in 1..{MAX_ORDER}, got {order}")


def h_encode(i: int, j: int, k: int, order: int = BITS) -> int:
    """Hilbert code of lattice point ``(i, j, k)`` on a curve of ``order`` bits per axis.

    Raises
    ------
    HilbertRangeError
        If a component is negative or does not fit in ``order`` bits.
    """
    limit = 1 << order
    if not (0 <= i < limit and 0 <= j < limit and 0 <= k < limit):
        _check_order(order)
        raise HilbertRangeError(f"lattice point {(i, j, k)} outside [0, 2^{order})")
    shifts = _SHIFTS.get(order)
    if shifts is None:
        _check_order(order)
    m = _spread(i) | (_spread(j) << 1) | (_spread(k) << 2)
    enc = _ENC
    state = 0
    h = 0
    for s in shifts:
        t = enc[state | ((m >> s) & 7)]
        h = (h << 3) | (t & 7)
        state = t >> 3
    return h


def h_decode(h: int, order: int = BITS) -> LatticePoint:
    """Inverse of :func:`h_encode`."""
    _check_order(order)
    if not 0 <= h < (1 << (3 * order)):
        raise HilbertRangeError(f"code {h} outside [0, 2^{3 * order})")
    dec = _DEC
    state = 0
    m = 0
    for s in _SHIFTS[order]:
        t = dec[state | ((h >> s) & 7)]
        m |= (t & 7) << s
        state = t >> 3
    return LatticePoint(_compact(m), _compact(m >> 1), _compact(m >> 2))


def h_encode_array(ijk, order: int = BITS) -> np.ndarray:
    """Vectorized :func:`h_encode` over an ``(n, 3)`` integer array."""
    _check_order(order)
    ijk = np.asarray(ijk)
    if ijk.ndim != 2 or ijk.shape[1] != 3:
        raise ValueError("expected an (n, 3) array of lattice points")
    if ijk.size and (ijk.min() < 0 or ijk.max() >= (1 << order)):
        raise HilbertRangeError(f"lattice points outside [0, 2^{order})")
    u = ijk.astype(np.uint64)
    m = _spread_np(u[:, 0]) | (_spread_np(u[:, 1]) << np.uint64(1)) | (
        _spread_np(u[:, 2]) << np.uint64(2))
    state = np.zeros(len(u), dtype=np.uint64)
    h = np.zeros(len(u), dtype=np.uint64)
    seven = np.uint64(7)
    three = np.uint64(3)
    for s in _SHIFTS[order]:
        t = _ENC_NP[state | ((m >> np.uint64(s)) & seven)]
        h = (h << three) | (t & seven)
        state = t >> three
    return h.astype(np.int64)


def _spread_np(x):
    x = x & np.uint64(0x1FFFFF)
    for shift, mask in ((32, 0x1F00000000FFFF), (16, 0x1F0000FF0000FF),
                        (8, 0x100F00F00F00F00F), (4, 0x10C30C30C30C30C3),
                        (2, 0x1249249249249249)):
        x = (x | (x << np.uint64(shift))) & np.uint64(mask)
    return x


@dataclass(frozen=True)
class Quantizer:
    """Affine map from a model-space bounding box onto the lattice.

    Each axis maps ``[lo, hi]`` onto ``[0, 2**bits - 1]``, rounding half up.
    Points outside the box are clamped onto it first.
    """

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]
    bits: int = BITS

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise ValueError("quantizer box needs three bounds per corner")
        if not all(math.isfinite(v) for v in lo + hi):
            raise ValueError("quantizer box must be finite")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ValueError(f"quantizer box needs min < max on every axis: {lo} {hi}")
        _check_order(self.bits)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def for_points(cls, coords, bits: int = BITS) -> "Quantizer":
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 3)
        lo = coords.min(axis=0)
        hi = coords.max(axis=0)
        flat = hi <= lo
        lo = np.where(flat, lo - 0.5, lo)
        hi = np.where(flat, hi + 0.5, hi)
        return cls(tuple(lo.tolist()), tuple(hi.tolist()), bits)

    @property
    def top(self) -> int:
        return (1 << self.bits) - 1

    def contains(self, x, y, z) -> bool:
        lo, hi = self.lo, self.hi
        return lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1] and lo[2] <= z <= hi[2]

    def quantize(self, x: float, y: float, z: float) -> LatticePoint:
        if x != x or y != y or z != z:
            raise ValueError(f"cannot quantize NaN coordinate {(x, y, z)}")
        top = (1 << self.bits) - 1
        out = []
        for v, lo, hi in ((x, self.lo[0], self.hi[0]), (y, self.lo[1], self.hi[1]),
                          (z, self.lo[2], self.hi[2])):
            if v < lo:
                v = lo
            elif v > hi:
                v = hi
            out.append(int(math.floor((v - lo) / (hi - lo) * top + 0.5)))
        return LatticePoint(*out)

    def quantize_array(self, points) -> tuple[np.ndarray, np.ndarray]:
        """Quantize ``(n, 3)`` points; returns lattice array and a clamped mask."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if np.isnan(pts).any():
            raise ValueError("cannot quantize NaN coordinates")
        lo = np.array(self.lo)
        hi = np.array(self.hi)
        clamped = ((pts < lo) | (pts > hi)).any(axis=1)
        c = np.clip(pts, lo, hi)
        ijk = np.floor((c - lo) / (hi - lo) * float(self.top) + 0.5).astype(np.int64)
        return ijk, clamped

    def encode(self, x: float, y: float, z: float) -> int:
        return h_encode(*self.quantize(x, y, z), order=self.bits)


def quantize(q: Quantizer, x: float, y: float, z: float) -> LatticePoint:
    return q.quantize(x, y, z)


@dataclass(frozen=True)
class HcodeAssignment:
    store: object
    n_clamped: int


def assign_hcodes(store, q: Quantizer | None = None) -> HcodeAssignment:
    """Key every element by the Hilbert code of its centroid and sort the keys.

    The store gets ``hcodes`` (aligned with ``elem_ids``), ``hcode_order``
    (element indices sorted by ``(hcode, elem_id)``) and ``sorted_hcodes``.
    When no quantizer is given the vertex bounding box is used.  Centroids
    outside the quantizer box are clamped and counted; a warning is issued.
    """
    store.freeze()
    if q is None:
        q = Quantizer.for_points(store.coords)
    ijk, clamped = q.quantize_array(store.centroids)
    codes = h_encode_array(ijk, order=q.bits)
    n_clamped = int(clamped.sum())
    if n_clamped:
        warnings.warn(f"{n_clamped} centroid(s) outside the quantizer box were clamped",
                      RuntimeWarning, stacklevel=2)
    attach_hcodes(store, q, codes)
    return HcodeAssignment(store, n_clamped)


def attach_hcodes(store, q: Quantizer, codes) -> None:
    """Install precomputed codes (e.g. from an archive) and build the sorted index."""
    codes = np.asarray(codes, dtype=np.int64).reshape(-1)
    if len(codes) != len(store.elem_ids):
        raise ValueError("one code per element expected")
    order = np.lexsort((store.elem_ids, codes))
    store.quantizer = q
    store.hcodes = codes
    store.hcode_order = order
    store.sorted_hcodes = codes[order]
    store.sorted_hcode_list = store.sorted_hcodes.tolist()
    store.hcode_order_list = order.tolist()
    for arr in (codes, order, store.sorted_hcodes):
        arr.flags.writeable = False
