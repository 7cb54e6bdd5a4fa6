"""Point-location throughput benchmark over spherical point clouds."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .geometry import point_in_tet
from .hilbert import h_encode
from .locate import NOT_FOUND, LocatorConfig, _nearest_codes, locate_batch, prepare, scan
from .mesh import MeshStore

FIXED = "fixed-cloud"
RANDOM = "random-clouds"


@dataclass(frozen=True)
class BenchSpec:
    mode: str = FIXED
    center: tuple[float, float, float] | None = None
    radius: float = 0.01
    clouds: int = 1
    points_per_cloud: int | None = None
    total: int = 20_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (FIXED, RANDOM):
            raise ValueError(f"mode must be {FIXED!r} or {RANDOM!r}, got {self.mode!r}")
        if not self.radius > 0:
            raise ValueError(f"radius must be > 0, got {self.radius}")
        if self.total < 1 or self.clouds < 1:
            raise ValueError("total and clouds must be positive")
        if self.mode == FIXED:
            object.__setattr__(self, "clouds", 1)
            object.__setattr__(self, "points_per_cloud", self.total)
        else:
            ppc = self.points_per_cloud
            if ppc is None:
                if self.total % self.clouds:
                    raise ValueError(f"{self.clouds} clouds do not divide {self.total} points")
                ppc = self.total // self.clouds
                object.__setattr__(self, "points_per_cloud", ppc)
            if self.clouds * ppc != self.total:
                raise ValueError(f"clouds * points_per_cloud = {self.clouds * ppc} "
                                 f"!= total {self.total}")


@dataclass
class BenchReport:
    spec: BenchSpec
    points: int
    seconds: float
    distinct: int
    not_contained: int
    mu_r: float
    sigma_r: float
    center: tuple[float, float, float] | None = None

    @property
    def points_per_s(self) -> float:
        return self.points / self.seconds if self.seconds > 0 else float("inf")


def sample_ball(rng: np.random.Generator, center, radius: float, n: int) -> np.ndarray:
    """``n`` points uniform in the closed ball, by rejection from the bounding cube."""
    center = np.asarray(center, dtype=np.float64)
    out = []
    have = 0
    while have < n:
        cand = rng.uniform(-1.0, 1.0, size=(max(2 * (n - have), 16), 3))
        cand = cand[(cand * cand).sum(axis=1) <= 1.0]
        out.append(cand)
        have += len(cand)
    unit = np.concatenate(out)[:n]
    return center + radius * unit


def nested_clouds(center, radii, n: int, seed: int) -> list[np.ndarray]:
    """Point sets for increasing radii, each a subset of the next.

    One pool of ``n`` points is drawn in the largest ball; the cloud for
    radius ``r`` is the part of the pool within ``r`` of the center.
    """
    radii = list(radii)
    pool = sample_ball(np.random.default_rng(seed), center, max(radii), n)
    dist = np.linalg.norm(pool - np.asarray(center, dtype=np.float64), axis=1)
    return [pool[dist <= r] for r in radii]


def make_points(store: MeshStore, spec: BenchSpec) -> tuple[np.ndarray, np.ndarray, tuple | None]:
    """Generate the benchmark cloud(s); returns points, per-cloud radii and the fixed center."""
    rng = np.random.default_rng(spec.seed)
    lo, hi = store.bounding_box()
    if spec.mode == FIXED:
        center = tuple(spec.center) if spec.center is not None else tuple(((lo + hi) / 2).tolist())
        return sample_ball(rng, center, spec.radius, spec.total), np.array([spec.radius]), center
    centers = rng.uniform(lo, hi, size=(spec.clouds, 3))
    radii = spec.radius * (1.0 - rng.random(spec.clouds))  # (0, r_max]
    pts = np.concatenate([sample_ball(rng, c, r, spec.points_per_cloud)
                          for c, r in zip(centers, radii)])
    return pts, radii, None


def run_bench(store: MeshStore, spec: BenchSpec, cfg: LocatorConfig | None = None,
              threads: int | None = 1) -> BenchReport:
    prepare(store)
    pts, radii, center = make_points(store, spec)
    t0 = time.perf_counter()
    batch = locate_batch(store, pts, cfg, threads)
    seconds = time.perf_counter() - t0
    missing = sum(1 for r in batch.results if r.elem_id == NOT_FOUND)
    if spec.mode == FIXED:
        mu, sigma = float(spec.radius), 0.0
    else:
        mu = float(radii.mean())
        sigma = float(radii.std(ddof=1)) if len(radii) > 1 else 0.0
    return BenchReport(spec, len(pts), seconds, batch.distinct, missing, mu, sigma, center)


def median_throughput(store, spec, cfg=None, threads=1, repeat=3) -> tuple[float, list[BenchReport]]:
    reports = [run_bench(store, spec, cfg, threads) for _ in range(repeat)]
    return statistics.median(r.points_per_s for r in reports), reports


FIXED_HEADER = ("cx", "cy", "cz", "r", "points", "seconds", "points_per_s", "distinct",
                "not_contained")
RANDOM_HEADER = ("N", "N_cr", "mu_r", "sigma_r", "points", "seconds", "points_per_s",
                 "distinct", "not_contained")


def report_row(rep: BenchReport) -> tuple:
    tail = (rep.points, round(rep.seconds, 6), round(rep.points_per_s, 1), rep.distinct,
            rep.not_contained)
    if rep.spec.mode == FIXED:
        return (*rep.center, rep.spec.radius, *tail)
    return (rep.spec.clouds, rep.spec.points_per_cloud, round(rep.mu_r, 6),
            round(rep.sigma_r, 6), *tail)


# -- report-only statistics ----------------------------------------------

def hilbert_locality(n_pairs: int = 10_000, max_l1: int = 2, order: int = 21,
                     seed: int = 0) -> dict:
    """Code differences for random lattice point pairs at L1 distance <= ``max_l1``."""
    rng = np.random.default_rng(seed)
    top = (1 << order) - 1
    diffs = []
    while len(diffs) < n_pairs:
        p = rng.integers(0, top + 1, size=3)
        step = rng.integers(-max_l1, max_l1 + 1, size=3)
        if not 0 < np.abs(step).sum() <= max_l1:
            continue
        q = p + step
        if (q < 0).any() or (q > top).any():
            continue
        diffs.append(abs(h_encode(*map(int, p), order=order) - h_encode(*map(int, q), order=order)))
    d = np.array(diffs, dtype=np.float64)
    return {
        "pairs": n_pairs,
        "median": float(np.median(d)),
        "p90": float(np.quantile(d, 0.9)),
        "frac_below_64": float((d < 64).mean()),
        "frac_below_2^30": float((d < 2.0 ** 30).mean()),
    }


def candidate_hit_rate(store: MeshStore, points, fanout: int = 4, eps: float = 1e-15) -> float:
    """Fraction of contained points lying in one of their first ``fanout`` candidates."""
    prepare(store)
    q = store.quantizer
    hits = total = 0
    for p in np.asarray(points, dtype=np.float64).reshape(-1, 3).tolist():
        if scan(store, p, eps) == NOT_FOUND:
            continue
        total += 1
        h = h_encode(*q.quantize(*p), order=q.bits)
        if any(point_in_tet(store.corners(c), p, eps) for c in _nearest_codes(store, h, fanout)):
            hits += 1
    return hits / total if total else float("nan")
