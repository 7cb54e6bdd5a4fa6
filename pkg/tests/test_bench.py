import numpy as np
import pytest

from tetstore import generate_box, locate_batch
from tetstore.bench import (
    FIXED,
    RANDOM,
    BenchSpec,
    hilbert_locality,
    make_points,
    median_throughput,
    nested_clouds,
    run_bench,
    sample_ball,
)


@pytest.fixture(scope="module")
def box6():
    return generate_box(6, 6, 6)


def test_bench_spec_validation():
    assert BenchSpec(RANDOM, radius=0.1, clouds=40).points_per_cloud == 500
    assert BenchSpec(FIXED, total=123).points_per_cloud == 123
    with pytest.raises(ValueError):
        BenchSpec(radius=0.0)
    with pytest.raises(ValueError):
        BenchSpec(RANDOM, clouds=3)
    with pytest.raises(ValueError):
        BenchSpec(RANDOM, clouds=4, points_per_cloud=10)
    with pytest.raises(ValueError):
        BenchSpec("spiral")


def test_sample_ball_inside_and_seeded():
    rng = np.random.default_rng(0)
    pts = sample_ball(rng, (1, 2, 3), 0.5, 5000)
    assert pts.shape == (5000, 3)
    assert (np.linalg.norm(pts - (1, 2, 3), axis=1) <= 0.5).all()
    again = sample_ball(np.random.default_rng(0), (1, 2, 3), 0.5, 5000)
    assert np.array_equal(pts, again)


def test_random_clouds_radii_and_stats(box6):
    spec = BenchSpec(RANDOM, radius=0.2, clouds=20, total=2000, seed=3)
    pts, radii, center = make_points(box6, spec)
    assert len(pts) == 2000 and center is None
    assert ((radii > 0) & (radii <= 0.2)).all()
    rep = run_bench(box6, spec)
    assert rep.mu_r == pytest.approx(radii.mean())
    assert rep.sigma_r == pytest.approx(radii.std(ddof=1))


def test_tiny_cloud_hits_one_element(box6):
    c = tuple(box6.centroids[17].tolist())
    rep = run_bench(box6, BenchSpec(FIXED, c, 1e-5, total=2000, seed=1))
    assert rep.distinct == 1 and rep.not_contained == 0


def test_far_center_reports_misses(box6):
    rep = run_bench(box6, BenchSpec(FIXED, (10, 10, 10), 0.1, total=100))
    assert rep.not_contained == 100 and rep.distinct == 0


def test_same_seed_same_distinct(box6):
    spec = BenchSpec(RANDOM, radius=0.3, clouds=10, total=1000, seed=7)
    assert run_bench(box6, spec).distinct == run_bench(box6, spec).distinct


def test_nested_clouds_monotone(box6):
    center = (0.41, 0.52, 0.47)
    radii = [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3]
    clouds = nested_clouds(center, radii, 20_000, seed=2)
    sets = [set(locate_batch(box6, pts, threads=1).elem_ids) - {-1} for pts in clouds]
    for small, big in zip(sets, sets[1:]):
        assert small <= big
    counts = [len(s) for s in sets]
    assert counts == sorted(counts)
    assert counts[-1] > counts[0]


def test_median_throughput_positive(box6):
    med, reports = median_throughput(box6, BenchSpec(FIXED, radius=0.1, total=500), repeat=3)
    assert len(reports) == 3 and med > 0


def test_locality_statistics_reported():
    stats = hilbert_locality(n_pairs=500, seed=1)
    assert stats["pairs"] == 500
    assert 0.0 <= stats["frac_below_64"] <= 1.0
    assert stats["median"] <= stats["p90"]
