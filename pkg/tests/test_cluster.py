"""Seeded k-means behavior."""
import numpy as np
import pytest

import dynahull as dh
from dynahull.errors import InsufficientPoints


def blobs(seed=0):
    """Three well-separated tight blobs, sizes 40 / 70 / 100."""
    rng = np.random.default_rng(seed)
    centers = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0], [0.0, 10.0, 0.0]])
    sizes = (40, 70, 100)
    parts, truth = [], []
    for i, (c, m) in enumerate(zip(centers, sizes)):
        parts.append(c + rng.normal(scale=0.01, size=(m, 3)))
        truth.extend([i] * m)
    return np.vstack(parts), np.array(truth), sizes


def test_single_cluster_centroid_is_mean():
    rng = np.random.default_rng(1)
    pts = rng.normal(size=(50, 3)) * 4.0
    out = dh.kmeans(pts, 1, seed=0)
    assert np.allclose(out.centroids[0], pts.mean(axis=0), atol=1e-9)
    assert (out.labels == 0).all()
    assert out.counts.tolist() == [50]


def test_separated_blobs_recovered_exactly():
    pts, truth, sizes = blobs()
    out = dh.kmeans(pts, 3, seed=0)
    assert sorted(out.counts.tolist()) == sorted(sizes)
    # bijective relabeling: every found cluster is pure and complete
    for i in range(3):
        found = out.labels[truth == i]
        assert len(set(found.tolist())) == 1
        j = found[0]
        assert (out.labels == j).sum() == (truth == i).sum()


def test_deterministic_for_fixed_seed():
    rng = np.random.default_rng(2)
    pts = rng.random((400, 3)) * 5.0
    a = dh.kmeans(pts, 6, seed=3)
    b = dh.kmeans(pts, 6, seed=3)
    assert np.array_equal(a.labels, b.labels)
    assert np.array_equal(a.centroids, b.centroids)
    assert np.array_equal(a.counts, b.counts)


def test_labels_counts_consistent_across_trials():
    rng = np.random.default_rng(4)
    for trial in range(10):
        n = int(rng.integers(10, 500))
        k = int(rng.integers(1, min(n, 12) + 1))
        pts = rng.normal(size=(n, 3))
        out = dh.kmeans(pts, k, seed=trial)
        assert out.labels.shape == (n,)
        assert out.labels.min() >= 0 and out.labels.max() < k
        assert out.centroids.shape == (k, 3)
        assert out.counts.shape == (k,)
        assert out.counts.sum() == n
        assert np.array_equal(out.counts, np.bincount(out.labels, minlength=k))


def test_wcss_trace_is_non_increasing():
    rng = np.random.default_rng(5)
    pts = rng.random((600, 3))
    trace = []
    dh.kmeans(pts, 5, seed=0, wcss_trace=trace)
    assert len(trace) >= 1
    assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


def test_final_labels_are_nearest_centroid():
    rng = np.random.default_rng(6)
    pts = rng.random((300, 3)) * 3.0
    out = dh.kmeans(pts, 4, seed=1)
    d2 = ((pts[:, None, :] - out.centroids[None, :, :]) ** 2).sum(axis=2)
    assert np.array_equal(out.labels, d2.argmin(axis=1))


def test_insufficient_points_raise():
    pts = np.random.default_rng(0).random((3, 3))
    with pytest.raises(InsufficientPoints):
        dh.kmeans(pts, 4)
    with pytest.raises(InsufficientPoints):
        dh.kmeans(pts, 0)
    with pytest.raises(InsufficientPoints):
        dh.kmeans(np.empty((0, 3)), 1)


def test_identical_points_still_terminate():
    pts = np.tile([1.0, 2.0, 3.0], (5, 1))
    out = dh.kmeans(pts, 2, seed=0)
    assert out.counts.sum() == 5
    assert np.allclose(out.centroids, [1.0, 2.0, 3.0])
