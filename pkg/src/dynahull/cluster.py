"""Seeded k-means over 3D points.

Deterministic for a fixed (points, n_clusters, seed): k-means++ seeding
drawn from a seeded generator, Lloyd iterations with nearest-centroid
assignment (ties to the lowest centroid index), and empty-cluster repair
by reseeding at the point farthest from the emptied centroid.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientPoints


@dataclass
class ClusterAssignment:
    """Per-point cluster ids plus centroids and per-cluster counts."""

    labels: np.ndarray
    centroids: np.ndarray
    counts: np.ndarray


def _dist2_to(points, centroid):
    d = points - centroid
    return (d * d).sum(axis=1)


def _assign(points, centroids):
    n = len(points)
    k = len(centroids)
    d2 = np.empty((n, k))
    for i in range(k):
        d2[:, i] = _dist2_to(points, centroids[i])
    # argmin returns the first minimum, i.e. the lowest centroid index
    labels = d2.argmin(axis=1)
    return labels, d2


def kmeans(points, n_clusters: int, seed: int = 0, max_iter: int = 100,
           tol: float = 1e-4, wcss_trace: list | None = None) -> ClusterAssignment:
    """Lloyd k-means from seeded k-means++ starts.

    Stops when the largest centroid shift drops below tol (meters) or
    after max_iter iterations. wcss_trace, when given, collects the
    within-cluster sum of squares after each assignment step.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    n = len(pts)
    if n_clusters < 1:
        raise InsufficientPoints("n_clusters must be >= 1")
    if n == 0 or n_clusters > n:
        raise InsufficientPoints(f"{n_clusters} clusters need at least that many points, got {n}")

    rng = np.random.default_rng(seed)
    centroids = np.empty((n_clusters, 3))
    centroids[0] = pts[int(rng.integers(n))]
    d2 = _dist2_to(pts, centroids[0])
    for i in range(1, n_clusters):
        total = d2.sum()
        if total > 0.0:
            pick = int(rng.choice(n, p=d2 / total))
        else:
            pick = int(np.argmax(d2))
        centroids[i] = pts[pick]
        d2 = np.minimum(d2, _dist2_to(pts, centroids[i]))

    labels = np.zeros(n, np.int64)
    for _ in range(max_iter):
        labels, d2 = _assign(pts, centroids)
        if wcss_trace is not None:
            wcss_trace.append(float(d2[np.arange(n), labels].sum()))
        new_centroids = centroids.copy()
        reseeded = False
        for i in range(n_clusters):
            members = labels == i
            if members.any():
                new_centroids[i] = pts[members].mean(axis=0)
            else:
                far = int(np.argmax(_dist2_to(pts, centroids[i])))
                new_centroids[i] = pts[far]
                reseeded = True
        shift = np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max()
        centroids = new_centroids
        if not reseeded and shift < tol:
            break

    labels, _ = _assign(pts, centroids)
    counts = np.bincount(labels, minlength=n_clusters).astype(np.int64)
    return ClusterAssignment(labels=labels, centroids=centroids, counts=counts)
