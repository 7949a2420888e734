"""Independent reference computations used to check the package.

Everything here is deliberately naive (full scans, exhaustive search,
Monte-Carlo integration) and never imports the package's own algorithm
code, so a bug cannot hide on both sides of a comparison.
"""
from __future__ import annotations

import itertools

import numpy as np
from numba import njit


def brute_knn(points, query, k):
    """Exact k nearest neighbors by full scan.

    Returns (distances, indices) sorted by ascending (distance, index).
    """
    points = np.asarray(points, dtype=np.float64)
    d2 = ((points - np.asarray(query, dtype=np.float64)) ** 2).sum(axis=1)
    k = min(k, len(points))
    order = np.lexsort((np.arange(len(points)), d2))[:k]
    return np.sqrt(d2[order]), order


def brute_nn_distances(pred, truth):
    """Distance from every pred point to its nearest truth point, all pairs."""
    pred = np.asarray(pred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    d2 = ((pred[:, None, :] - truth[None, :, :]) ** 2).sum(axis=2)
    return np.sqrt(d2.min(axis=1))


def brute_nn_stats(pred, truth):
    d = brute_nn_distances(pred, truth)
    return {
        "mean": float(d.mean()),
        "mae": float(np.abs(d).mean()),
        "variance": float(d.var()),
        "rmse": float(np.sqrt((d ** 2).mean())),
        "p90": float(np.percentile(d, 90)),
    }


def brute_chamfer(a, b):
    da = brute_nn_distances(a, b)
    db = brute_nn_distances(b, a)
    return float((da ** 2).mean() + (db ** 2).mean())


def brute_emd(a, b):
    """Exhaustive minimum-cost perfect matching, mean cost per point.

    Only feasible for tiny clouds (n! permutations).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = len(a)
    assert len(b) == n and n <= 8
    cost = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    best = np.inf
    for perm in itertools.permutations(range(n)):
        total = sum(cost[i, perm[i]] for i in range(n))
        if total < best:
            best = total
    return best / n


def affine_rescale(counts, lo, hi):
    """Direct evaluation of the removal-percentage rescale formula."""
    counts = np.asarray(counts, dtype=np.float64)
    n_min, n_max = counts.min(), counts.max()
    if n_max == n_min:
        return np.full(len(counts), float(lo))
    return (counts - n_min) / (n_max - n_min) * (hi - lo) + lo


@njit(cache=True)
def _mc_inside_count(samples, normals, offsets, tol):
    n = samples.shape[0]
    f = normals.shape[0]
    inside = 0
    for i in range(n):
        ok = True
        for j in range(f):
            s = (
                normals[j, 0] * samples[i, 0]
                + normals[j, 1] * samples[i, 1]
                + normals[j, 2] * samples[i, 2]
                - offsets[j]
            )
            if s > tol:
                ok = False
                break
        if ok:
            inside += 1
    return inside


def mc_hull_volume(vertices, faces, n_samples=1_000_000, seed=0):
    """Monte-Carlo membership integration of the volume of a face mesh.

    vertices: (m, 3) hull vertex coordinates.
    faces: (f, 3) index triples into vertices, outward wound
    (counter-clockwise seen from outside).
    Samples the bounding box uniformly and counts points that are on the
    inner side of every face plane.
    """
    vertices = np.asarray(vertices, dtype=np.float64)
    faces = np.asarray(faces, dtype=np.int64)
    normals = np.empty((len(faces), 3))
    offsets = np.empty(len(faces))
    for j, (ia, ib, ic) in enumerate(faces):
        n = np.cross(vertices[ib] - vertices[ia], vertices[ic] - vertices[ia])
        n /= np.linalg.norm(n)
        normals[j] = n
        offsets[j] = n @ vertices[ia]
    lo = vertices.min(axis=0)
    hi = vertices.max(axis=0)
    box_vol = float(np.prod(hi - lo))
    rng = np.random.default_rng(seed)
    samples = rng.random((n_samples, 3)) * (hi - lo) + lo
    tol = 1e-12 * float(np.linalg.norm(hi - lo))
    inside = _mc_inside_count(samples, normals, offsets, tol)
    return box_vol * inside / n_samples
