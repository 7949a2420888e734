"""Exact k-nearest-neighbor search over 3D points.

A median-split k-d tree with per-node bounding boxes. Queries are exact:
results are ordered by ascending Euclidean distance with ties broken by
ascending original point index, so output never depends on tree layout
or thread count. A query point that is itself in the tree is returned at
distance zero.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

_LEAF = 16


@njit(cache=True)
def _select(perm, pts, lo, hi, mid, axis):
    # Hoare quickselect on the (coordinate, index) key so the median is
    # unique even with duplicate coordinates.
    while True:
        if hi - lo <= 1:
            return
        p = perm[(lo + hi) // 2]
        pc = pts[p, axis]
        i = lo
        j = hi - 1
        while i <= j:
            while True:
                q = perm[i]
                if pts[q, axis] < pc or (pts[q, axis] == pc and q < p):
                    i += 1
                else:
                    break
            while True:
                q = perm[j]
                if pts[q, axis] > pc or (pts[q, axis] == pc and q > p):
                    j -= 1
                else:
                    break
            if i <= j:
                t = perm[i]
                perm[i] = perm[j]
                perm[j] = t
                i += 1
                j -= 1
        if mid <= j:
            hi = j + 1
        elif mid >= i:
            lo = i
        else:
            return


@njit(cache=True)
def _build(pts):
    n = pts.shape[0]
    perm = np.arange(n)
    maxn = max(1, 4 * n // _LEAF + 64)
    n_lo = np.empty(maxn, np.int64)
    n_hi = np.empty(maxn, np.int64)
    n_axis = np.empty(maxn, np.int64)
    n_left = np.full(maxn, -1, np.int64)
    n_right = np.full(maxn, -1, np.int64)
    bb_mn = np.empty((maxn, 3), np.float64)
    bb_mx = np.empty((maxn, 3), np.float64)
    n_lo[0] = 0
    n_hi[0] = n
    nn = 1
    stack = np.empty(128, np.int64)
    stack[0] = 0
    ns = 1
    while ns > 0:
        ns -= 1
        node = stack[ns]
        lo = n_lo[node]
        hi = n_hi[node]
        for a in range(3):
            mn = pts[perm[lo], a]
            mx = mn
            for i in range(lo + 1, hi):
                v = pts[perm[i], a]
                if v < mn:
                    mn = v
                if v > mx:
                    mx = v
            bb_mn[node, a] = mn
            bb_mx[node, a] = mx
        if hi - lo <= _LEAF:
            n_axis[node] = -1
            continue
        axis = 0
        w = bb_mx[node, 0] - bb_mn[node, 0]
        for a in range(1, 3):
            wa = bb_mx[node, a] - bb_mn[node, a]
            if wa > w:
                w = wa
                axis = a
        if w == 0.0:
            # all points coincide, no split possible
            n_axis[node] = -1
            continue
        mid = (lo + hi) // 2
        _select(perm, pts, lo, hi, mid, axis)
        n_axis[node] = axis
        n_left[node] = nn
        n_lo[nn] = lo
        n_hi[nn] = mid
        nn += 1
        n_right[node] = nn
        n_lo[nn] = mid
        n_hi[nn] = hi
        nn += 1
        if ns + 2 > stack.shape[0]:
            s2 = np.empty(stack.shape[0] * 2, np.int64)
            s2[:ns] = stack[:ns]
            stack = s2
        stack[ns] = n_left[node]
        ns += 1
        stack[ns] = n_right[node]
        ns += 1
    return (perm, n_lo[:nn].copy(), n_hi[:nn].copy(), n_axis[:nn].copy(),
            n_left[:nn].copy(), n_right[:nn].copy(),
            bb_mn[:nn].copy(), bb_mx[:nn].copy())


@njit(cache=True, inline="always")
def _after(d2a, ia, d2b, ib):
    # ordering key: (squared distance, index)
    return d2a > d2b or (d2a == d2b and ia > ib)


@njit(cache=True)
def _query(pts, perm, n_lo, n_hi, n_axis, n_left, n_right, bb_mn, bb_mx,
           qx, qy, qz, k, heap_d, heap_i, stack):
    """k nearest to (qx,qy,qz); fills heap arrays, returns result count.

    On return heap_d/heap_i hold the results sorted ascending by
    (distance, index) in slots [0, count).
    """
    cnt = 0
    ns = 1
    stack[0] = 0
    while ns > 0:
        ns -= 1
        node = stack[ns]
        bd = 0.0
        for a in range(3):
            v = qx if a == 0 else (qy if a == 1 else qz)
            if v < bb_mn[node, a]:
                d = bb_mn[node, a] - v
                bd += d * d
            elif v > bb_mx[node, a]:
                d = v - bb_mx[node, a]
                bd += d * d
        if cnt == k and bd > heap_d[0]:
            continue
        if n_axis[node] < 0:
            for ii in range(n_lo[node], n_hi[node]):
                i = perm[ii]
                dx = pts[i, 0] - qx
                dy = pts[i, 1] - qy
                dz = pts[i, 2] - qz
                d2 = dx * dx + dy * dy + dz * dz
                if cnt < k:
                    heap_d[cnt] = d2
                    heap_i[cnt] = i
                    c = cnt
                    cnt += 1
                    while c > 0:
                        par = (c - 1) // 2
                        if _after(heap_d[c], heap_i[c], heap_d[par], heap_i[par]):
                            heap_d[c], heap_d[par] = heap_d[par], heap_d[c]
                            heap_i[c], heap_i[par] = heap_i[par], heap_i[c]
                            c = par
                        else:
                            break
                elif _after(heap_d[0], heap_i[0], d2, i):
                    heap_d[0] = d2
                    heap_i[0] = i
                    c = 0
                    while True:
                        l = 2 * c + 1
                        r = l + 1
                        big = c
                        if l < k and _after(heap_d[l], heap_i[l], heap_d[big], heap_i[big]):
                            big = l
                        if r < k and _after(heap_d[r], heap_i[r], heap_d[big], heap_i[big]):
                            big = r
                        if big == c:
                            break
                        heap_d[c], heap_d[big] = heap_d[big], heap_d[c]
                        heap_i[c], heap_i[big] = heap_i[big], heap_i[c]
                        c = big
        else:
            axis = n_axis[node]
            l = n_left[node]
            r = n_right[node]
            q = qx if axis == 0 else (qy if axis == 1 else qz)
            # push the farther child first so the nearer one pops first
            if q <= bb_mx[l, axis]:
                stack[ns] = r
                ns += 1
                stack[ns] = l
                ns += 1
            else:
                stack[ns] = l
                ns += 1
                stack[ns] = r
                ns += 1
    # heap-sort in place: repeated pops fill slots from the back
    m = cnt
    live = cnt
    for t in range(m - 1, -1, -1):
        top_d = heap_d[0]
        top_i = heap_i[0]
        live -= 1
        heap_d[0] = heap_d[live]
        heap_i[0] = heap_i[live]
        c = 0
        while True:
            l = 2 * c + 1
            r = l + 1
            big = c
            if l < live and _after(heap_d[l], heap_i[l], heap_d[big], heap_i[big]):
                big = l
            if r < live and _after(heap_d[r], heap_i[r], heap_d[big], heap_i[big]):
                big = r
            if big == c:
                break
            heap_d[c], heap_d[big] = heap_d[big], heap_d[c]
            heap_i[c], heap_i[big] = heap_i[big], heap_i[c]
            c = big
        heap_d[t] = top_d
        heap_i[t] = top_i
    return m


@njit(cache=True)
def _query_many(pts, perm, n_lo, n_hi, n_axis, n_left, n_right, bb_mn, bb_mx,
                queries, k):
    nq = queries.shape[0]
    kk = min(k, pts.shape[0])
    out_d = np.empty((nq, kk), np.float64)
    out_i = np.empty((nq, kk), np.int64)
    heap_d = np.empty(kk, np.float64)
    heap_i = np.empty(kk, np.int64)
    stack = np.empty(2048, np.int64)
    for qi in range(nq):
        _query(pts, perm, n_lo, n_hi, n_axis, n_left, n_right, bb_mn, bb_mx,
               queries[qi, 0], queries[qi, 1], queries[qi, 2],
               kk, heap_d, heap_i, stack)
        out_d[qi] = heap_d[:kk]
        out_i[qi] = heap_i[:kk]
    return out_d, out_i


@dataclass
class KnnResult:
    """Neighbor indices and distances, ascending by (distance, index)."""

    indices: np.ndarray
    distances: np.ndarray


@dataclass
class KdTree3:
    """Immutable k-d tree over a fixed point array."""

    points: np.ndarray
    _nodes: tuple

    def __len__(self):
        return self.points.shape[0]


def build_index(points) -> KdTree3:
    """Build a k-d tree over the points. Empty input gives an empty tree."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        pts = pts.reshape(0, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must be (n, 3), got {pts.shape}")
    nodes = _build(pts) if len(pts) else None
    return KdTree3(pts, nodes)


def knn(tree: KdTree3, query, k: int) -> KnnResult:
    """The k exact nearest neighbors of one query point.

    Returns fewer than k when the tree is smaller than k. A tree point
    identical to the query is included at distance 0.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(tree) == 0:
        return KnnResult(np.empty(0, np.int64), np.empty(0, np.float64))
    q = np.asarray(query, dtype=np.float64).reshape(1, 3)
    d2, idx = _query_many(tree.points, *tree._nodes, q, k)
    return KnnResult(idx[0], np.sqrt(d2[0]))


def knn_many(tree: KdTree3, queries, k: int):
    """Batch variant of knn: (n_query, kk) index and distance arrays."""
    if k < 1:
        raise ValueError("k must be >= 1")
    q = np.ascontiguousarray(np.asarray(queries, dtype=np.float64))
    if len(tree) == 0:
        return (np.empty((len(q), 0), np.int64), np.empty((len(q), 0), np.float64))
    d2, idx = _query_many(tree.points, *tree._nodes, q, k)
    return idx, np.sqrt(d2)
