"""3D convex hulls by quickhull, and hull volume by tetrahedron summation.

The construction follows the classic stages: pick axis-extreme points to
form an initial tetrahedron, assign outside points to faces, repeatedly
expand the face a furthest point can see, walk its horizon edges, and fan
new faces from the horizon to that point, until no point lies outside any
face. Volume is the sum over faces of |(A - D) . ((B - D) x (C - D))| / 6
with D the centroid of the hull vertices, which lies strictly inside a
non-degenerate hull, making the unsigned sum exact.

Inputs whose affine rank is below 3 (within a scale-relative epsilon) are
reported as Degenerate with that rank rather than raising.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

#: affine rank marking a usable 3D hull
RANK_OK = 3

#: above-plane tolerance as a fraction of the bounding-box diagonal
EPS_GEOM_SCALE = 1e-9

# retry ladder for the rare inputs where the base epsilon misjudges
# near-coplanar geometry during horizon walks
_EPS_LADDER = (1e-9, 1e-8, 1e-7, 1e-6)


@njit(cache=True)
def _grow_i1(a):
    b = np.empty(a.shape[0] * 2, np.int64)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow_i2(a):
    b = np.empty((a.shape[0] * 2, 3), np.int64)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow_f1(a):
    b = np.empty(a.shape[0] * 2, np.float64)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow_f2(a):
    b = np.empty((a.shape[0] * 2, 3), np.float64)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _grow_u1(a):
    b = np.zeros(a.shape[0] * 2, np.uint8)
    b[: a.shape[0]] = a
    return b


@njit(cache=True)
def _quickhull_faces(pts, eps_scale):
    """Quickhull over pts (n, 3) float64. Returns (status, faces).

    status: 3 = non-degenerate, 0/1/2 = degenerate affine rank, -1 =
    numeric inconsistency (caller retries with a larger eps_scale).
    faces: (m, 3) int64 index triples wound so cross(v1-v0, v2-v0)
    points outward.
    """
    n = pts.shape[0]
    empty = np.empty((0, 3), np.int64)
    if n == 0:
        return 0, empty
    mn = pts[0].copy()
    mx = pts[0].copy()
    for i in range(n):
        for a in range(3):
            v = pts[i, a]
            if v < mn[a]:
                mn[a] = v
            if v > mx[a]:
                mx[a] = v
    diag = np.sqrt(
        (mx[0] - mn[0]) ** 2 + (mx[1] - mn[1]) ** 2 + (mx[2] - mn[2]) ** 2
    )
    eps = eps_scale * diag
    if diag == 0.0 or n == 1:
        return 0, empty

    # stage 1: initial simplex from axis-extreme points
    ext = np.empty(6, np.int64)
    for a in range(3):
        lo = 0
        hi = 0
        for i in range(1, n):
            if pts[i, a] < pts[lo, a]:
                lo = i
            if pts[i, a] > pts[hi, a]:
                hi = i
        ext[2 * a] = lo
        ext[2 * a + 1] = hi
    i0 = ext[0]
    i1 = ext[1]
    best = -1.0
    for u in range(6):
        for w in range(u + 1, 6):
            d2 = 0.0
            for a in range(3):
                d = pts[ext[u], a] - pts[ext[w], a]
                d2 += d * d
            if d2 > best:
                best = d2
                i0 = ext[u]
                i1 = ext[w]
    if np.sqrt(best) <= eps:
        return 0, empty

    dx = pts[i1, 0] - pts[i0, 0]
    dy = pts[i1, 1] - pts[i0, 1]
    dz = pts[i1, 2] - pts[i0, 2]
    L2 = dx * dx + dy * dy + dz * dz
    i2 = -1
    best = -1.0
    for i in range(n):
        px = pts[i, 0] - pts[i0, 0]
        py = pts[i, 1] - pts[i0, 1]
        pz = pts[i, 2] - pts[i0, 2]
        cx = py * dz - pz * dy
        cy = pz * dx - px * dz
        cz = px * dy - py * dx
        c2 = cx * cx + cy * cy + cz * cz
        if c2 > best:
            best = c2
            i2 = i
    if np.sqrt(best / L2) <= eps:
        return 1, empty

    ex = pts[i2, 0] - pts[i0, 0]
    ey = pts[i2, 1] - pts[i0, 1]
    ez = pts[i2, 2] - pts[i0, 2]
    nx = dy * ez - dz * ey
    ny = dz * ex - dx * ez
    nz = dx * ey - dy * ex
    nn = np.sqrt(nx * nx + ny * ny + nz * nz)
    nx /= nn
    ny /= nn
    nz /= nn
    i3 = -1
    best = -1.0
    sbest = 0.0
    for i in range(n):
        s = (
            nx * (pts[i, 0] - pts[i0, 0])
            + ny * (pts[i, 1] - pts[i0, 1])
            + nz * (pts[i, 2] - pts[i0, 2])
        )
        if abs(s) > best:
            best = abs(s)
            sbest = s
            i3 = i
    if best <= eps:
        return 2, empty

    # interior reference point used to sanity-check face orientation
    ox = 0.25 * (pts[i0, 0] + pts[i1, 0] + pts[i2, 0] + pts[i3, 0])
    oy = 0.25 * (pts[i0, 1] + pts[i1, 1] + pts[i2, 1] + pts[i3, 1])
    oz = 0.25 * (pts[i0, 2] + pts[i1, 2] + pts[i2, 2] + pts[i3, 2])

    cap = 256
    fvert = np.empty((cap, 3), np.int64)
    fadj = np.full((cap, 3), -1, np.int64)
    fnrm = np.empty((cap, 3), np.float64)
    foff = np.empty(cap, np.float64)
    falive = np.zeros(cap, np.uint8)
    fstamp = np.full(cap, -1, np.int64)
    nf = 0

    # wind the base triangle so i3 lies below it, then fan the side faces
    init = np.empty((4, 3), np.int64)
    if sbest > 0.0:
        init[0, 0] = i0
        init[0, 1] = i2
        init[0, 2] = i1
    else:
        init[0, 0] = i0
        init[0, 1] = i1
        init[0, 2] = i2
    for e in range(3):
        init[1 + e, 0] = init[0, (e + 1) % 3]
        init[1 + e, 1] = init[0, e]
        init[1 + e, 2] = i3

    for f in range(4):
        a = init[f, 0]
        b = init[f, 1]
        c = init[f, 2]
        ux = pts[b, 0] - pts[a, 0]
        uy = pts[b, 1] - pts[a, 1]
        uz = pts[b, 2] - pts[a, 2]
        vx = pts[c, 0] - pts[a, 0]
        vy = pts[c, 1] - pts[a, 1]
        vz = pts[c, 2] - pts[a, 2]
        wx = uy * vz - uz * vy
        wy = uz * vx - ux * vz
        wz = ux * vy - uy * vx
        wn = np.sqrt(wx * wx + wy * wy + wz * wz)
        if wn == 0.0:
            return -1, empty
        wx /= wn
        wy /= wn
        wz /= wn
        off = wx * pts[a, 0] + wy * pts[a, 1] + wz * pts[a, 2]
        if wx * ox + wy * oy + wz * oz - off > 0.0:
            return -1, empty
        fvert[nf, 0] = a
        fvert[nf, 1] = b
        fvert[nf, 2] = c
        fnrm[nf, 0] = wx
        fnrm[nf, 1] = wy
        fnrm[nf, 2] = wz
        foff[nf] = off
        falive[nf] = 1
        nf += 1

    # adjacency: neighbor across directed edge (va, vb) holds (vb, va)
    for f in range(4):
        for e in range(3):
            va = fvert[f, e]
            vb = fvert[f, (e + 1) % 3]
            found = -1
            for g in range(4):
                if g == f:
                    continue
                for e2 in range(3):
                    if fvert[g, e2] == vb and fvert[g, (e2 + 1) % 3] == va:
                        found = g
            if found < 0:
                return -1, empty
            fadj[f, e] = found

    # stage 2: conflict assignment, each point to the face it is
    # furthest above
    passign = np.full(n, -1, np.int64)
    pdist = np.zeros(n, np.float64)
    consumed = np.zeros(n, np.uint8)
    consumed[i0] = 1
    consumed[i1] = 1
    consumed[i2] = 1
    consumed[i3] = 1
    for i in range(n):
        if consumed[i] == 1:
            continue
        bf = -1
        bd = eps
        for f in range(4):
            s = (
                fnrm[f, 0] * pts[i, 0]
                + fnrm[f, 1] * pts[i, 1]
                + fnrm[f, 2] * pts[i, 2]
                - foff[f]
            )
            if s > bd:
                bd = s
                bf = f
        if bf >= 0:
            passign[i] = bf
            pdist[i] = bd

    stack = np.empty(1024, np.int64)
    visible = np.empty(1024, np.int64)
    horiz_a = np.empty(1024, np.int64)
    horiz_b = np.empty(1024, np.int64)
    horiz_f = np.empty(1024, np.int64)
    orphans = np.empty(n, np.int64)
    start_face = np.full(n, -1, np.int64)
    start_stamp = np.full(n, -1, np.int64)
    end_face = np.full(n, -1, np.int64)
    end_stamp = np.full(n, -1, np.int64)
    stamp = 0

    while True:
        # stage 3: pick the globally furthest conflicting point
        apex = -1
        bd = 0.0
        for i in range(n):
            if passign[i] >= 0 and pdist[i] > bd:
                bd = pdist[i]
                apex = i
        if apex < 0:
            break
        stamp += 1
        start = passign[apex]

        # stage 4: flood the set of faces visible from the apex
        nstack = 1
        stack[0] = start
        fstamp[start] = stamp
        nvis = 0
        while nstack > 0:
            nstack -= 1
            f = stack[nstack]
            if nvis >= visible.shape[0]:
                visible = _grow_i1(visible)
            visible[nvis] = f
            nvis += 1
            for e in range(3):
                g = fadj[f, e]
                if fstamp[g] == stamp:
                    continue
                s = (
                    fnrm[g, 0] * pts[apex, 0]
                    + fnrm[g, 1] * pts[apex, 1]
                    + fnrm[g, 2] * pts[apex, 2]
                    - foff[g]
                )
                if s > eps:
                    fstamp[g] = stamp
                    if nstack >= stack.shape[0]:
                        stack = _grow_i1(stack)
                    stack[nstack] = g
                    nstack += 1

        # horizon: edges of visible faces whose neighbor stayed invisible
        nh = 0
        for vi in range(nvis):
            f = visible[vi]
            for e in range(3):
                g = fadj[f, e]
                if fstamp[g] != stamp:
                    if nh >= horiz_a.shape[0]:
                        horiz_a = _grow_i1(horiz_a)
                        horiz_b = _grow_i1(horiz_b)
                        horiz_f = _grow_i1(horiz_f)
                    horiz_a[nh] = fvert[f, e]
                    horiz_b[nh] = fvert[f, (e + 1) % 3]
                    horiz_f[nh] = g
                    nh += 1

        # a sound horizon is a simple cycle: each vertex starts exactly
        # one edge and ends exactly one
        ok = True
        for h in range(nh):
            if start_stamp[horiz_a[h]] == stamp or end_stamp[horiz_b[h]] == stamp:
                ok = False
                break
            start_stamp[horiz_a[h]] = stamp
            end_stamp[horiz_b[h]] = stamp
        if not ok:
            return -1, empty

        norph = 0
        for i in range(n):
            if passign[i] >= 0 and fstamp[passign[i]] == stamp:
                orphans[norph] = i
                norph += 1
        for vi in range(nvis):
            falive[visible[vi]] = 0
        passign[apex] = -1
        consumed[apex] = 1

        # stage 5: fan new faces from horizon edges to the apex
        first_new = nf
        for h in range(nh):
            if nf >= fvert.shape[0]:
                fvert = _grow_i2(fvert)
                fadj = _grow_i2(fadj)
                fnrm = _grow_f2(fnrm)
                foff = _grow_f1(foff)
                falive = _grow_u1(falive)
                fstamp = _grow_i1(fstamp)
            a = horiz_a[h]
            b = horiz_b[h]
            ux = pts[b, 0] - pts[a, 0]
            uy = pts[b, 1] - pts[a, 1]
            uz = pts[b, 2] - pts[a, 2]
            vx = pts[apex, 0] - pts[a, 0]
            vy = pts[apex, 1] - pts[a, 1]
            vz = pts[apex, 2] - pts[a, 2]
            wx = uy * vz - uz * vy
            wy = uz * vx - ux * vz
            wz = ux * vy - uy * vx
            wn = np.sqrt(wx * wx + wy * wy + wz * wz)
            if wn == 0.0:
                return -1, empty
            wx /= wn
            wy /= wn
            wz /= wn
            off = wx * pts[a, 0] + wy * pts[a, 1] + wz * pts[a, 2]
            # keeping the horizon edge direction makes the face outward;
            # if the interior point ends up above, geometry degraded
            if wx * ox + wy * oy + wz * oz - off >= 0.0:
                return -1, empty
            fvert[nf, 0] = a
            fvert[nf, 1] = b
            fvert[nf, 2] = apex
            fnrm[nf, 0] = wx
            fnrm[nf, 1] = wy
            fnrm[nf, 2] = wz
            foff[nf] = off
            falive[nf] = 1
            fstamp[nf] = -1
            fadj[nf, 0] = horiz_f[h]
            start_face[a] = nf
            end_face[b] = nf
            outer = horiz_f[h]
            for e2 in range(3):
                if fvert[outer, e2] == b and fvert[outer, (e2 + 1) % 3] == a:
                    fadj[outer, e2] = nf
            nf += 1

        # link the cone: edge (b, apex) meets the face starting at b,
        # edge (apex, a) meets the face ending at a
        for h in range(nh):
            f = first_new + h
            a = fvert[f, 0]
            b = fvert[f, 1]
            fadj[f, 1] = start_face[b]
            fadj[f, 2] = end_face[a]

        # reassign orphaned conflict points to the new faces only
        for o in range(norph):
            i = orphans[o]
            if consumed[i] == 1:
                continue
            bf = -1
            bd2 = eps
            for f in range(first_new, nf):
                s = (
                    fnrm[f, 0] * pts[i, 0]
                    + fnrm[f, 1] * pts[i, 1]
                    + fnrm[f, 2] * pts[i, 2]
                    - foff[f]
                )
                if s > bd2:
                    bd2 = s
                    bf = f
            if bf >= 0:
                passign[i] = bf
                pdist[i] = bd2
            else:
                passign[i] = -1

    m = 0
    for f in range(nf):
        if falive[f] == 1:
            m += 1
    out = np.empty((m, 3), np.int64)
    m = 0
    for f in range(nf):
        if falive[f] == 1:
            out[m, 0] = fvert[f, 0]
            out[m, 1] = fvert[f, 1]
            out[m, 2] = fvert[f, 2]
            m += 1
    return RANK_OK, out


@njit(cache=True)
def _faces_volume(pts, faces):
    """Tetrahedron sum: |(A - D) . ((B - D) x (C - D))| / 6 over faces,
    D = centroid of the hull vertices."""
    m = faces.shape[0]
    if m == 0:
        return 0.0
    used = np.zeros(pts.shape[0], np.uint8)
    for f in range(m):
        for e in range(3):
            used[faces[f, e]] = 1
    cx = 0.0
    cy = 0.0
    cz = 0.0
    cnt = 0
    for i in range(pts.shape[0]):
        if used[i] == 1:
            cx += pts[i, 0]
            cy += pts[i, 1]
            cz += pts[i, 2]
            cnt += 1
    cx /= cnt
    cy /= cnt
    cz /= cnt
    vol = 0.0
    for f in range(m):
        ax = pts[faces[f, 0], 0] - cx
        ay = pts[faces[f, 0], 1] - cy
        az = pts[faces[f, 0], 2] - cz
        bx = pts[faces[f, 1], 0] - cx
        by = pts[faces[f, 1], 1] - cy
        bz = pts[faces[f, 1], 2] - cz
        gx = pts[faces[f, 2], 0] - cx
        gy = pts[faces[f, 2], 1] - cy
        gz = pts[faces[f, 2], 2] - cz
        det = (
            ax * (by * gz - bz * gy)
            - ay * (bx * gz - bz * gx)
            + az * (bx * gy - by * gx)
        )
        vol += abs(det) / 6.0
    return vol


@njit(cache=True)
def _volume_of(pts):
    """Hull volume of a raw point array; 0.0 when degenerate.

    Retries with a coarser epsilon on numeric inconsistency and treats
    the (never observed) exhausted case as degenerate, which the density
    consumer maps to maximum protection.
    """
    status = -1
    faces = np.empty((0, 3), np.int64)
    for scale in _EPS_LADDER:
        status, faces = _quickhull_faces(pts, scale)
        if status != -1:
            break
    if status != RANK_OK:
        return 0.0
    return _faces_volume(pts, faces)


@dataclass
class HullMesh:
    """Triangulated convex hull.

    vertices: (m, 3) hull vertex coordinates, a subset of the input.
    input_indices: (m,) index of each vertex in the original input (first
    occurrence when the input held duplicates).
    faces: (f, 3) triples into vertices, wound outward.
    volume: enclosed volume in cubic meters.
    """

    vertices: np.ndarray
    input_indices: np.ndarray
    faces: np.ndarray
    volume: float


@dataclass
class HullOutcome:
    """Either a usable hull (rank 3) or a degeneracy report (rank 0..2)."""

    rank: int
    mesh: HullMesh | None = None

    @property
    def degenerate(self) -> bool:
        return self.rank < RANK_OK


def convex_hull_3d(points) -> HullOutcome:
    """Convex hull of the points, or Degenerate(rank) for flat inputs.

    Exact duplicate coordinates are collapsed before construction; the
    mesh maps hull vertices back to first-occurrence input indices.
    """
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        pts = pts.reshape(0, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must be (n, 3), got {pts.shape}")
    uniq, first = np.unique(pts, axis=0, return_index=True)
    status = -1
    faces = None
    for scale in _EPS_LADDER:
        status, faces = _quickhull_faces(uniq, scale)
        if status != -1:
            break
    if status == -1:
        raise RuntimeError("hull construction failed at every tolerance")
    if status != RANK_OK:
        return HullOutcome(rank=status)
    volume = float(_faces_volume(uniq, faces))
    used = np.unique(faces)
    remap = np.full(len(uniq), -1, np.int64)
    remap[used] = np.arange(len(used))
    mesh = HullMesh(
        vertices=uniq[used],
        input_indices=first[used].astype(np.int64),
        faces=remap[faces],
        volume=volume,
    )
    return HullOutcome(rank=RANK_OK, mesh=mesh)


def hull_volume(points) -> float:
    """Enclosed hull volume of the points; 0.0 for degenerate inputs."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64))
    if pts.size == 0:
        pts = pts.reshape(0, 3)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must be (n, 3), got {pts.shape}")
    return float(_volume_of(pts))
