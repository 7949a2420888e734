"""Convex hull construction and volume, against analytic and MC oracles."""
import numpy as np
import pytest

import dynahull as dh

from oracles import mc_hull_volume


def cube_corners():
    g = np.array([0.0, 1.0])
    return np.array(np.meshgrid(g, g, g)).reshape(3, -1).T


def edges_of(faces):
    out = {}
    for f in faces:
        for a, b in ((f[0], f[1]), (f[1], f[2]), (f[2], f[0])):
            key = (min(a, b), max(a, b))
            out[key] = out.get(key, 0) + 1
    return out


def assert_well_formed(pts, out):
    """Containment, closed 2-manifold, Euler, outward winding."""
    mesh = out.mesh
    v, f = mesh.vertices, mesh.faces
    diag = np.linalg.norm(pts.max(axis=0) - pts.min(axis=0))
    centroid = v.mean(axis=0)
    for tri in f:
        a, b, c = v[tri]
        n = np.cross(b - a, c - a)
        # outward: centroid strictly below the face plane
        assert np.dot(n, centroid - a) < 0.0
        # no input point above the plane
        above = (pts - a) @ n / np.linalg.norm(n)
        assert above.max() <= 1e-9 * diag + 1e-12
    counts = edges_of(f)
    assert set(counts.values()) == {2}
    n_v, n_e, n_f = len(v), len(counts), len(f)
    assert n_v - n_e + n_f == 2
    # vertex cross-reference holds
    assert np.array_equal(mesh.vertices, pts[mesh.input_indices])


def test_unit_tetrahedron_exact():
    pts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
    out = dh.convex_hull_3d(pts)
    assert not out.degenerate
    assert out.mesh.volume == pytest.approx(1.0 / 6.0, abs=1e-12)
    assert len(out.mesh.vertices) == 4
    assert len(out.mesh.faces) == 4
    assert_well_formed(pts, out)


def test_cube_with_interior_points():
    rng = np.random.default_rng(1)
    interior = 0.05 + 0.9 * rng.random((100, 3))
    pts = np.vstack([cube_corners(), interior])
    out = dh.convex_hull_3d(pts)
    assert out.mesh.volume == pytest.approx(1.0, abs=1e-12)
    got = {tuple(v) for v in out.mesh.vertices}
    assert got == {tuple(c) for c in cube_corners()}
    assert (out.mesh.input_indices < 8).all()
    assert_well_formed(pts, out)


def test_degenerate_ranks():
    rng = np.random.default_rng(2)
    u, v = rng.normal(size=3), rng.normal(size=3)
    plane = np.outer(rng.random(30), u) + np.outer(rng.random(30), v)
    assert dh.convex_hull_3d(plane).rank == 2
    line = np.outer(np.linspace(-1, 2, 25), u)
    assert dh.convex_hull_3d(line).rank == 1
    same = np.tile(u, (10, 1))
    assert dh.convex_hull_3d(same).rank == 0
    assert dh.convex_hull_3d(u.reshape(1, 3)).rank == 0
    # fewer than 4 distinct points can never span 3D
    assert dh.convex_hull_3d(rng.random((3, 3))).degenerate
    for degen in (plane, line, same):
        assert dh.hull_volume(degen) == 0.0
    assert dh.hull_volume(np.empty((0, 3))) == 0.0


def test_random_hulls_are_well_formed():
    rng = np.random.default_rng(3)
    for trial in range(25):
        n = int(rng.integers(4, 300))
        pts = rng.normal(size=(n, 3)) * 10.0 ** rng.integers(-2, 3)
        out = dh.convex_hull_3d(pts)
        if out.degenerate:
            continue
        assert_well_formed(pts, out)
        assert out.mesh.volume > 0.0
        assert dh.hull_volume(pts) == pytest.approx(out.mesh.volume, rel=1e-12)


def test_volume_against_monte_carlo():
    rng = np.random.default_rng(4)
    for trial in range(10):
        n = int(rng.integers(6, 60))
        pts = rng.normal(size=(n, 3)) * np.array([1.0, 2.5, 0.7])
        out = dh.convex_hull_3d(pts)
        est = mc_hull_volume(out.mesh.vertices, out.mesh.faces,
                             n_samples=100_000, seed=trial)
        assert out.mesh.volume == pytest.approx(est, rel=0.02)


def test_volume_monotone_under_nesting():
    rng = np.random.default_rng(5)
    pts = rng.normal(size=(50, 3))
    inner = dh.hull_volume(pts * 0.6)
    outer = dh.hull_volume(pts)
    assert 0.0 < inner < outer
    # adding points can only grow the hull
    more = np.vstack([pts, rng.normal(size=(50, 3)) * 1.5])
    assert dh.hull_volume(more) >= outer - 1e-12


def test_interior_points_do_not_change_volume():
    rng = np.random.default_rng(6)
    shell = rng.normal(size=(40, 3))
    shell /= np.linalg.norm(shell, axis=1, keepdims=True)
    base = dh.hull_volume(shell)
    # convex combinations of the shell are interior by construction
    w = rng.random((200, 40))
    w /= w.sum(axis=1, keepdims=True)
    mixed = np.vstack([shell, w @ shell])
    assert dh.hull_volume(mixed) == pytest.approx(base, rel=1e-12)


def test_rigid_motion_invariance():
    rng = np.random.default_rng(7)
    pts = rng.normal(size=(80, 3))
    base = dh.hull_volume(pts)
    # a rotation from QR, plus a far translation
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    moved = pts @ q.T + np.array([120.0, -45.0, 3e3])
    assert dh.hull_volume(moved) == pytest.approx(base, rel=1e-9)


def test_duplicate_points_collapse():
    pts = np.vstack([cube_corners()] * 5)
    out = dh.convex_hull_3d(pts)
    assert len(out.mesh.vertices) == 8
    assert out.mesh.volume == pytest.approx(1.0, abs=1e-12)
    # input_indices point at first occurrences
    assert (out.mesh.input_indices < 8).all()


def test_bad_shape_rejected():
    with pytest.raises(ValueError):
        dh.convex_hull_3d(np.zeros((5, 2)))
    with pytest.raises(ValueError):
        dh.hull_volume(np.zeros((5, 4)))
