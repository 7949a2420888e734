"""Exact nearest-neighbor search and convex hull volumes.

The density criterion needs two geometric primitives: exact k-NN (a
median-split k-d tree) and the volume of a 3-d convex hull (quickhull
plus fan tetrahedralization). Both are shown against brute force here.
"""

import numpy as np

import dynahull as dh

rng = np.random.default_rng(11)

# --- k-d tree ---------------------------------------------------------

pts = rng.normal(size=(5000, 3))
tree = dh.build_index(pts)

q = np.array([0.1, -0.2, 0.3])
res = dh.knn(tree, q, k=8)
print("knn indices:  ", res.indices)
print("knn distances:", np.round(res.distances, 4))

# brute force agrees exactly, not approximately
d2 = np.linalg.norm(pts - q, axis=1)
brute = np.argsort(d2, kind="stable")[:8]
print(f"matches brute-force argsort: {np.array_equal(res.indices, brute)}")

# batched queries: (n_query, k) index and distance arrays
idx, dist = dh.knn_many(tree, pts[:4], k=3)
print(f"batch shape {idx.shape}, self is always first: "
      f"{np.array_equal(idx[:, 0], np.arange(4))}")

# --- convex hulls -----------------------------------------------------

cube = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)],
                dtype=np.float64)
print(f"\nunit cube volume: {dh.hull_volume(cube):.12f}")

# interior points never change the hull
stuffed = np.vstack([cube, rng.uniform(0.2, 0.8, size=(500, 3))])
out = dh.convex_hull_3d(stuffed)
print(f"cube + 500 interior points: volume {out.mesh.volume:.12f}, "
      f"{len(out.mesh.vertices)} hull vertices")

# degenerate neighborhoods report their rank instead of crashing;
# a flat patch (rank 2) has zero volume
flat = rng.uniform(size=(60, 3))
flat[:, 2] = 0.0
print(f"coplanar patch: rank {dh.convex_hull_3d(flat).rank}, "
      f"volume {dh.hull_volume(flat)}")

seg = np.outer(np.linspace(0, 1, 30), np.array([1.0, 2.0, 3.0]))
print(f"collinear points: rank {dh.convex_hull_3d(seg).rank}")

# tetra sanity check: V = |det| / 6
tet = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], dtype=float)
print(f"unit tetrahedron: {dh.hull_volume(tet):.12f} (expect {1 / 6:.12f})")
