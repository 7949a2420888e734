"""Point cloud containers and file round trips.

Builds a small labeled cloud, writes it as binary and ascii PCD and
reads each back, then loads a hand-written ascii PLY (a read-only
interop format). Binary PCD is the lossless default; ascii keeps 9
significant digits.
"""

import tempfile
from pathlib import Path

import numpy as np

import dynahull as dh

rng = np.random.default_rng(7)

# a cloud is an (n, 3) float64 array plus an optional uint8 motion label
# per point (0 = static, 1 = dynamic)
pts = rng.uniform(0.0, 4.0, size=(1000, 3))
labels = (rng.random(1000) < 0.2).astype(np.uint8)
cloud = dh.PointCloud(pts, labels)

print(f"built cloud: {len(cloud)} points, "
      f"{int(cloud.labels.sum())} labeled dynamic")
print(f"coordinates are read-only: writeable={cloud.points.flags.writeable}")

with tempfile.TemporaryDirectory() as d:
    d = Path(d)

    dh.save_cloud(cloud, d / "map.pcd", format="pcd-binary")
    back = dh.load_cloud(d / "map.pcd")
    print(f"binary pcd round trip bit-exact: "
          f"{np.array_equal(back.points, cloud.points)}")

    dh.save_cloud(cloud, d / "map_ascii.pcd", format="pcd-ascii")
    back = dh.load_cloud(d / "map_ascii.pcd")
    err = np.abs(back.points - cloud.points).max()
    print(f"ascii pcd max abs round-trip error: {err:.2e}")

    # ply comes from other tools; we read it but always write pcd
    (d / "from_elsewhere.ply").write_text(
        "ply\nformat ascii 1.0\nelement vertex 3\n"
        "property float x\nproperty float y\nproperty float z\n"
        "property uchar label\nend_header\n"
        "0 0 0 0\n1 0 0 1\n0 1 0 0\n")
    ply = dh.load_cloud(d / "from_elsewhere.ply")
    print(f"ply loaded: {len(ply)} points, labels {ply.labels.tolist()}")

    sizes = {p.name: p.stat().st_size for p in sorted(d.iterdir())}
    for name, size in sizes.items():
        print(f"  {name}: {size} bytes")

# uniform downsampling picks a deterministic subset for a given seed
small = dh.downsample_uniform(cloud, 100, seed=0)
print(f"downsampled to {len(small)} points, labels carried along: "
      f"{small.labels is not None}")

# malformed input raises typed errors instead of garbage clouds
try:
    dh.PointCloud(np.array([[1.0, 2.0, np.nan]]))
except dh.NonFiniteCoordinate as e:
    print(f"non-finite coordinates rejected: {e}")
