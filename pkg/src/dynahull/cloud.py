"""Point-cloud container and PCD / PLY file I/O.

Coordinates are meters, stored as float64. Motion labels are optional and
ride along as a uint8 array (0 = static, 1 = dynamic), serialized as an
extra ``label`` field inside PCD files.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path

import numpy as np

from .errors import IoFailure, MalformedHeader, NonFiniteCoordinate


class MotionLabel(IntEnum):
    STATIC = 0
    DYNAMIC = 1


@dataclass
class PointCloud:
    """Ordered set of 3D points with optional per-point motion labels.

    Treated as immutable after construction; the backing arrays are marked
    read-only so a cloud can be shared freely.
    """

    points: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=np.float64))
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must be (n, 3), got {pts.shape}")
        pts.flags.writeable = False
        self.points = pts
        if self.labels is not None:
            lab = np.ascontiguousarray(np.asarray(self.labels, dtype=np.uint8))
            if lab.shape != (len(pts),):
                raise ValueError(
                    f"labels length {lab.shape} does not match {len(pts)} points"
                )
            lab.flags.writeable = False
            self.labels = lab

    def __len__(self):
        return self.points.shape[0]

    def subset(self, indices) -> "PointCloud":
        """Cloud restricted to the given indices, labels carried along."""
        indices = np.asarray(indices, dtype=np.int64)
        lab = self.labels[indices] if self.labels is not None else None
        return PointCloud(self.points[indices], lab)


def downsample_uniform(cloud: PointCloud, n: int, seed: int = 0) -> PointCloud:
    """Uniform subsample of n points without replacement.

    Returns the cloud unchanged when n >= len(cloud). Picked indices are
    sorted so the subset preserves original relative order. Deterministic
    for a fixed seed.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if n >= len(cloud):
        return cloud
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(cloud), size=n, replace=False))
    return cloud.subset(idx)


# ---------------------------------------------------------------------------
# PCD
# ---------------------------------------------------------------------------

_PCD_TYPE_MAP = {
    ("F", 4): "<f4", ("F", 8): "<f8",
    ("U", 1): "<u1", ("U", 2): "<u2", ("U", 4): "<u4", ("U", 8): "<u8",
    ("I", 1): "<i1", ("I", 2): "<i2", ("I", 4): "<i4", ("I", 8): "<i8",
}


def _parse_pcd_header(raw: bytes):
    """Returns (meta dict, byte offset where DATA begins)."""
    meta = {}
    pos = 0
    while True:
        nl = raw.find(b"\n", pos)
        if nl < 0:
            raise MalformedHeader("PCD header has no DATA line")
        line = raw[pos:nl].decode("ascii", errors="replace").strip()
        pos = nl + 1
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        key = parts[0].upper()
        meta[key] = parts[1:]
        if key == "DATA":
            return meta, pos


def _load_pcd(raw: bytes) -> PointCloud:
    meta, body_start = _parse_pcd_header(raw)
    for req in ("FIELDS", "POINTS", "DATA"):
        if req not in meta:
            raise MalformedHeader(f"PCD header missing {req}")
    fields = meta["FIELDS"]
    n_fields = len(fields)
    sizes = [int(s) for s in meta.get("SIZE", ["4"] * n_fields)]
    types = [t.upper() for t in meta.get("TYPE", ["F"] * n_fields)]
    counts = [int(c) for c in meta.get("COUNT", ["1"] * n_fields)]
    if not (len(sizes) == len(types) == len(counts) == n_fields):
        raise MalformedHeader("FIELDS/SIZE/TYPE/COUNT lengths disagree")
    n_points = int(meta["POINTS"][0])
    mode = meta["DATA"][0].lower()

    for axis in ("x", "y", "z"):
        if axis not in fields:
            raise MalformedHeader(f"PCD is missing required field {axis}")
    wanted = {"x", "y", "z", "label"}
    skipped = [f for f in fields if f not in wanted]
    if skipped:
        warnings.warn(f"ignoring unsupported PCD fields: {' '.join(skipped)}")

    dtype_fields = []
    for name, size, typ, count in zip(fields, sizes, types, counts):
        code = _PCD_TYPE_MAP.get((typ, size))
        if code is None:
            raise MalformedHeader(f"unsupported TYPE/SIZE {typ}{size} for field {name}")
        shape = (count,) if count > 1 else ()
        dtype_fields.append((name, code, shape))
    # duplicate names would break structured dtypes; PCD does not allow them
    if len(set(fields)) != n_fields:
        raise MalformedHeader("duplicate field names in PCD header")
    rec_dtype = np.dtype(dtype_fields)

    if mode == "ascii":
        tokens_per_rec = sum(counts)
        text = raw[body_start:].decode("ascii", errors="replace")
        tokens = text.split()
        if len(tokens) < n_points * tokens_per_rec:
            raise MalformedHeader(
                f"PCD body has {len(tokens)} values, expected {n_points * tokens_per_rec}"
            )
        cols = {}
        offset = 0
        flat = np.array(tokens[: n_points * tokens_per_rec], dtype=object) if n_points else None
        for name, count in zip(fields, counts):
            if name in wanted and count == 1 and n_points:
                cols[name] = flat[offset::tokens_per_rec].astype(np.float64)
            offset += count
        if n_points == 0:
            return PointCloud(np.empty((0, 3)))
        pts = np.stack([cols["x"], cols["y"], cols["z"]], axis=1)
        labels = cols["label"].astype(np.uint8) if "label" in cols else None
    elif mode == "binary":
        body = raw[body_start : body_start + rec_dtype.itemsize * n_points]
        if len(body) < rec_dtype.itemsize * n_points:
            raise MalformedHeader("PCD binary body is truncated")
        rec = np.frombuffer(body, dtype=rec_dtype, count=n_points)
        pts = np.stack(
            [rec["x"].astype(np.float64), rec["y"].astype(np.float64),
             rec["z"].astype(np.float64)], axis=1,
        ) if n_points else np.empty((0, 3))
        labels = rec["label"].astype(np.uint8) if "label" in fields and n_points else None
        if "label" in fields and n_points == 0:
            labels = np.empty(0, np.uint8)
    else:
        raise MalformedHeader(f"unsupported DATA mode {mode!r}")

    if n_points and not np.isfinite(pts).all():
        raise NonFiniteCoordinate("cloud contains NaN or infinite coordinates")
    if labels is not None and len(labels) != len(pts):
        labels = None
    return PointCloud(pts, labels)


def _save_pcd(cloud: PointCloud, path: Path, binary: bool):
    n = len(cloud)
    labeled = cloud.labels is not None
    fields = "x y z label" if labeled else "x y z"
    size = "8 8 8 1" if labeled else "8 8 8"
    typ = "F F F U" if labeled else "F F F"
    count = "1 1 1 1" if labeled else "1 1 1"
    header = (
        "# .PCD v0.7 - Point Cloud Data file format\n"
        "VERSION 0.7\n"
        f"FIELDS {fields}\n"
        f"SIZE {size}\n"
        f"TYPE {typ}\n"
        f"COUNT {count}\n"
        f"WIDTH {n}\n"
        "HEIGHT 1\n"
        "VIEWPOINT 0 0 0 1 0 0 0\n"
        f"POINTS {n}\n"
        f"DATA {'binary' if binary else 'ascii'}\n"
    )
    try:
        with open(path, "wb") as fh:
            fh.write(header.encode("ascii"))
            if binary:
                if labeled:
                    rec = np.empty(n, dtype=[("x", "<f8"), ("y", "<f8"),
                                             ("z", "<f8"), ("label", "<u1")])
                    rec["label"] = cloud.labels
                else:
                    rec = np.empty(n, dtype=[("x", "<f8"), ("y", "<f8"), ("z", "<f8")])
                rec["x"] = cloud.points[:, 0]
                rec["y"] = cloud.points[:, 1]
                rec["z"] = cloud.points[:, 2]
                fh.write(rec.tobytes())
            else:
                lines = []
                for i in range(n):
                    x, y, z = cloud.points[i]
                    row = f"{x:.9g} {y:.9g} {z:.9g}"
                    if labeled:
                        row += f" {int(cloud.labels[i])}"
                    lines.append(row)
                fh.write(("\n".join(lines) + ("\n" if lines else "")).encode("ascii"))
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# PLY (ascii, read-only)
# ---------------------------------------------------------------------------

def _load_ply(raw: bytes) -> PointCloud:
    text = raw.decode("ascii", errors="replace")
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MalformedHeader("not a PLY file")
    n_vertex = None
    props = []
    in_vertex = False
    body_at = None
    for li, line in enumerate(lines[1:], start=1):
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            if parts[1] != "ascii":
                raise MalformedHeader("only ascii PLY is supported")
        elif parts[0] == "element":
            in_vertex = parts[1] == "vertex"
            if in_vertex:
                n_vertex = int(parts[2])
        elif parts[0] == "property" and in_vertex:
            props.append(parts[-1])
        elif parts[0] == "end_header":
            body_at = li + 1
            break
    if n_vertex is None or body_at is None:
        raise MalformedHeader("PLY header lacks a vertex element or end_header")
    for axis in ("x", "y", "z"):
        if axis not in props:
            raise MalformedHeader(f"PLY vertex element is missing property {axis}")
    extra = [p for p in props if p not in ("x", "y", "z", "label")]
    if extra:
        warnings.warn(f"ignoring unsupported PLY properties: {' '.join(extra)}")

    rows = []
    for line in lines[body_at:]:
        if line.strip():
            rows.append(line.split())
        if len(rows) == n_vertex:
            break
    if len(rows) < n_vertex:
        raise MalformedHeader("PLY body has fewer vertices than declared")
    data = np.array(rows, dtype=np.float64) if n_vertex else np.empty((0, len(props)))
    cols = {p: data[:, i] for i, p in enumerate(props)} if n_vertex else {}
    pts = (np.stack([cols["x"], cols["y"], cols["z"]], axis=1)
           if n_vertex else np.empty((0, 3)))
    labels = cols["label"].astype(np.uint8) if "label" in cols else None
    if n_vertex and not np.isfinite(pts).all():
        raise NonFiniteCoordinate("cloud contains NaN or infinite coordinates")
    return PointCloud(pts, labels)


# ---------------------------------------------------------------------------
# public entry points
# ---------------------------------------------------------------------------

def load_cloud(path, format: str | None = None) -> PointCloud:
    """Load a point cloud from PCD (ascii/binary) or ascii PLY.

    format: one of {"pcd-ascii", "pcd-binary", "ply-ascii"} or None to
    auto-detect from the file content.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if format is None:
        format = "ply-ascii" if raw[:3] == b"ply" else "pcd"
    if format.startswith("ply"):
        return _load_ply(raw)
    return _load_pcd(raw)


def save_cloud(cloud: PointCloud, path, format: str = "pcd-binary") -> None:
    """Write a cloud as PCD v0.7, either ascii or binary (float64 records).

    Binary mode round-trips coordinates bit-for-bit; ascii keeps 9
    significant digits.
    """
    if format not in ("pcd-ascii", "pcd-binary"):
        raise ValueError(f"unsupported save format {format!r}")
    _save_pcd(cloud, Path(path), binary=format == "pcd-binary")
