"""Ground-plane segmentation and reattachment.

The floor is found by seeded random plane fitting restricted to a
low-elevation candidate band (points near the 1st-percentile z), with a
slope gate keeping the plane near horizontal. Ground membership is a
symmetric distance band around the refit plane: the fitted plane runs
through the middle of the noisy floor, so points scatter to both sides.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud
from .errors import EmptyCloud, NoGroundFound


@dataclass
class GroundParams:
    """Knobs of the plane search; distances in meters, slope in degrees."""

    seed_band: float = 0.3
    inlier_eps: float = 0.05
    max_slope: float = 15.0
    ransac_iters: int = 200
    seed: int = 0


@dataclass
class GroundSplit:
    """Partition of a cloud into ground and non-ground index sets.

    plane is (unit normal n, offset d) with n . p + d = 0 on the plane;
    None when segmentation was skipped (no ground found, caller chose to
    continue).
    """

    ground_indices: np.ndarray
    nonground_indices: np.ndarray
    plane: tuple[np.ndarray, float] | None


def segment_ground(cloud: PointCloud, params: GroundParams | None = None) -> GroundSplit:
    """Split the cloud at a fitted near-horizontal floor plane.

    Raises NoGroundFound when the candidate band has fewer than 3 points
    or no sampled plane passes the slope gate with at least 3 inliers.
    """
    if params is None:
        params = GroundParams()
    if len(cloud) == 0:
        raise EmptyCloud("cannot segment an empty cloud")
    pts = cloud.points
    z = pts[:, 2]
    z_lo = np.percentile(z, 1.0)
    cand_idx = np.flatnonzero(z <= z_lo + params.seed_band)
    if len(cand_idx) < 3:
        raise NoGroundFound("fewer than 3 points in the low-elevation band")
    cand = pts[cand_idx]

    rng = np.random.default_rng(params.seed)
    cos_gate = np.cos(np.radians(params.max_slope))
    best_count = 0
    best_plane = None
    for _ in range(params.ransac_iters):
        ia, ib, ic = rng.choice(len(cand), size=3, replace=False)
        a, b, c = cand[ia], cand[ib], cand[ic]
        normal = np.cross(b - a, c - a)
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            continue
        normal = normal / norm
        if normal[2] < 0:
            normal = -normal
        if normal[2] < cos_gate:
            continue
        d = -float(normal @ a)
        dist = np.abs(cand @ normal + d)
        count = int((dist <= params.inlier_eps).sum())
        if count > best_count:
            best_count = count
            best_plane = (normal, d)
    if best_plane is None or best_count < 3:
        raise NoGroundFound("no near-horizontal plane with >= 3 inliers")

    # least-squares refit on the winning consensus set
    normal, d = best_plane
    inlier = cand[np.abs(cand @ normal + d) <= params.inlier_eps]
    center = inlier.mean(axis=0)
    _, _, vt = np.linalg.svd(inlier - center, full_matrices=False)
    refit_n = vt[2]
    if refit_n[2] < 0:
        refit_n = -refit_n
    if refit_n[2] >= cos_gate:
        normal = refit_n
        d = -float(refit_n @ center)

    dist_all = np.abs(pts @ normal + d)
    ground_mask = dist_all <= params.inlier_eps
    return GroundSplit(
        ground_indices=np.flatnonzero(ground_mask).astype(np.int64),
        nonground_indices=np.flatnonzero(~ground_mask).astype(np.int64),
        plane=(normal, d),
    )


def reattach_ground(filtered_nonground: PointCloud, original: PointCloud,
                    split: GroundSplit) -> PointCloud:
    """Concatenate the filtered non-ground points with the original ground.

    Output order is the filtered points followed by the ground points;
    labels are carried when available on both parts.
    """
    ground = original.subset(split.ground_indices)
    points = np.concatenate([filtered_nonground.points, ground.points])
    labels = None
    if filtered_nonground.labels is not None and (
        len(ground) == 0 or ground.labels is not None
    ):
        glab = ground.labels if ground.labels is not None else np.empty(0, np.uint8)
        labels = np.concatenate([filtered_nonground.labels, glab])
    elif len(filtered_nonground) == 0 and ground.labels is not None:
        labels = ground.labels
    return PointCloud(points, labels)
