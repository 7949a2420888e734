"""Density-based dynamic point filtering.

Points accumulated from stationary surfaces pack tightly over repeated
scans, while points from moving objects smear out, so a point's k nearest
neighbors span a small convex hull when static and a large one when
dynamic. The pipeline: split off the ground plane, k-means the rest into
regions, score every point by the density factor k / hull_volume(its k
neighbors), rescale cluster point counts into per-cluster removal
percentages, drop the lowest-density share of each cluster, and reattach
the ground.
"""
from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange

from .cloud import PointCloud
from .cluster import kmeans
from .errors import InvalidConfig, NoGroundFound, TooFewPoints
from .ground import GroundParams, GroundSplit, reattach_ground, segment_ground
from .hull import _volume_of
from .kdtree import _build, _query


@dataclass
class DynaHullParams:
    """All pipeline tunables.

    min_remove / max_remove are percentages; vol_floor caps the hull
    volume from below so flat (degenerate) neighborhoods get a huge
    density and are kept. threshold_mode "quantile" removes exactly the
    scheduled share; "iterative" grows the threshold in steps of
    iter_step_frac times the density standard deviation until the share
    is reached.
    """

    k_neighbors: int = 75
    n_clusters: int = 5
    min_remove: float = 5.0
    max_remove: float = 20.0
    seed: int = 0
    ground: GroundParams = field(default_factory=GroundParams)
    vol_floor: float = 1e-12
    threshold_mode: str = "quantile"
    iter_step_frac: float = 0.01
    per_cluster_knn: bool = False
    kmeans_max_iter: int = 100
    kmeans_tol: float = 1e-4

    def validate(self):
        if not (0 <= self.min_remove <= self.max_remove <= 100):
            raise InvalidConfig(
                f"need 0 <= min_remove <= max_remove <= 100, got "
                f"[{self.min_remove}, {self.max_remove}]"
            )
        if self.k_neighbors < 4:
            raise InvalidConfig(f"k_neighbors must be >= 4, got {self.k_neighbors}")
        if self.n_clusters < 1:
            raise InvalidConfig(f"n_clusters must be >= 1, got {self.n_clusters}")
        if self.vol_floor <= 0:
            raise InvalidConfig(f"vol_floor must be > 0, got {self.vol_floor}")
        if self.threshold_mode not in ("quantile", "iterative"):
            raise InvalidConfig(f"unknown threshold_mode {self.threshold_mode!r}")
        if self.iter_step_frac <= 0:
            raise InvalidConfig(f"iter_step_frac must be > 0, got {self.iter_step_frac}")


@dataclass
class DensityField:
    """Per-point density factors (points per cubic meter), cloud-aligned."""

    densities: np.ndarray


@dataclass
class ClusterRemoval:
    """One cluster's slice of the removal plan."""

    cluster: int
    count: int
    removal_pct: float
    threshold: float
    removed: np.ndarray


@dataclass
class RemovalPlan:
    clusters: list[ClusterRemoval]


@dataclass
class FilterResult:
    """Filtered cloud, removed original indices, plan, and stage timings."""

    filtered: PointCloud
    removed_indices: np.ndarray
    plan: RemovalPlan
    timings: dict


@njit(cache=True, parallel=True)
def _density_kernel(pts, perm, n_lo, n_hi, n_axis, n_left, n_right,
                    bb_mn, bb_mx, k, vol_floor):
    n = pts.shape[0]
    out = np.empty(n, np.float64)
    kk = min(k, n)
    for i in prange(n):
        heap_d = np.empty(kk, np.float64)
        heap_i = np.empty(kk, np.int64)
        stack = np.empty(2048, np.int64)
        m = _query(pts, perm, n_lo, n_hi, n_axis, n_left, n_right,
                   bb_mn, bb_mx, pts[i, 0], pts[i, 1], pts[i, 2],
                   kk, heap_d, heap_i, stack)
        nb = np.empty((m, 3), np.float64)
        for j in range(m):
            nb[j, 0] = pts[heap_i[j], 0]
            nb[j, 1] = pts[heap_i[j], 1]
            nb[j, 2] = pts[heap_i[j], 2]
        v = _volume_of(nb)
        out[i] = kk / max(v, vol_floor)
    return out


def density_field(nonground: PointCloud | np.ndarray, k: int,
                  vol_floor: float = 1e-12) -> DensityField:
    """Density factor k / hull_volume(k nearest neighbors) per point.

    The neighborhood of a point includes the point itself, so k is the
    exact number of points whose hull is measured. Degenerate (flat)
    neighborhoods hit the vol_floor cap and come out maximally dense.
    """
    pts = nonground.points if isinstance(nonground, PointCloud) else \
        np.ascontiguousarray(np.asarray(nonground, dtype=np.float64))
    if k < 4:
        raise InvalidConfig(f"k must be >= 4, got {k}")
    if len(pts) < k:
        raise TooFewPoints(f"need at least k={k} points, got {len(pts)}")
    nodes = _build(pts)
    dens = _density_kernel(pts, *nodes, k, vol_floor)
    return DensityField(densities=dens)


def rescale_removal(counts, min_remove: float, max_remove: float) -> np.ndarray:
    """Map cluster point counts onto removal percentages.

    Affine rescale of counts from [N_min, N_max] to
    [min_remove, max_remove]; when every cluster has the same count the
    signal is empty and all clusters get min_remove.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if counts.size == 0:
        raise ValueError("counts must be non-empty")
    n_min = counts.min()
    n_max = counts.max()
    if n_max == n_min:
        return np.full(counts.shape, float(min_remove))
    return (counts - n_min) / (n_max - n_min) * (max_remove - min_remove) + min_remove


def threshold_removal(densities, target: float, mode: str = "quantile",
                      iter_step_frac: float = 0.01):
    """Pick the density threshold that removes the target percentage.

    quantile mode removes exactly floor(target% * n) points, lowest
    density first with ties broken by lower index; tau is the density of
    the first retained point (0 when nothing is removed, +inf when
    everything is). iterative mode raises tau from zero in steps of
    iter_step_frac * std(densities) until the removed share reaches the
    target; with zero spread it falls back to the quantile rule.

    Returns (tau, removed) where removed holds ascending local indices.
    """
    dens = np.asarray(densities, dtype=np.float64)
    n = len(dens)
    if n == 0:
        raise ValueError("densities must be non-empty")
    if not (0 <= target <= 100):
        raise ValueError(f"target must be in [0, 100], got {target}")

    if mode == "iterative":
        sigma = float(dens.std())
        # std() of identical values lands a few ulps above zero (mean
        # rounding), which would make the step size ~1e-18 and the loop
        # below run forever; anything under 1e-12 of the data scale is
        # rounding noise, not spread.
        if sigma > 1e-12 * max(float(np.abs(dens).max()), 1.0):
            step = iter_step_frac * sigma
            tau = 0.0
            goal = target / 100.0
            max_steps = int(np.ceil(dens.max() / step)) + 2
            for _ in range(max_steps):
                removed = dens < tau
                if removed.sum() / n >= goal:
                    break
                tau += step
            else:
                removed = dens < tau
            return float(tau), np.flatnonzero(removed).astype(np.int64)
        # zero spread carries no ordering signal; fall through to quantile

    m = int(np.floor(target * n / 100.0 + 1e-9))
    order = np.lexsort((np.arange(n), dens))
    removed = np.sort(order[:m]).astype(np.int64)
    if m == 0:
        tau = 0.0
    elif m == n:
        tau = np.inf
    else:
        tau = float(dens[order[m]])
    return tau, removed


def filter_map(cloud: PointCloud, params: DynaHullParams | None = None) -> FilterResult:
    """Run the full filtering pipeline on an accumulated map.

    Stages: ground split (a missing ground degrades to an empty ground
    set with a warning), k-means clustering of the rest, per-point
    density factors over the whole non-ground cloud (or per cluster with
    per_cluster_knn), removal percentages from cluster counts, per-cluster
    threshold removal, and ground reattachment. Output order: retained
    non-ground points in original relative order, then ground points.
    Deterministic for fixed params, including across thread counts.
    """
    if params is None:
        params = DynaHullParams()
    params.validate()
    timings = {}

    t0 = time.perf_counter()
    try:
        split = segment_ground(cloud, params.ground)
    except NoGroundFound as exc:
        warnings.warn(f"proceeding without ground split: {exc}")
        split = GroundSplit(
            ground_indices=np.empty(0, np.int64),
            nonground_indices=np.arange(len(cloud), dtype=np.int64),
            plane=None,
        )
    timings["ground"] = time.perf_counter() - t0

    nonground = cloud.subset(split.nonground_indices)
    if len(nonground) < params.k_neighbors:
        raise TooFewPoints(
            f"{len(nonground)} non-ground points but k={params.k_neighbors}"
        )

    t0 = time.perf_counter()
    assign = kmeans(nonground.points, params.n_clusters, seed=params.seed,
                    max_iter=params.kmeans_max_iter, tol=params.kmeans_tol)
    timings["cluster"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    dens = np.empty(len(nonground))
    if params.per_cluster_knn:
        for i in range(params.n_clusters):
            local = np.flatnonzero(assign.labels == i)
            if len(local) == 0:
                continue
            sub = np.ascontiguousarray(nonground.points[local])
            kk = min(params.k_neighbors, len(sub))
            nodes = _build(sub)
            dens[local] = _density_kernel(sub, *nodes, kk, params.vol_floor)
    else:
        field_ = density_field(nonground, params.k_neighbors, params.vol_floor)
        dens = field_.densities
    timings["density"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    pcts = rescale_removal(assign.counts, params.min_remove, params.max_remove)
    plan_rows = []
    removed_local_parts = []
    for i in range(params.n_clusters):
        local = np.flatnonzero(assign.labels == i)
        if len(local) == 0:
            plan_rows.append(ClusterRemoval(
                cluster=i, count=0, removal_pct=float(pcts[i]),
                threshold=0.0, removed=np.empty(0, np.int64),
            ))
            continue
        tau, rem = threshold_removal(dens[local], float(pcts[i]),
                                     mode=params.threshold_mode,
                                     iter_step_frac=params.iter_step_frac)
        removed_local = local[rem]
        removed_local_parts.append(removed_local)
        plan_rows.append(ClusterRemoval(
            cluster=i,
            count=int(assign.counts[i]),
            removal_pct=float(pcts[i]),
            threshold=float(tau),
            removed=np.sort(split.nonground_indices[removed_local]),
        ))
    timings["threshold"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    removed_nonground = (np.sort(np.concatenate(removed_local_parts))
                         if removed_local_parts else np.empty(0, np.int64))
    keep_mask = np.ones(len(nonground), bool)
    keep_mask[removed_nonground] = False
    filtered_nonground = nonground.subset(np.flatnonzero(keep_mask))
    removed_indices = np.sort(split.nonground_indices[removed_nonground]).astype(np.int64)
    out = reattach_ground(filtered_nonground, cloud, split)
    timings["merge"] = time.perf_counter() - t0

    return FilterResult(
        filtered=out,
        removed_indices=removed_indices,
        plan=RemovalPlan(clusters=plan_rows),
        timings=timings,
    )
