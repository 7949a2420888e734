"""Evaluation of a filtered map against a reference cloud.

Nearest-neighbor distance statistics, symmetric Chamfer distance, exact
Earth Mover's Distance on uniform subsamples, and confusion counts
against motion labels (positive class = dynamic).
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .cloud import PointCloud, downsample_uniform
from .errors import EmptyCloud
from .kdtree import build_index, knn_many


@dataclass
class DistanceStats:
    """Summary of per-point nearest-neighbor distances, meters."""

    mae: float
    variance: float
    rmse: float
    p90: float
    mean: float


@dataclass
class ConfusionReport:
    tp: int
    fp: int
    fn: int
    tn: int
    fp_pct: float
    fn_pct: float
    precision: float
    recall: float


@dataclass
class MetricsReport:
    distance: DistanceStats
    chamfer: float
    emd: float
    confusion: ConfusionReport | None
    runtime_s: float


def _nn_dists(pred: PointCloud, truth: PointCloud) -> np.ndarray:
    tree = build_index(truth.points)
    _, d = knn_many(tree, pred.points, 1)
    return d[:, 0]


def nn_distance_stats(pred: PointCloud, truth: PointCloud) -> DistanceStats:
    """Distance from each pred point to its nearest truth point.

    mae equals the mean (distances are non-negative); variance is the
    population variance; p90 interpolates linearly between order
    statistics.
    """
    if len(pred) == 0 or len(truth) == 0:
        raise EmptyCloud("nn_distance_stats needs non-empty clouds")
    d = _nn_dists(pred, truth)
    mean = float(d.mean())
    return DistanceStats(
        mae=mean,
        variance=float(d.var()),
        rmse=float(np.sqrt((d ** 2).mean())),
        p90=float(np.percentile(d, 90)),
        mean=mean,
    )


def chamfer(a: PointCloud, b: PointCloud) -> float:
    """Mean squared nn distance a to b plus the same b to a (symmetric)."""
    if len(a) == 0 or len(b) == 0:
        raise EmptyCloud("chamfer needs non-empty clouds")
    da = _nn_dists(a, b)
    db = _nn_dists(b, a)
    return float((da ** 2).mean() + (db ** 2).mean())


def emd(a: PointCloud, b: PointCloud, n_samples: int = 512, seed: int = 0) -> float:
    """Exact Earth Mover's Distance between uniform subsamples.

    Both clouds are downsampled to n = min(n_samples, |a|, |b|) points
    with the same seed, then the balanced assignment problem with
    Euclidean costs is solved exactly; the result is total cost / n.
    """
    if len(a) == 0 or len(b) == 0:
        raise EmptyCloud("emd needs non-empty clouds")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    n = min(n_samples, len(a), len(b))
    pa = downsample_uniform(a, n, seed).points
    pb = downsample_uniform(b, n, seed).points
    diff = pa[:, None, :] - pb[None, :, :]
    cost = np.sqrt((diff * diff).sum(axis=2))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum() / n)


def confusion(labels, removed) -> ConfusionReport:
    """Confusion counts for removal decisions; positive class = dynamic.

    fp_pct is the share of static points wrongly removed, fn_pct the
    share of dynamic points missed. precision/recall are 0 when their
    denominator is 0.
    """
    labels = np.asarray(labels, dtype=np.uint8)
    removed = np.asarray(removed, dtype=np.int64)
    n = len(labels)
    if removed.size and (removed.min() < 0 or removed.max() >= n):
        raise IndexError("removed contains indices outside the cloud")
    removed_mask = np.zeros(n, bool)
    removed_mask[removed] = True
    dyn = labels == 1
    tp = int((removed_mask & dyn).sum())
    fp = int((removed_mask & ~dyn).sum())
    fn = int((~removed_mask & dyn).sum())
    tn = int((~removed_mask & ~dyn).sum())
    return ConfusionReport(
        tp=tp, fp=fp, fn=fn, tn=tn,
        fp_pct=100.0 * fp / (fp + tn) if fp + tn else 0.0,
        fn_pct=100.0 * fn / (fn + tp) if fn + tp else 0.0,
        precision=tp / (tp + fp) if tp + fp else 0.0,
        recall=tp / (tp + fn) if tp + fn else 0.0,
    )


def evaluate(pred: PointCloud, truth: PointCloud, n_samples: int = 512,
             seed: int = 0, labels=None, removed=None,
             runtime_s: float = 0.0) -> MetricsReport:
    """Bundle all metrics into one report.

    confusion is included when labels and removed are both given.
    """
    stats = nn_distance_stats(pred, truth)
    conf = confusion(labels, removed) if labels is not None and removed is not None else None
    return MetricsReport(
        distance=stats,
        chamfer=chamfer(pred, truth),
        emd=emd(pred, truth, n_samples=n_samples, seed=seed),
        confusion=conf,
        runtime_s=runtime_s,
    )


def _sig6(x):
    """Round floats to 6 significant digits for stable report output."""
    if isinstance(x, float):
        return float(f"{x:.6g}")
    if isinstance(x, dict):
        return {k: _sig6(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_sig6(v) for v in x]
    return x


def report_to_dict(report: MetricsReport) -> dict:
    conf = None
    if report.confusion is not None:
        c = report.confusion
        conf = {
            "tp": c.tp, "fp": c.fp, "fn": c.fn, "tn": c.tn,
            "fp_pct": c.fp_pct, "fn_pct": c.fn_pct,
            "precision": c.precision, "recall": c.recall,
        }
    return _sig6({
        "mae": report.distance.mae,
        "variance": report.distance.variance,
        "rmse": report.distance.rmse,
        "p90": report.distance.p90,
        "chamfer": report.chamfer,
        "emd": report.emd,
        "confusion": conf,
        "runtime_s": report.runtime_s,
    })


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report_to_dict(report), indent=2) + "\n"
