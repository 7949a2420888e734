"""Command-line interface: gen | filter | eval | bench.

Reports are JSON only, embed the fully resolved configuration and the
toolkit version, and round floats to 6 significant digits. Flag values
override --config file entries, which override built-in defaults. Exit
codes: 0 ok, 2 configuration error, 3 I/O error, 4 pipeline failure,
5 confusion requested without labels.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cloud import PointCloud, load_cloud, save_cloud
from .errors import (CloudIoError, EmptyCloud, InsufficientPoints,
                     InvalidConfig, IoFailure, NoGroundFound, TooFewPoints)
from .ground import GroundParams, segment_ground
from .metrics import _sig6, evaluate, report_to_dict
from .pipeline import DynaHullParams, filter_map
from .scene import ScenarioConfig, generate_scene

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_PIPELINE = 4
EXIT_NO_LABELS = 5


class _NoLabels(Exception):
    pass


def _set_threads(n):
    import numba

    n = 1 if n is None else int(n)
    numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))


def _load_config_file(path):
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidConfig(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InvalidConfig(f"config {path} must hold a JSON object")
    return data


def _resolver(args, cfg):
    def pick(name, default):
        v = getattr(args, name, None)
        if v is not None:
            return v
        if name in cfg:
            return cfg[name]
        return default
    return pick


def _json_safe(x):
    if isinstance(x, float) and not np.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_json_safe(v) for v in x]
    return x


def _write_report(report: dict, path: str):
    text = json.dumps(_json_safe(_sig6(report)), indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        try:
            Path(path).write_text(text)
        except OSError as exc:
            raise IoFailure(f"cannot write report {path}: {exc}") from exc


def _params_from(pick) -> DynaHullParams:
    ground = GroundParams(
        seed_band=float(pick("seed_band", 0.3)),
        inlier_eps=float(pick("inlier_eps", 0.05)),
        max_slope=float(pick("max_slope", 15.0)),
        ransac_iters=int(pick("ransac_iters", 200)),
        seed=int(pick("seed", 0)),
    )
    return DynaHullParams(
        k_neighbors=int(pick("k", 75)),
        n_clusters=int(pick("clusters", 5)),
        min_remove=float(pick("remove_min", 5.0)),
        max_remove=float(pick("remove_max", 20.0)),
        seed=int(pick("seed", 0)),
        ground=ground,
        vol_floor=float(pick("vol_floor", 1e-12)),
        threshold_mode=str(pick("threshold_mode", "quantile")),
        iter_step_frac=float(pick("iter_step_frac", 0.01)),
        per_cluster_knn=bool(pick("per_cluster_knn", False)),
    )


def _params_dict(p: DynaHullParams) -> dict:
    return {
        "k": p.k_neighbors,
        "clusters": p.n_clusters,
        "remove_min": p.min_remove,
        "remove_max": p.max_remove,
        "seed": p.seed,
        "vol_floor": p.vol_floor,
        "threshold_mode": p.threshold_mode,
        "iter_step_frac": p.iter_step_frac,
        "per_cluster_knn": p.per_cluster_knn,
        "ground": {
            "seed_band": p.ground.seed_band,
            "inlier_eps": p.ground.inlier_eps,
            "max_slope": p.ground.max_slope,
            "ransac_iters": p.ground.ransac_iters,
            "seed": p.ground.seed,
        },
    }


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    cfg = _load_config_file(args.config)
    pick = _resolver(args, cfg)
    if args.scenario is not None:
        try:
            scenario = ScenarioConfig.from_json(args.scenario)
        except OSError as exc:
            raise InvalidConfig(f"cannot read scenario {args.scenario}: {exc}") from exc
        except (json.JSONDecodeError, TypeError, KeyError) as exc:
            raise InvalidConfig(f"bad scenario file {args.scenario}: {exc}") from exc
    else:
        scenario = ScenarioConfig()
    if args.frames is not None:
        scenario.n_frames = args.frames
    if args.actors is not None:
        scenario.n_actors = args.actors
    if args.seed is not None:
        scenario.seed = args.seed
    if args.noise_sigma is not None:
        scenario.noise_sigma = args.noise_sigma
    scenario.validate()

    scene = generate_scene(scenario)
    out = Path(args.out)
    save_cloud(scene.cloud, out, format="pcd-binary")
    sidecar = args.sidecar or str(out.with_suffix("")) + ".provenance.json"
    normal, offset = scene.true_ground_plane
    provenance = {
        "version": __version__,
        "config": scenario.to_dict(),
        "ground_plane": {"normal": list(normal), "offset": offset},
        "actor_trajectories": [p.tolist() for p in scene.actor_trajectories],
    }
    try:
        Path(sidecar).write_text(json.dumps(provenance, indent=2) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {sidecar}: {exc}") from exc

    n_static = int((scene.cloud.labels == 0).sum())
    n_dynamic = int((scene.cloud.labels == 1).sum())
    print(f"points {len(scene.cloud)} static {n_static} dynamic {n_dynamic}")
    print(f"wrote {out} and {sidecar}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# filter
# ---------------------------------------------------------------------------

def cmd_filter(args) -> int:
    cfg = _load_config_file(args.config)
    pick = _resolver(args, cfg)
    params = _params_from(pick)
    params.validate()

    cloud = load_cloud(args.infile)
    result = filter_map(cloud, params)

    out = Path(args.out)
    save_cloud(result.filtered, out, format="pcd-binary")
    removed_path = args.removed_json or str(out.with_suffix("")) + ".removed.json"
    try:
        Path(removed_path).write_text(json.dumps(
            {"removed_indices": result.removed_indices.tolist()}) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {removed_path}: {exc}") from exc

    report = {
        "version": __version__,
        "command": "filter",
        "config": _params_dict(params),
        "input": {"path": str(args.infile), "points": len(cloud)},
        "output": {"path": str(out), "points": len(result.filtered)},
        "removed_total": int(len(result.removed_indices)),
        "clusters": [
            {
                "cluster": row.cluster,
                "count": row.count,
                "removal_pct": row.removal_pct,
                "threshold": row.threshold,
                "removed_count": int(len(row.removed)),
            }
            for row in result.plan.clusters
        ],
    }
    if not args.no_timings:
        report["timings"] = {k: float(v) for k, v in result.timings.items()}
    report_path = args.report or str(out.with_suffix("")) + ".report.json"
    _write_report(report, report_path)
    if report_path != "-":
        print(f"wrote {out}, {removed_path}, {report_path}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def _strip_planes(cloud: PointCloud, ground: bool, ceiling: bool) -> PointCloud:
    """Drop near-horizontal extreme planes before distance metrics."""
    if ground:
        try:
            split = segment_ground(cloud)
            cloud = cloud.subset(split.nonground_indices)
        except NoGroundFound:
            print("warning: no ground plane to strip", file=sys.stderr)
    if ceiling:
        flipped = PointCloud(cloud.points * np.array([1.0, 1.0, -1.0]))
        try:
            split = segment_ground(flipped)
            cloud = cloud.subset(split.nonground_indices)
        except NoGroundFound:
            print("warning: no ceiling plane to strip", file=sys.stderr)
    return cloud


def _load_removed(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("removed_indices")
    if not isinstance(data, list):
        raise InvalidConfig(f"{path} does not hold a removed-index list")
    return np.asarray(data, dtype=np.int64)


def _load_labels_sidecar(path):
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise InvalidConfig(f"labels sidecar {path} must hold a JSON array")
    return np.asarray(data, dtype=np.uint8)


def cmd_eval(args) -> int:
    cfg = _load_config_file(args.config)
    pick = _resolver(args, cfg)
    n_samples = int(pick("n_samples", 512))
    seed = int(pick("seed", 0))

    pred = load_cloud(args.pred)
    truth = load_cloud(args.truth)

    labels = None
    removed = None
    if args.removed is not None:
        removed = _load_removed(args.removed)
        if args.labels is not None:
            labels = _load_labels_sidecar(args.labels)
        elif args.orig is not None:
            orig = load_cloud(args.orig)
            labels = orig.labels
        if labels is None:
            raise _NoLabels(
                "confusion requested (--removed) but no labels available; "
                "pass --labels or a labeled --orig cloud"
            )

    pred_m = _strip_planes(pred, args.strip_ground, args.strip_ceiling)
    truth_m = _strip_planes(truth, args.strip_ground, args.strip_ceiling)

    t0 = time.perf_counter()
    report = evaluate(pred_m, truth_m, n_samples=n_samples, seed=seed,
                      labels=labels, removed=removed)
    report.runtime_s = time.perf_counter() - t0

    payload = report_to_dict(report)
    payload["version"] = __version__
    payload["config"] = {
        "pred": str(args.pred), "truth": str(args.truth),
        "n_samples": n_samples, "seed": seed,
        "strip_ground": bool(args.strip_ground),
        "strip_ceiling": bool(args.strip_ceiling),
        "removed": args.removed, "labels": args.labels, "orig": args.orig,
    }
    _write_report(payload, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def cmd_bench(args) -> int:
    cfg = _load_config_file(args.config)
    pick = _resolver(args, cfg)
    base = _params_from(pick)
    base.validate()
    n_samples = int(pick("n_samples", 512))

    try:
        values = [int(v) for v in args.values.split(",") if v.strip()]
    except ValueError as exc:
        raise InvalidConfig(f"bad --values list: {exc}") from exc
    if not values:
        raise InvalidConfig("--values must list at least one integer")
    if args.axis not in ("k", "clusters"):
        raise InvalidConfig(f"unknown sweep axis {args.axis!r}")

    cloud = load_cloud(args.infile)
    if args.truth is not None:
        truth = load_cloud(args.truth)
    elif cloud.labels is not None:
        truth = cloud.subset(np.flatnonzero(cloud.labels == 0))
    else:
        raise InvalidConfig("bench needs --truth or a labeled input cloud")

    rows = []
    for value in values:
        params = _params_from(pick)
        if args.axis == "k":
            params.k_neighbors = value
        else:
            params.n_clusters = value
        params.validate()
        t0 = time.perf_counter()
        result = filter_map(cloud, params)
        runtime = time.perf_counter() - t0
        metrics = evaluate(result.filtered, truth, n_samples=n_samples,
                           seed=params.seed, labels=cloud.labels,
                           removed=result.removed_indices
                           if cloud.labels is not None else None)
        metrics.runtime_s = runtime
        rows.append({
            "value": value,
            "runtime_s": runtime,
            "metrics": report_to_dict(metrics),
        })

    report = {
        "version": __version__,
        "command": "bench",
        "config": {
            "axis": args.axis,
            "values": values,
            "input": str(args.infile),
            "truth": args.truth,
            "n_samples": n_samples,
            "base": _params_dict(base),
        },
        "rows": rows,
    }
    _write_report(report, args.report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="RNG seed (default 0, or scenario seed for gen)")
    common.add_argument("--threads", type=int, default=None,
                        help="worker thread cap (default 1); output does not depend on it")
    common.add_argument("--config", default=None,
                        help="JSON file of defaults, overridden by flags")

    filt = argparse.ArgumentParser(add_help=False)
    filt.add_argument("--k", type=int, default=None, dest="k",
                      help="neighbor count for the density factor (default 75)")
    filt.add_argument("--clusters", type=int, default=None,
                      help="k-means cluster count (default 5)")
    filt.add_argument("--remove-min", type=float, default=None, dest="remove_min",
                      help="smallest per-cluster removal percentage (default 5)")
    filt.add_argument("--remove-max", type=float, default=None, dest="remove_max",
                      help="largest per-cluster removal percentage (default 20)")
    filt.add_argument("--vol-floor", type=float, default=None, dest="vol_floor",
                      help="lower cap on hull volume, m^3 (default 1e-12)")
    filt.add_argument("--threshold-mode", choices=("quantile", "iterative"),
                      default=None, dest="threshold_mode")
    filt.add_argument("--iter-step-frac", type=float, default=None,
                      dest="iter_step_frac",
                      help="iterative-mode step as a fraction of the density std")
    filt.add_argument("--per-cluster-knn", action="store_true", default=None,
                      dest="per_cluster_knn",
                      help="compute neighborhoods inside each cluster instead of globally")
    filt.add_argument("--seed-band", type=float, default=None, dest="seed_band",
                      help="ground candidate band above the 1st-percentile z (default 0.3)")
    filt.add_argument("--inlier-eps", type=float, default=None, dest="inlier_eps",
                      help="ground plane inlier distance (default 0.05)")
    filt.add_argument("--max-slope", type=float, default=None, dest="max_slope",
                      help="ground plane slope limit in degrees (default 15)")
    filt.add_argument("--ransac-iters", type=int, default=None, dest="ransac_iters",
                      help="ground plane sampling rounds (default 200)")

    parser = argparse.ArgumentParser(
        prog="dynahull",
        description="Remove dynamic points from accumulated indoor maps "
                    "by neighborhood density.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common],
                       help="generate a labeled synthetic scene")
    p.add_argument("--scenario", default=None, help="scenario JSON file")
    p.add_argument("--out", required=True, help="output PCD path")
    p.add_argument("--sidecar", default=None,
                   help="provenance JSON path (default: <out>.provenance.json)")
    p.add_argument("--frames", type=int, default=None)
    p.add_argument("--actors", type=int, default=None)
    p.add_argument("--noise-sigma", type=float, default=None, dest="noise_sigma")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("filter", parents=[common, filt],
                       help="remove dynamic points from a map")
    p.add_argument("--in", required=True, dest="infile", help="input PCD")
    p.add_argument("--out", required=True, help="filtered PCD path")
    p.add_argument("--report", default=None,
                   help="run report path, '-' for stdout (default: <out>.report.json)")
    p.add_argument("--removed-json", default=None, dest="removed_json",
                   help="removed-index JSON path (default: <out>.removed.json)")
    p.add_argument("--no-timings", action="store_true", dest="no_timings",
                   help="omit wall-clock timings so reports are byte-reproducible")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("eval", parents=[common],
                       help="score a filtered map against a reference")
    p.add_argument("--pred", required=True, help="filtered PCD")
    p.add_argument("--truth", required=True, help="reference PCD")
    p.add_argument("--report", default="-",
                   help="report path, '-' for stdout (default)")
    p.add_argument("--n-samples", type=int, default=None, dest="n_samples",
                   help="subsample size for the transport metric (default 512)")
    p.add_argument("--removed", default=None,
                   help="removed-index JSON from filter; requests confusion metrics")
    p.add_argument("--labels", default=None,
                   help="label sidecar JSON (array of 0/1) for the original cloud")
    p.add_argument("--orig", default=None,
                   help="original labeled PCD used for confusion labels")
    p.add_argument("--strip-ground", action="store_true", dest="strip_ground",
                   help="drop the floor plane from both clouds before distance metrics")
    p.add_argument("--strip-ceiling", action="store_true", dest="strip_ceiling",
                   help="drop the ceiling plane from both clouds before distance metrics")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", parents=[common, filt],
                       help="sweep one parameter and report metrics per value")
    p.add_argument("--in", required=True, dest="infile", help="input PCD")
    p.add_argument("--truth", default=None,
                   help="reference PCD (default: static subset of a labeled input)")
    p.add_argument("--axis", required=True, choices=("k", "clusters"))
    p.add_argument("--values", required=True,
                   help="comma-separated integer list, e.g. 25,50,75,100")
    p.add_argument("--report", default="-",
                   help="report path, '-' for stdout (default)")
    p.add_argument("--n-samples", type=int, default=None, dest="n_samples")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _set_threads(getattr(args, "threads", None))
        return args.func(args)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CloudIoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (TooFewPoints, InsufficientPoints, EmptyCloud) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except _NoLabels as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_LABELS
    except IndexError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
