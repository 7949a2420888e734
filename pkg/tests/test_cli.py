"""End-to-end command-line behavior, run in-process."""
import json

import numpy as np
import pytest

import dynahull as dh
from dynahull import cli


SCENARIO = {
    "room": [8.0, 6.0, 3.0],
    "n_frames": 10,
    "static_boxes": [{"min": [1.5, 1.0, 0.0], "max": [2.5, 2.0, 1.0]}],
    "n_actors": 2,
    "points_per_frame_static": 400,
    "points_per_actor_frame": 30,
    "noise_sigma": 0.01,
    "seed": 3,
}


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    """Scenario file, generated scene, and a truth cloud to eval against."""
    d = tmp_path_factory.mktemp("cliwork")
    scenario = d / "scenario.json"
    scenario.write_text(json.dumps(SCENARIO))
    rc = cli.main(["gen", "--scenario", str(scenario), "--out", str(d / "scene.pcd")])
    assert rc == 0
    scene = dh.load_cloud(d / "scene.pcd")
    truth = scene.subset(np.flatnonzero(scene.labels == 0))
    dh.save_cloud(truth, d / "truth.pcd")
    return d


def run_filter(work, tag, extra=()):
    out = work / f"{tag}.pcd"
    rc = cli.main(["filter", "--in", str(work / "scene.pcd"),
                   "--out", str(out), *extra])
    return rc, out


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------

def test_gen_outputs_and_summary_line(work, tmp_path, capsys):
    scenario = work / "scenario.json"
    out = tmp_path / "scene.pcd"
    rc = cli.main(["gen", "--scenario", str(scenario), "--out", str(out)])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    n = 10 * (400 + 2 * 30)
    assert lines[0] == f"points {n} static {10 * 400} dynamic {10 * 2 * 30}"
    assert lines[1].startswith("wrote ")
    sidecar = tmp_path / "scene.provenance.json"
    assert out.exists() and sidecar.exists()
    meta = json.loads(sidecar.read_text())
    assert meta["config"]["n_frames"] == 10
    assert meta["ground_plane"]["normal"] == [0.0, 0.0, 1.0]
    assert len(meta["actor_trajectories"]) == 2
    assert len(meta["actor_trajectories"][0]) == 10
    # byte-identical to the fixture's run of the same scenario
    assert out.read_bytes() == (work / "scene.pcd").read_bytes()


def test_gen_flag_overrides(work, tmp_path, capsys):
    rc = cli.main(["gen", "--scenario", str(work / "scenario.json"),
                   "--out", str(tmp_path / "s.pcd"), "--frames", "3",
                   "--actors", "0"])
    assert rc == 0
    assert capsys.readouterr().out.splitlines()[0] == "points 1200 static 1200 dynamic 0"


def test_gen_missing_scenario_is_config_error(tmp_path, capsys):
    rc = cli.main(["gen", "--scenario", str(tmp_path / "nope.json"),
                   "--out", str(tmp_path / "s.pcd")])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_gen_invalid_override_is_config_error(work, tmp_path, capsys):
    rc = cli.main(["gen", "--scenario", str(work / "scenario.json"),
                   "--out", str(tmp_path / "s.pcd"), "--frames", "0"])
    assert rc == 2


# ---------------------------------------------------------------------------
# filter
# ---------------------------------------------------------------------------

def test_filter_writes_cloud_report_and_removed(work, capsys):
    rc, out = run_filter(work, "filtered")
    assert rc == 0
    assert "wrote" in capsys.readouterr().err
    report = json.loads((work / "filtered.report.json").read_text())
    removed = json.loads((work / "filtered.removed.json").read_text())
    cloud = dh.load_cloud(out)
    scene = dh.load_cloud(work / "scene.pcd")
    assert report["command"] == "filter"
    assert report["version"] == dh.__version__
    assert report["config"]["k"] == 75
    assert report["config"]["clusters"] == 5
    assert report["config"]["ground"]["inlier_eps"] == 0.05
    assert report["input"]["points"] == len(scene)
    assert report["output"]["points"] == len(cloud)
    assert report["removed_total"] == len(removed["removed_indices"])
    assert len(cloud) + report["removed_total"] == len(scene)
    assert len(report["clusters"]) == 5
    assert sum(r["removed_count"] for r in report["clusters"]) == report["removed_total"]
    assert set(report["timings"]) == {"ground", "cluster", "density", "threshold", "merge"}
    idx = removed["removed_indices"]
    assert idx == sorted(idx)


def test_filter_deterministic_and_thread_invariant(work):
    rc1, out1 = run_filter(work, "det1", ["--no-timings"])
    rc2, out2 = run_filter(work, "det2", ["--no-timings"])
    rc3, out3 = run_filter(work, "det3", ["--no-timings", "--threads", "2"])
    assert rc1 == rc2 == rc3 == 0
    assert out1.read_bytes() == out2.read_bytes() == out3.read_bytes()
    r1 = (work / "det1.report.json").read_text().replace("det1", "X")
    r2 = (work / "det2.report.json").read_text().replace("det2", "X")
    r3 = (work / "det3.report.json").read_text().replace("det3", "X")
    assert r1 == r2 == r3
    assert "timings" not in json.loads(r1)


def test_filter_report_to_stdout(work, capsys):
    rc, out = run_filter(work, "stdout_run", ["--report", "-"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "filter"


def test_filter_rejects_bad_k(work, capsys):
    rc, _ = run_filter(work, "badk", ["--k", "3"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_filter_missing_input_is_io_error(work, tmp_path, capsys):
    rc = cli.main(["filter", "--in", str(tmp_path / "absent.pcd"),
                   "--out", str(tmp_path / "o.pcd")])
    assert rc == 3


def test_filter_tiny_cloud_is_pipeline_error(tmp_path, capsys):
    rng = np.random.default_rng(0)
    dh.save_cloud(dh.PointCloud(rng.random((50, 3))), tmp_path / "tiny.pcd")
    import warnings as w
    with w.catch_warnings():
        w.simplefilter("ignore")
        rc = cli.main(["filter", "--in", str(tmp_path / "tiny.pcd"),
                       "--out", str(tmp_path / "o.pcd")])
    assert rc == 4


def test_config_file_supplies_defaults_flags_win(work, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k": 10, "clusters": 3}))
    rc = cli.main(["filter", "--in", str(work / "scene.pcd"),
                   "--out", str(tmp_path / "a.pcd"), "--config", str(cfg)])
    assert rc == 0
    rep = json.loads((tmp_path / "a.report.json").read_text())
    assert rep["config"]["k"] == 10 and rep["config"]["clusters"] == 3
    rc = cli.main(["filter", "--in", str(work / "scene.pcd"),
                   "--out", str(tmp_path / "b.pcd"), "--config", str(cfg),
                   "--k", "80"])
    assert rc == 0
    rep = json.loads((tmp_path / "b.report.json").read_text())
    assert rep["config"]["k"] == 80 and rep["config"]["clusters"] == 3


def test_missing_required_flag_exits_via_argparse(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["filter", "--out", "x.pcd"])
    assert exc.value.code == 2


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

def test_eval_self_is_zero(work, capsys):
    rc = cli.main(["eval", "--pred", str(work / "truth.pcd"),
                   "--truth", str(work / "truth.pcd"), "--n-samples", "64"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["mae"] == 0.0
    assert payload["chamfer"] == 0.0
    assert payload["emd"] == 0.0
    assert payload["confusion"] is None
    assert payload["config"]["n_samples"] == 64
    assert payload["runtime_s"] >= 0.0


def test_eval_confusion_from_original_cloud(work, capsys):
    rc, out = run_filter(work, "forconf")
    capsys.readouterr()
    rc = cli.main(["eval", "--pred", str(out), "--truth", str(work / "truth.pcd"),
                   "--removed", str(work / "forconf.removed.json"),
                   "--orig", str(work / "scene.pcd"), "--n-samples", "32"])
    assert rc == 0
    conf = json.loads(capsys.readouterr().out)["confusion"]
    assert conf is not None
    n = 10 * (400 + 2 * 30)
    assert conf["tp"] + conf["fp"] + conf["fn"] + conf["tn"] == n
    assert 0.0 <= conf["precision"] <= 1.0 and 0.0 <= conf["recall"] <= 1.0


def test_eval_confusion_from_label_sidecar(work, tmp_path, capsys):
    scene = dh.load_cloud(work / "scene.pcd")
    labels = tmp_path / "labels.json"
    labels.write_text(json.dumps(scene.labels.tolist()))
    removed = tmp_path / "removed.json"
    removed.write_text(json.dumps({"removed_indices": [0, 1, 2]}))
    rc = cli.main(["eval", "--pred", str(work / "truth.pcd"),
                   "--truth", str(work / "truth.pcd"),
                   "--removed", str(removed), "--labels", str(labels),
                   "--n-samples", "16"])
    assert rc == 0
    conf = json.loads(capsys.readouterr().out)["confusion"]
    assert conf["fp"] == 3  # the first frame's points are static


def test_eval_removed_without_labels_is_exit_5(work, tmp_path, capsys):
    removed = tmp_path / "removed.json"
    removed.write_text(json.dumps({"removed_indices": [0]}))
    rc = cli.main(["eval", "--pred", str(work / "truth.pcd"),
                   "--truth", str(work / "truth.pcd"), "--removed", str(removed)])
    assert rc == 5
    assert "labels" in capsys.readouterr().err


def test_eval_out_of_range_removed_is_config_error(work, tmp_path, capsys):
    labels = tmp_path / "labels.json"
    labels.write_text(json.dumps([0, 1, 0]))
    removed = tmp_path / "removed.json"
    removed.write_text(json.dumps({"removed_indices": [99]}))
    rc = cli.main(["eval", "--pred", str(work / "truth.pcd"),
                   "--truth", str(work / "truth.pcd"),
                   "--removed", str(removed), "--labels", str(labels)])
    assert rc == 2


def test_eval_strip_ground_runs(work, tmp_path, capsys):
    report = tmp_path / "rep.json"
    rc = cli.main(["eval", "--pred", str(work / "truth.pcd"),
                   "--truth", str(work / "truth.pcd"),
                   "--strip-ground", "--strip-ceiling",
                   "--n-samples", "16", "--report", str(report)])
    assert rc == 0
    payload = json.loads(report.read_text())
    assert payload["config"]["strip_ground"] is True
    assert payload["mae"] == 0.0


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

def test_bench_sweeps_and_reports(work, capsys):
    rc = cli.main(["bench", "--in", str(work / "scene.pcd"), "--axis", "clusters",
                   "--values", "2,5", "--n-samples", "16"])
    assert rc == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["command"] == "bench"
    assert payload["config"]["axis"] == "clusters"
    assert payload["config"]["values"] == [2, 5]
    assert [r["value"] for r in payload["rows"]] == [2, 5]
    for row in payload["rows"]:
        assert row["runtime_s"] > 0.0
        assert row["metrics"]["mae"] >= 0.0
        # labeled input: confusion comes along for free
        assert row["metrics"]["confusion"]["tp"] >= 0


def test_bench_empty_values_is_config_error(work, capsys):
    rc = cli.main(["bench", "--in", str(work / "scene.pcd"), "--axis", "k",
                   "--values", " , "])
    assert rc == 2


def test_bench_unlabeled_input_needs_truth(work, tmp_path, capsys):
    scene = dh.load_cloud(work / "scene.pcd")
    bare = tmp_path / "bare.pcd"
    dh.save_cloud(dh.PointCloud(scene.points), bare)
    rc = cli.main(["bench", "--in", str(bare), "--axis", "k", "--values", "75"])
    assert rc == 2
    rc = cli.main(["bench", "--in", str(bare), "--axis", "k", "--values", "75",
                   "--truth", str(work / "truth.pcd"), "--n-samples", "16"])
    assert rc == 0
    capsys.readouterr()
