"""Shared fixtures: jit warmup and the pinned demo scene."""
from pathlib import Path

import numpy as np
import pytest

import dynahull as dh

REPO = Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jit kernels once so no test pays the cost mid-timing."""
    rng = np.random.default_rng(0)
    cloud = dh.PointCloud(rng.random((600, 3)) * 2.0)
    import warnings as w
    with w.catch_warnings():
        w.simplefilter("ignore")
        dh.filter_map(cloud, dh.DynaHullParams(k_neighbors=5, n_clusters=2))
    dh.nn_distance_stats(cloud, cloud)


@pytest.fixture(scope="session")
def reference_config():
    return dh.ScenarioConfig.from_json(REPO / "configs" / "reference.json")


@pytest.fixture(scope="session")
def reference_scene(reference_config):
    return dh.generate_scene(reference_config)


@pytest.fixture(scope="session")
def scene_dir(tmp_path_factory, reference_scene):
    """Reference scene written to disk once: scene.pcd plus truth.pcd."""
    d = tmp_path_factory.mktemp("refscene")
    dh.save_cloud(reference_scene.cloud, d / "scene.pcd")
    dh.save_cloud(dh.ground_truth_cloud(reference_scene), d / "truth.pcd")
    return d
