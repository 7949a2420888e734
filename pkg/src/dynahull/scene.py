"""Synthetic labeled indoor scenes for end-to-end validation.

A rectangular room (floor, ceiling, four walls) plus axis-aligned boxes
is sampled surface-uniformly once per frame, so static structure gets
denser as frames accumulate. Actors are vertical capsules walking
random-waypoint paths; their surface samples land at a different spot
each frame and stay sparse. Every point carries a motion label and
provenance (source actor and frame) so generated scenes double as ground
truth.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .errors import InvalidConfig


@dataclass
class ScenarioConfig:
    """Scene layout and sampling rates; lengths in meters."""

    room: tuple = (8.0, 6.0, 3.0)
    n_frames: int = 50
    static_boxes: list = field(default_factory=list)
    n_actors: int = 5
    actor_radius: float = 0.35
    actor_height: float = 1.7
    actor_speed: tuple = (0.1, 0.3)
    points_per_frame_static: int = 1800
    points_per_actor_frame: int = 38
    noise_sigma: float = 0.01
    seed: int = 42

    def validate(self):
        L, W, H = self.room
        if min(L, W, H) <= 0:
            raise InvalidConfig(f"room dimensions must be positive, got {self.room}")
        if self.n_frames < 1:
            raise InvalidConfig("n_frames must be >= 1")
        if self.noise_sigma < 0:
            raise InvalidConfig("noise_sigma must be >= 0")
        if self.n_actors < 0:
            raise InvalidConfig("n_actors must be >= 0")
        if self.actor_radius <= 0:
            raise InvalidConfig("actor_radius must be > 0")
        if self.actor_height < 2 * self.actor_radius:
            raise InvalidConfig("actor_height must be >= 2 * actor_radius")
        lo, hi = self.actor_speed
        if not (0 <= lo <= hi):
            raise InvalidConfig(f"actor_speed range invalid: {self.actor_speed}")
        if self.points_per_frame_static < 0 or self.points_per_actor_frame < 0:
            raise InvalidConfig("point rates must be >= 0")
        if self.n_actors and 2 * self.actor_radius >= min(L, W):
            raise InvalidConfig("actors do not fit in the room")
        for box in self.static_boxes:
            lo3, hi3 = np.asarray(box[0], float), np.asarray(box[1], float)
            if not (hi3 > lo3).all():
                raise InvalidConfig(f"box must have positive extent: {box}")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        data = dict(data)
        boxes = []
        for box in data.get("static_boxes", []):
            if isinstance(box, dict):
                boxes.append((tuple(box["min"]), tuple(box["max"])))
            else:
                boxes.append((tuple(box[0]), tuple(box[1])))
        data["static_boxes"] = boxes
        if "room" in data:
            data["room"] = tuple(data["room"])
        if "actor_speed" in data:
            data["actor_speed"] = tuple(data["actor_speed"])
        cfg = cls(**data)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return {
            "room": list(self.room),
            "n_frames": self.n_frames,
            "static_boxes": [
                {"min": list(b[0]), "max": list(b[1])} for b in self.static_boxes
            ],
            "n_actors": self.n_actors,
            "actor_radius": self.actor_radius,
            "actor_height": self.actor_height,
            "actor_speed": list(self.actor_speed),
            "points_per_frame_static": self.points_per_frame_static,
            "points_per_actor_frame": self.points_per_actor_frame,
            "noise_sigma": self.noise_sigma,
            "seed": self.seed,
        }


@dataclass
class LabeledScene:
    """Generated cloud with labels, the true floor plane, and provenance."""

    cloud: PointCloud
    true_ground_plane: tuple
    actor_trajectories: list
    src_actor: np.ndarray
    src_frame: np.ndarray


def _room_surfaces(config: ScenarioConfig):
    """Rectangles as (origin, u edge, v edge) triples."""
    L, W, H = config.room
    surfs = [
        ((0, 0, 0), (L, 0, 0), (0, W, 0)),   # floor
        ((0, 0, H), (L, 0, 0), (0, W, 0)),   # ceiling
        ((0, 0, 0), (L, 0, 0), (0, 0, H)),   # wall y = 0
        ((0, W, 0), (L, 0, 0), (0, 0, H)),   # wall y = W
        ((0, 0, 0), (0, W, 0), (0, 0, H)),   # wall x = 0
        ((L, 0, 0), (0, W, 0), (0, 0, H)),   # wall x = L
    ]
    for lo, hi in config.static_boxes:
        x0, y0, z0 = lo
        x1, y1, z1 = hi
        dx, dy, dz = x1 - x0, y1 - y0, z1 - z0
        surfs += [
            ((x0, y0, z0), (dx, 0, 0), (0, dy, 0)),  # bottom
            ((x0, y0, z1), (dx, 0, 0), (0, dy, 0)),  # top
            ((x0, y0, z0), (dx, 0, 0), (0, 0, dz)),
            ((x0, y1, z0), (dx, 0, 0), (0, 0, dz)),
            ((x0, y0, z0), (0, dy, 0), (0, 0, dz)),
            ((x1, y0, z0), (0, dy, 0), (0, 0, dz)),
        ]
    origins = np.array([s[0] for s in surfs], float)
    us = np.array([s[1] for s in surfs], float)
    vs = np.array([s[2] for s in surfs], float)
    areas = np.linalg.norm(us, axis=1) * np.linalg.norm(vs, axis=1)
    return origins, us, vs, areas


def _walk_actors(config: ScenarioConfig, rng):
    """Random-waypoint paths; one (n_frames, 3) array of base centers each."""
    L, W, _ = config.room
    r = config.actor_radius
    lo_xy = np.array([r, r])
    hi_xy = np.array([L - r, W - r])
    lo_s, hi_s = config.actor_speed
    paths = []
    for _ in range(config.n_actors):
        pos = rng.uniform(lo_xy, hi_xy)
        goal = rng.uniform(lo_xy, hi_xy)
        speed = rng.uniform(lo_s, hi_s)
        path = np.zeros((config.n_frames, 3))
        for f in range(config.n_frames):
            path[f, :2] = pos
            to_goal = goal - pos
            dist = np.linalg.norm(to_goal)
            if dist <= speed:
                pos = goal.copy()
                goal = rng.uniform(lo_xy, hi_xy)
                speed = rng.uniform(lo_s, hi_s)
            else:
                pos = pos + to_goal / dist * speed
        paths.append(path)
    return paths


def _sample_capsule(rng, center_xy, radius, height, n):
    """Area-uniform samples on a vertical capsule standing on z = 0."""
    hc = height - 2 * radius
    area_cyl = 2 * np.pi * radius * hc
    area_caps = 4 * np.pi * radius ** 2
    p_cyl = area_cyl / (area_cyl + area_caps)
    on_cyl = rng.random(n) < p_cyl
    pts = np.empty((n, 3))
    nc = int(on_cyl.sum())
    theta = rng.random(nc) * 2 * np.pi
    pts[on_cyl, 0] = center_xy[0] + radius * np.cos(theta)
    pts[on_cyl, 1] = center_xy[1] + radius * np.sin(theta)
    pts[on_cyl, 2] = radius + rng.random(nc) * hc
    ns = n - nc
    direction = rng.normal(size=(ns, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    top = direction[:, 2] >= 0
    cap_z = np.where(top, height - radius, radius)
    sphere = direction * radius
    pts[~on_cyl, 0] = center_xy[0] + sphere[:, 0]
    pts[~on_cyl, 1] = center_xy[1] + sphere[:, 1]
    pts[~on_cyl, 2] = cap_z + sphere[:, 2]
    return pts


def generate_scene(config: ScenarioConfig) -> LabeledScene:
    """Accumulate n_frames of static + actor samples into one labeled cloud.

    Isotropic Gaussian noise is added to every point, with the noise
    vector norm clipped at 3 sigma so every point stays within 3 sigma of
    its source surface. Deterministic for a fixed config.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    origins, us, vs, areas = _room_surfaces(config)
    probs = areas / areas.sum()
    paths = _walk_actors(config, rng)

    chunks = []
    labels = []
    src_actor = []
    src_frame = []
    for f in range(config.n_frames):
        counts = rng.multinomial(config.points_per_frame_static, probs)
        for s, c in enumerate(counts):
            if c == 0:
                continue
            uv = rng.random((c, 2))
            chunks.append(origins[s] + uv[:, :1] * us[s] + uv[:, 1:] * vs[s])
            labels.append(np.zeros(c, np.uint8))
            src_actor.append(np.full(c, -1, np.int64))
            src_frame.append(np.full(c, f, np.int64))
        for a in range(config.n_actors):
            c = config.points_per_actor_frame
            if c == 0:
                continue
            pts = _sample_capsule(rng, paths[a][f, :2], config.actor_radius,
                                  config.actor_height, c)
            chunks.append(pts)
            labels.append(np.ones(c, np.uint8))
            src_actor.append(np.full(c, a, np.int64))
            src_frame.append(np.full(c, f, np.int64))

    points = np.concatenate(chunks) if chunks else np.empty((0, 3))
    labels = np.concatenate(labels) if labels else np.empty(0, np.uint8)
    src_actor = np.concatenate(src_actor) if src_actor else np.empty(0, np.int64)
    src_frame = np.concatenate(src_frame) if src_frame else np.empty(0, np.int64)

    if config.noise_sigma > 0 and len(points):
        noise = rng.normal(0.0, config.noise_sigma, points.shape)
        norm = np.linalg.norm(noise, axis=1, keepdims=True)
        cap = 3 * config.noise_sigma
        scale = np.where(norm > cap, cap / np.maximum(norm, 1e-300), 1.0)
        points = points + noise * scale

    return LabeledScene(
        cloud=PointCloud(points, labels),
        true_ground_plane=(np.array([0.0, 0.0, 1.0]), 0.0),
        actor_trajectories=paths,
        src_actor=src_actor,
        src_frame=src_frame,
    )


def ground_truth_cloud(scene: LabeledScene) -> PointCloud:
    """The static subset of the scene, what a quiet mapping run would see."""
    return scene.cloud.subset(np.flatnonzero(scene.cloud.labels == 0))
