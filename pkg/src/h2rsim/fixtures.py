"""Deterministic synthetic scenes for tests and smoke runs.

Each fixture is a desk-scale tabletop: a parametric object held ~0.6 m
above the table, a finger-like hand blob well below it, a sparse table
backdrop, and two scored grasp candidates — one safe (>= 0.3 m from every
hand point) and one unsafe (exactly 0.05 m from the nearest hand point),
the unsafe one carrying the higher score so the safety filter is load-bearing.
Grasp files are written in object-centered coordinates.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .geometry import Pose, look_rotation
from .scene import (GraspCandidate, PointCloud, SceneAssets, save_grasps,
                    save_scene)

FIXTURE_NAMES = ("sphere_in_hand", "box_in_hand", "mug_in_hand")

OBJECT_CENTER = np.array([0.0, 0.0, 0.6])
HAND_CENTER = np.array([0.0, 0.0, 0.18])
SAFE_SCORE = 0.9
UNSAFE_SCORE = 0.95
UNSAFE_GAP = 0.05  # meters from the nearest hand point, by construction


def _colorize(base, pts, rng, wobble=0.18):
    stripes = 0.5 + 0.5 * np.sin(60.0 * pts[:, 2:3] + 25.0 * pts[:, 0:1])
    cols = np.asarray(base) * (1.0 - wobble + wobble * stripes)
    cols = cols + rng.normal(0.0, 0.01, cols.shape)
    return np.clip(cols, 0.0, 1.0)


def _sphere_points(rng, n=2500, radius=0.055):
    d = rng.normal(size=(n, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    return OBJECT_CENTER + radius * d


def _box_points(rng, n=2500, half=(0.045, 0.055, 0.08)):
    hx, hy, hz = half
    areas = np.array([hy * hz, hy * hz, hx * hz, hx * hz, hx * hy, hx * hy])
    faces = rng.choice(6, size=n, p=areas / areas.sum())
    u = rng.uniform(-1.0, 1.0, size=n)
    v = rng.uniform(-1.0, 1.0, size=n)
    pts = np.empty((n, 3))
    for f in range(6):
        m = faces == f
        axis = f // 2
        sign = 1.0 if f % 2 == 0 else -1.0
        others = [a for a in range(3) if a != axis]
        pts[m, axis] = sign * half[axis]
        pts[m, others[0]] = u[m] * half[others[0]]
        pts[m, others[1]] = v[m] * half[others[1]]
    return OBJECT_CENTER + pts


def _mug_points(rng, n=2500, radius=0.045, half_height=0.065):
    n_side = int(n * 0.62)
    n_disc = int(n * 0.12)
    n_handle = n - n_side - 2 * n_disc
    theta = rng.uniform(0.0, 2.0 * math.pi, n_side)
    z = rng.uniform(-half_height, half_height, n_side)
    side = np.column_stack([radius * np.cos(theta), radius * np.sin(theta), z])
    discs = []
    for zs in (half_height, -half_height):
        r = radius * np.sqrt(rng.uniform(0.0, 1.0, n_disc))
        a = rng.uniform(0.0, 2.0 * math.pi, n_disc)
        discs.append(np.column_stack([r * np.cos(a), r * np.sin(a),
                                      np.full(n_disc, zs)]))
    psi = rng.uniform(-1.75, 1.75, n_handle)
    ring = np.column_stack([0.075 + 0.028 * np.cos(psi),
                            np.zeros(n_handle),
                            0.028 * np.sin(psi)])
    ring += rng.normal(0.0, 0.004, ring.shape)
    pts = np.vstack([side, *discs, ring])
    return OBJECT_CENTER + pts


def _hand_points(rng, n_palm=600, n_finger=170):
    d = rng.normal(size=(n_palm, 3))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    palm = HAND_CENTER + d * np.array([0.035, 0.045, 0.05])
    parts = [palm]
    for dx in (-0.03, 0.0, 0.03):
        base = HAND_CENTER + np.array([dx, 0.0, 0.04])
        t = rng.uniform(0.0, 0.09, n_finger)
        a = rng.uniform(0.0, 2.0 * math.pi, n_finger)
        parts.append(base + np.column_stack([0.012 * np.cos(a),
                                             0.012 * np.sin(a), t]))
    return np.vstack(parts)


def _table_points(rng, n=700, radius=0.45):
    r = radius * np.sqrt(rng.uniform(0.0, 1.0, n))
    a = rng.uniform(0.0, 2.0 * math.pi, n)
    return np.column_stack([r * np.cos(a), r * np.sin(a), np.zeros(n)])


# Grasp approach directions (unit vectors pointing down toward the object)
# and the distance from the object center to the grasp point along -approach.
_GRASP_GEOMETRY = {
    "sphere_in_hand": (np.array([0.0, 0.0, -1.0]), 0.055),
    "box_in_hand": (np.array([-math.sin(math.radians(20.0)), 0.0,
                              -math.cos(math.radians(20.0))]), 0.085),
    "mug_in_hand": (np.array([0.0, -math.sin(math.radians(15.0)),
                              -math.cos(math.radians(15.0))]), 0.067),
}

_OBJECT_BUILDERS = {
    "sphere_in_hand": (_sphere_points, (0.75, 0.15, 0.10)),
    "box_in_hand": (_box_points, (0.12, 0.58, 0.22)),
    "mug_in_hand": (_mug_points, (0.15, 0.25, 0.70)),
}


def make_fixture(name: str, seed: int) -> tuple[SceneAssets, list[GraspCandidate]]:
    """Build a fixture scene plus its [safe, unsafe] object-centered grasps."""
    if name not in FIXTURE_NAMES:
        raise ValueError(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    rng = np.random.Generator(np.random.PCG64(seed))
    builder, base_color = _OBJECT_BUILDERS[name]
    obj_pts = builder(rng)
    hand_pts = _hand_points(rng)
    table_pts = _table_points(rng)

    scene = SceneAssets(
        PointCloud(obj_pts, _colorize(base_color, obj_pts, rng), "object"),
        PointCloud(hand_pts, _colorize((0.85, 0.64, 0.52), hand_pts, rng, 0.08), "hand"),
        PointCloud(table_pts, _colorize((0.55, 0.50, 0.45), table_pts, rng, 0.05),
                   "background"),
    )

    approach, surface_dist = _GRASP_GEOMETRY[name]
    up = (0.0, 0.0, 1.0) if abs(approach[2]) < 0.999 else (0.0, 1.0, 0.0)
    rot = look_rotation(approach, up)

    safe_pos = OBJECT_CENTER - surface_dist * approach
    top = hand_pts[np.argmax(hand_pts[:, 2])]
    unsafe_pos = top + np.array([0.0, 0.0, UNSAFE_GAP])

    mean = scene.object_mean
    grasps = [
        GraspCandidate(Pose(rot, safe_pos - mean), SAFE_SCORE),
        GraspCandidate(Pose(rot, unsafe_pos - mean), UNSAFE_SCORE),
    ]
    return scene, grasps


def write_fixture(name: str, seed: int, out_dir) -> tuple[Path, Path]:
    """Write <name>.scene.txt and <name>.grasps.txt; deterministic bytes."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scene, grasps = make_fixture(name, seed)
    scene_path = out / f"{name}.scene.txt"
    grasps_path = out / f"{name}.grasps.txt"
    save_scene(scene, scene_path)
    save_grasps(grasps, grasps_path)
    return scene_path, grasps_path
