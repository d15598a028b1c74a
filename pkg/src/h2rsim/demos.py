"""Demonstration synthesis: constrained initial-pose sampling and three-phase
trajectories from an initial camera pose to the pre-grasp pose.

Phases: (1) rotate in place until facing the object center, (2) translate
toward the pre-grasp position, re-aiming whenever the facing error exceeds
the re-aim threshold, (3) jointly interpolate position and rotation onto the
pre-grasp pose. Per-step motion is bounded so a bounded-action controller
can replay every label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ClearanceViolation, SamplingExhausted, StepBudgetExceeded
from .geometry import (EulerAction, Pose, Rotation, angle_between, compose,
                       inverse, look_rotation, slerp)
from .scene import SceneAssets

PHASE_ALIGN = "align"
PHASE_TRANSLATE = "translate"
PHASE_REFINE = "refine"

DEFAULT_ATTEMPTS_PER_POSE = 10_000


@dataclass(frozen=True)
class SamplerConfig:
    """Initial-pose sampling parameters (angles in radians)."""

    k: int = 15
    r: float = 0.7
    alpha_min: float = math.radians(60.0)
    theta_offset_range: float = math.radians(20.0)
    theta_max: float = math.radians(100.0)
    seed: int = 0
    max_attempts: int = DEFAULT_ATTEMPTS_PER_POSE

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.r <= 0.0:
            raise ValueError("sampling radius must be positive")
        if not 0.0 < self.alpha_min < math.pi:
            raise ValueError("alpha_min must lie in (0, pi)")
        if self.theta_max > math.pi:
            raise ValueError("theta_max must be <= pi")
        if self.theta_offset_range < 0.0:
            raise ValueError("theta_offset_range must be >= 0")


@dataclass(frozen=True)
class TrajectoryConfig:
    """Trajectory shaping parameters (meters/radians)."""

    s: float = 0.3
    d: float = 0.5
    phi: float = 0.0
    d_min: float = 0.1
    max_steps: int = 30
    step_translation: float = 0.05
    step_rotation: float = math.radians(10.0)

    def __post_init__(self):
        if not 0.0 < self.s < self.d:
            raise ValueError("require 0 < s < d")
        if self.d_min <= 0.0:
            raise ValueError("d_min must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.step_translation <= 0.0 or self.step_rotation <= 0.0:
            raise ValueError("per-step motion bounds must be positive")


@dataclass(frozen=True)
class Waypoint:
    pose: Pose
    phase: str
    is_pregrasp: bool = False


@dataclass(frozen=True)
class Demonstration:
    waypoints: list[Waypoint]
    grasp: Pose
    pregrasp: Pose
    actions: list[EulerAction] = field(default_factory=list)


def aim_rotation(position, target) -> Rotation:
    """Look-at rotation from `position` toward `target` with a stable up hint.

    Uses +z as the up hint, switching to +y when the viewing direction is
    within ~2.5 degrees of vertical; the switch is deterministic.
    """
    f = np.asarray(target, dtype=np.float64) - np.asarray(position, dtype=np.float64)
    f = f / np.linalg.norm(f)
    up = (0.0, 0.0, 1.0) if abs(f[2]) < 0.999 else (0.0, 1.0, 0.0)
    return look_rotation(f, up)


def face_toward(reference: Rotation, position, target) -> Rotation:
    """Smallest rotation away from `reference` whose z-axis points from
    `position` exactly at `target` (facing without gratuitous roll)."""
    f = np.asarray(target, dtype=np.float64) - np.asarray(position, dtype=np.float64)
    f = f / np.linalg.norm(f)
    z = reference.z_axis()
    axis = np.cross(z, f)
    s = float(np.linalg.norm(axis))
    c = float(np.dot(z, f))
    if s < 1e-12:
        if c > 0.0:
            return reference
        axis = reference.as_matrix()[:, 0]  # antipodal: flip about local x
        s = 1.0
    return Rotation.from_axis_angle(axis, math.atan2(s, c)).compose(reference)


def compute_pregrasp(grasp: Pose, s: float) -> Pose:
    """Pose offset s meters back along the grasp z-axis, same rotation."""
    if s < 0.0:
        raise ValueError("pre-grasp offset s must be >= 0")
    return Pose(grasp.rotation, grasp.translation - s * grasp.z_axis())


def sample_initial_poses(grasp_scene: Pose, scene: SceneAssets, hand_centroid,
                         cfg: SamplerConfig, d_min: float = 0.1) -> list[Pose]:
    """Sample exactly cfg.k camera poses on the r-sphere around the grasp.

    Each pose satisfies: hand and camera on different sides of the object
    center (separation angle > alpha_min), viewing axis equal to the look-at
    direction perturbed by Rx(theta_x) Ry(theta_y) with offsets drawn
    uniformly, viewing axis within theta_max of the grasp z-axis, and
    clearance above d_min from the object+hand clouds. Deterministic for a
    fixed seed. Raises SamplingExhausted when a pose exceeds the per-pose
    rejection budget.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    t_o = scene.object_mean
    hand_dir = np.asarray(hand_centroid, dtype=np.float64)
    grasp_pos = grasp_scene.translation
    z_f = grasp_scene.z_axis()
    poses: list[Pose] = []
    for _ in range(cfg.k):
        for _attempt in range(cfg.max_attempts):
            v = rng.normal(size=3)
            n = float(np.linalg.norm(v))
            if n < 1e-12:
                continue
            pos = grasp_pos + (cfg.r / n) * v
            if angle_between(hand_dir - t_o, pos - t_o) <= cfg.alpha_min:
                continue
            if scene.clearance_distance(pos) <= d_min:
                continue
            theta_x, theta_y = rng.uniform(-cfg.theta_offset_range,
                                           cfg.theta_offset_range, size=2)
            rot = aim_rotation(pos, t_o)
            rot = rot.compose(Rotation.from_axis_angle((1.0, 0.0, 0.0), theta_x))
            rot = rot.compose(Rotation.from_axis_angle((0.0, 1.0, 0.0), theta_y))
            if angle_between(rot.z_axis(), z_f) > cfg.theta_max:
                continue
            poses.append(Pose(rot, pos))
            break
        else:
            raise SamplingExhausted(
                f"no pose satisfying the sampling constraints after "
                f"{cfg.max_attempts} attempts (found {len(poses)}/{cfg.k})")
    return poses


def _clamped_turn(current: Rotation, target: Rotation, max_angle: float) -> Rotation:
    ang = current.angle_to(target)
    if ang <= 1e-12:
        return current
    return slerp(current, target, min(1.0, max_angle / ang))


def generate_trajectory(initial: Pose, grasp_scene: Pose, scene: SceneAssets,
                        cfg: TrajectoryConfig) -> Demonstration:
    """Build the three-phase waypoint sequence from `initial` to the pre-grasp.

    The waypoint count (time steps) is capped at cfg.max_steps; every step
    moves at most cfg.step_translation / cfg.step_rotation; every waypoint
    keeps clearance above cfg.d_min from the object and hand clouds. The
    final waypoint equals the pre-grasp pose exactly and carries the
    pre-grasp flag.
    """
    pregrasp = compute_pregrasp(grasp_scene, cfg.s)
    t_o = scene.object_mean
    p_pre = pregrasp.translation

    waypoints = [Waypoint(initial, PHASE_ALIGN)]

    dist0 = float(np.linalg.norm(initial.translation - p_pre))
    ang0 = initial.rotation.angle_to(pregrasp.rotation)
    if dist0 < 1e-9 and ang0 < 1e-9:
        demo_wps = [Waypoint(initial, PHASE_REFINE, is_pregrasp=True)]
        _check_clearance(demo_wps, scene, cfg.d_min)
        return Demonstration(demo_wps, grasp_scene, pregrasp, [])

    def budget_check():
        if len(waypoints) > cfg.max_steps:
            raise StepBudgetExceeded(
                f"trajectory needs more than {cfg.max_steps} time steps")

    # Phase 1: rotate in place onto an exact look-at toward the object
    # center, taking the smallest turn from the initial orientation.
    p0 = initial.translation
    aim = face_toward(initial.rotation, p0, t_o)
    ang = initial.rotation.angle_to(aim)
    n1 = math.ceil(ang / cfg.step_rotation) if ang > 1e-12 else 0
    for j in range(1, n1 + 1):
        waypoints.append(Waypoint(Pose(slerp(initial.rotation, aim, j / n1), p0),
                                  PHASE_ALIGN))
        budget_check()

    # Phase 2: straight-line translation toward the pre-grasp position until
    # strictly inside the handoff distance d; re-aim whenever facing error
    # exceeds phi, turning at most step_rotation per step. The facing target
    # is anchored to the pre-grasp roll so no residual twist piles up for
    # phase 3.
    cur_p = p0
    cur_r = waypoints[-1].pose.rotation
    while float(np.linalg.norm(cur_p - p_pre)) >= cfg.d:
        remaining = float(np.linalg.norm(cur_p - p_pre))
        step = min(cfg.step_translation, remaining)
        cur_p = cur_p + (p_pre - cur_p) / remaining * step
        target = face_toward(pregrasp.rotation, cur_p, t_o)
        if cur_r.angle_to(target) > cfg.phi:
            cur_r = _clamped_turn(cur_r, target, cfg.step_rotation)
        waypoints.append(Waypoint(Pose(cur_r, cur_p), PHASE_TRANSLATE))
        budget_check()

    # Phase 3: joint linear/SLERP refinement ending exactly at the pre-grasp.
    p2 = cur_p
    r2 = cur_r
    dist = float(np.linalg.norm(p2 - p_pre))
    ang3 = r2.angle_to(pregrasp.rotation)
    n3 = max(math.ceil(dist / cfg.step_translation),
             math.ceil(ang3 / cfg.step_rotation), 1)
    for j in range(1, n3 + 1):
        if j == n3:
            waypoints.append(Waypoint(pregrasp, PHASE_REFINE, is_pregrasp=True))
        else:
            u = j / n3
            waypoints.append(Waypoint(Pose(slerp(r2, pregrasp.rotation, u),
                                           p2 + (p_pre - p2) * u), PHASE_REFINE))
        budget_check()

    _check_clearance(waypoints, scene, cfg.d_min)
    return Demonstration(waypoints, grasp_scene, pregrasp,
                         actions_from_waypoints(waypoints))


def _check_clearance(waypoints, scene: SceneAssets, d_min: float) -> None:
    for i, wp in enumerate(waypoints):
        dist = scene.clearance_distance(wp.pose.translation)
        if dist <= d_min:
            raise ClearanceViolation(
                f"waypoint {i} is {dist:.4f} m from the hand/object cloud "
                f"(minimum {d_min})")


def actions_from_waypoints(waypoints: list[Waypoint]) -> list[EulerAction]:
    """Per-step relative transforms, each expressed in the earlier waypoint's frame."""
    if len(waypoints) < 2:
        raise ValueError("need at least two waypoints to derive actions")
    actions = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        actions.append(EulerAction.from_pose(compose(inverse(a.pose), b.pose)))
    return actions
