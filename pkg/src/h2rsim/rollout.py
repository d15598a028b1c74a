"""Closed-loop episode harness, reference policies, loss, and metrics.

A policy is anything with `decide(frame) -> PolicyDecision`; the harness
renders the background-free hand-eye frame at the current pose, queries the
policy, applies the action as a bounded relative transform, and repeats
until the policy signals the pre-grasp pose or the step budget runs out.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .demos import Demonstration
from .errors import H2RSimError, NonFiniteAction, PolicyFailure, ZeroVector
from .geometry import EulerAction, Pose, Rotation, angle_between, compose, slerp
from .render import CameraIntrinsics, RenderedFrame, masked_input, render
from .scene import SceneAssets

SAFETY_SWEEP_SPACING = 0.005  # meters between samples on the final approach

TERMINATED_POLICY = "policy_cls"
TERMINATED_BUDGET = "step_budget"


@dataclass(frozen=True)
class PolicyDecision:
    action: EulerAction
    confidence: float


@dataclass(frozen=True)
class EpisodeConfig:
    tau_c: float = 0.7
    max_steps: int = 30
    success_band: tuple[float, float] = (0.35, 0.45)
    center_angle_max: float = math.radians(10.0)
    d_s: float = 0.1
    step_translation: float = 0.05
    step_rotation: float = math.radians(10.0)

    def __post_init__(self):
        if not 0.0 < self.tau_c < 1.0:
            raise ValueError("tau_c must lie in (0, 1)")
        if not self.success_band[0] < self.success_band[1]:
            raise ValueError("success band must be ordered low < high")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")


@dataclass(frozen=True)
class RolloutReport:
    final_distance: float
    centered: bool
    safe: bool
    steps: int
    terminated_by: str
    final_pose: Pose


@dataclass(frozen=True)
class LossWeights:
    lambda_t: float = 100.0
    lambda_r: float = 100.0

    def __post_init__(self):
        if self.lambda_t < 0.0 or self.lambda_r < 0.0:
            raise ValueError("loss weights must be non-negative")


class Policy(Protocol):
    def decide(self, frame: RenderedFrame) -> PolicyDecision: ...


def classify_pregrasp(confidence: float, tau_c: float) -> bool:
    """True iff the confidence reaches the pre-grasp threshold (inclusive)."""
    return confidence >= tau_c


def handover_loss(pred: PolicyDecision, target_action: EulerAction,
                  target_cls: int, w: LossWeights) -> float:
    """Weighted MSE over translation, rotation, and the pre-grasp logit."""
    lt = float(np.mean((pred.action.translation - target_action.translation) ** 2))
    lr = float(np.mean((pred.action.rotation - target_action.rotation) ** 2))
    lc = (pred.confidence - float(target_cls)) ** 2
    return w.lambda_t * lt + w.lambda_r * lr + lc


def clamp_step(action: EulerAction, max_translation: float,
               max_rotation: float) -> Pose:
    """Relative pose for one control step, magnitude-limited."""
    delta = action.to_pose()
    t = delta.translation
    norm = float(np.linalg.norm(t))
    if norm > max_translation:
        t = t * (max_translation / norm)
    rot = delta.rotation
    ang = rot.angle()
    if ang > max_rotation:
        rot = slerp(Rotation.identity(), rot, max_rotation / ang)
    return Pose(rot, t)


def segment_clear_of_hand(start, end, scene: SceneAssets, d_s: float,
                          spacing: float = SAFETY_SWEEP_SPACING) -> bool:
    """Every sample on [start, end] (spacing-or-finer, endpoints included)
    stays farther than d_s from the hand cloud."""
    a = np.asarray(start, dtype=np.float64)
    b = np.asarray(end, dtype=np.float64)
    length = float(np.linalg.norm(b - a))
    n = max(1, math.ceil(length / spacing))
    index = scene.hand.index()
    for t in np.linspace(0.0, 1.0, n + 1):
        if index.min_distance(a + t * (b - a)) <= d_s:
            return False
    return True


def run_episode(scene: SceneAssets, start: Pose, policy: Policy,
                grasp_scene: Pose, cfg: EpisodeConfig,
                K: CameraIntrinsics) -> RolloutReport:
    """Drive one closed-loop reaching episode and score it.

    Raises PolicyFailure if the policy raises, NonFiniteAction if it emits
    NaN/inf components; both abort the episode.
    """
    pose = start
    steps = 0
    terminated = TERMINATED_BUDGET
    while steps < cfg.max_steps:
        frame = masked_input(render(scene, pose, K))
        try:
            decision = policy.decide(frame)
        except H2RSimError:
            raise
        except Exception as e:
            raise PolicyFailure(f"policy raised {type(e).__name__}: {e}") from e
        steps += 1
        if not decision.action.is_finite() or not math.isfinite(decision.confidence):
            raise NonFiniteAction(f"policy emitted non-finite output at step {steps}")
        if classify_pregrasp(decision.confidence, cfg.tau_c):
            terminated = TERMINATED_POLICY
            break
        pose = compose(pose, clamp_step(decision.action, cfg.step_translation,
                                        cfg.step_rotation))

    grasp_pos = grasp_scene.translation
    final_distance = float(np.linalg.norm(pose.translation - grasp_pos))
    try:
        centered = angle_between(pose.z_axis(),
                                 scene.object_mean - pose.translation) \
            <= cfg.center_angle_max
    except ZeroVector:
        centered = False
    safe = segment_clear_of_hand(pose.translation, grasp_pos, scene, cfg.d_s)
    return RolloutReport(final_distance, centered, safe, steps, terminated, pose)


class OracleReplayPolicy:
    """Replays a stored demonstration action-for-action, then signals done.

    One instance per episode; not reusable across episodes.
    """

    def __init__(self, demo_actions: list[EulerAction]):
        self._actions = list(demo_actions)
        self._next = 0

    @classmethod
    def from_demonstration(cls, demo: Demonstration) -> "OracleReplayPolicy":
        return cls(demo.actions)

    def decide(self, frame: RenderedFrame) -> PolicyDecision:
        if self._next < len(self._actions):
            action = self._actions[self._next]
            self._next += 1
            return PolicyDecision(action, 0.0)
        return PolicyDecision(EulerAction(), 1.0)


class ZeroPolicy:
    """Emits a zero action with full confidence; terminates immediately."""

    def decide(self, frame: RenderedFrame) -> PolicyDecision:
        return PolicyDecision(EulerAction(), 1.0)


@dataclass(frozen=True)
class IbvsGains:
    gain: float = 0.001        # meters of sideways motion per pixel of error
    advance: float = 0.04      # meters of forward motion per step
    area_threshold: float = 0.15


def ibvs_mask_policy(frame: RenderedFrame, gains: IbvsGains) -> PolicyDecision:
    """Mask-centroid visual servo: translate to center the object mask,
    advance along the optical axis, and signal the pre-grasp once the mask
    covers enough of the image. No rotation.

    Sideways translation is gain * (centroid - image center) in pixels: a
    mask right of / below center moves the camera along +x / +y, which
    recenters it under the relative-action convention used by the harness.
    """
    mask = frame.object_mask
    ys, xs = np.nonzero(mask)
    height, width = mask.shape
    if len(xs) == 0:
        return PolicyDecision(EulerAction(), 0.0)
    center_u = (width - 1) / 2.0
    center_v = (height - 1) / 2.0
    err_u = float(xs.mean()) - center_u
    err_v = float(ys.mean()) - center_v
    action = EulerAction(np.zeros(3),
                         np.array([gains.gain * err_u, gains.gain * err_v,
                                   gains.advance]))
    area_ratio = len(xs) / float(mask.size)
    confidence = 1.0 if area_ratio >= gains.area_threshold else 0.0
    return PolicyDecision(action, confidence)


class IbvsMaskPolicy:
    """Stateless policy wrapper around ibvs_mask_policy."""

    def __init__(self, gains: IbvsGains = IbvsGains()):
        self.gains = gains

    def decide(self, frame: RenderedFrame) -> PolicyDecision:
        return ibvs_mask_policy(frame, self.gains)


@dataclass(frozen=True)
class RolloutSummary:
    mean_distance: float
    std_distance: float
    safe_count: int
    centered_count: int
    episodes: int

    @property
    def safe_rate(self) -> str:
        return f"{self.safe_count}/{self.episodes}"

    @property
    def center_rate(self) -> str:
        return f"{self.centered_count}/{self.episodes}"

    def table_row(self) -> str:
        return (f"{self.mean_distance:.2f} ± {self.std_distance:.2f}, "
                f"{self.safe_rate}, {self.center_rate}")


def aggregate_reports(reports: list[RolloutReport]) -> RolloutSummary:
    """Mean/population-std of final distance plus safe and centered counts."""
    if not reports:
        raise ValueError("at least one report is required")
    distances = np.array([r.final_distance for r in reports])
    return RolloutSummary(float(distances.mean()), float(distances.std()),
                          sum(r.safe for r in reports),
                          sum(r.centered for r in reports), len(reports))
