"""Grasp safety filtering: reject grasps that come too close to the human hand.

The safety predicate thresholds the distance from each hand point to the
grasp origin. Transforming hand points into the grasp frame preserves
distances, so the scene-frame distance to the grasp position is used in the
hot path; the frame transform is kept for fidelity checks.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import NoSafeGrasp
from .geometry import Pose, inverse
from .scene import GraspCandidate, PointCloud


@dataclass(frozen=True)
class SafetyVerdict:
    grasp_index: int
    safe: bool
    min_hand_distance: float


def hand_point_in_grasp_frame(g: Pose, p_h) -> np.ndarray:
    """Express a hand point in the grasp coordinate frame."""
    return inverse(g).apply(p_h)


def filter_unsafe_grasps(grasps: list[GraspCandidate], hand: PointCloud,
                         d_s: float) -> list[SafetyVerdict]:
    """One verdict per grasp: unsafe iff any hand point is within d_s of it."""
    if d_s <= 0.0:
        raise ValueError("safety threshold d_s must be positive")
    if len(hand) == 0:
        raise ValueError("hand cloud must be non-empty")
    verdicts = []
    for i, g in enumerate(grasps):
        dmin = hand.index().min_distance(g.pose.translation)
        verdicts.append(SafetyVerdict(i, dmin > d_s, dmin))
    return verdicts


def select_grasp(grasps: list[GraspCandidate],
                 verdicts: list[SafetyVerdict]) -> GraspCandidate:
    """Highest-scoring safe grasp; ties broken by lower index."""
    best = None
    best_idx = -1
    for v in sorted(verdicts, key=lambda v: v.grasp_index):
        g = grasps[v.grasp_index]
        if v.safe and (best is None or g.score > best.score):
            best = g
            best_idx = v.grasp_index
    if best is None:
        raise NoSafeGrasp("all grasp candidates are within the safety threshold")
    return grasps[best_idx]


def write_verdicts_csv(verdicts: list[SafetyVerdict], path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["grasp_index", "safe", "min_hand_distance"])
        for v in verdicts:
            w.writerow([v.grasp_index, str(v.safe).lower(), repr(v.min_hand_distance)])
