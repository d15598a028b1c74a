"""Dataset directory layout plus the generate/rollout pipelines.

Layout written by `generate_dataset`:

    <out>/dataset.json                      index of all trajectories
    <out>/traj_000/trajectory.json          poses, phases, flags, actions
    <out>/traj_000/step_000.rgb.ppm         per-step renders
    <out>/traj_000/step_000.object.pgm
    <out>/traj_000/step_000.hand.pgm
    <out>/traj_000/step_000.depth.bin

All JSON is written with sorted keys and repr floats, so identical seeds
and configs produce byte-identical files.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import RunConfig
from .demos import Demonstration, Waypoint, generate_trajectory, sample_initial_poses
from .errors import NonFiniteAction
from .geometry import EulerAction, Pose
from .render import masked_input, render, write_depth, write_pgm, write_ppm
from .rollout import (IbvsMaskPolicy, OracleReplayPolicy, RolloutReport,
                      ZeroPolicy, aggregate_reports, run_episode)
from .safety import filter_unsafe_grasps, select_grasp
from .scene import (GraspCandidate, SceneAssets, align_grasp_to_scene,
                    load_grasps, load_scene)

log = logging.getLogger(__name__)

POLICY_NAMES = ("oracle", "ibvs_mask", "zero")


def scene_id(scene_path) -> str:
    name = Path(scene_path).name
    for suffix in (".scene.txt", ".txt"):
        if name.endswith(suffix):
            return name[:-len(suffix)]
    return name


def _dump_json(obj, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _trajectory_record(demo: Demonstration) -> dict:
    return {
        "waypoints": [{"pose": wp.pose.as_flat(), "phase": wp.phase,
                       "is_pregrasp": wp.is_pregrasp} for wp in demo.waypoints],
        "actions": [[float(v) for v in a.as_vector()] for a in demo.actions],
        "grasp": demo.grasp.as_flat(),
        "pregrasp": demo.pregrasp.as_flat(),
    }


def write_trajectory_dir(demo: Demonstration, scene: SceneAssets, camera,
                         traj_dir: Path) -> None:
    traj_dir.mkdir(parents=True, exist_ok=True)
    record = _trajectory_record(demo)
    frames = []
    for j, wp in enumerate(demo.waypoints):
        frame = masked_input(render(scene, wp.pose, camera))
        names = {
            "rgb": f"step_{j:03d}.rgb.ppm",
            "object_mask": f"step_{j:03d}.object.pgm",
            "hand_mask": f"step_{j:03d}.hand.pgm",
            "depth": f"step_{j:03d}.depth.bin",
        }
        write_ppm(traj_dir / names["rgb"], frame.rgb)
        write_pgm(traj_dir / names["object_mask"], frame.object_mask)
        write_pgm(traj_dir / names["hand_mask"], frame.hand_mask)
        write_depth(traj_dir / names["depth"], frame.depth)
        frames.append(names)
    record["frames"] = frames
    _dump_json(record, traj_dir / "trajectory.json")


def select_scene_grasp(cfg: RunConfig, scene: SceneAssets) -> GraspCandidate:
    """Align configured grasps into the scene, filter, and pick the winner."""
    raw = load_grasps(cfg.grasps)
    aligned = [GraspCandidate(align_grasp_to_scene(g, scene), g.score) for g in raw]
    verdicts = filter_unsafe_grasps(aligned, scene.hand, cfg.d_s)
    chosen = select_grasp(aligned, verdicts)
    log.info("selected grasp score=%.3f among %d candidates (%d safe)",
             chosen.score, len(aligned), sum(v.safe for v in verdicts))
    return chosen


def generate_dataset(cfg: RunConfig, out_dir, workers: int = 1) -> dict:
    """Run the full demonstration pipeline and write a dataset directory."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    scene = load_scene(cfg.scene)
    chosen = select_scene_grasp(cfg, scene)
    sampler_cfg = cfg.sampler_config()
    traj_cfg = cfg.trajectory_config()
    camera = cfg.camera()

    starts = sample_initial_poses(chosen.pose, scene, scene.hand_centroid,
                                  sampler_cfg, d_min=traj_cfg.d_min)
    demos = [generate_trajectory(p, chosen.pose, scene, traj_cfg) for p in starts]
    log.info("generated %d trajectories (%s steps)", len(demos),
             "/".join(str(len(d.waypoints)) for d in demos))

    def write_one(item):
        i, demo = item
        write_trajectory_dir(demo, scene, camera, out / f"traj_{i:03d}")

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(write_one, enumerate(demos)))
    else:
        for item in enumerate(demos):
            write_one(item)

    index = {
        "version": 1,
        "seed": cfg.seed,
        "scene": cfg.scene,
        "grasps_file": cfg.grasps,
        "object_id": scene_id(cfg.scene),
        "grasp_pose": chosen.pose.as_flat(),
        "grasp_score": chosen.score,
        "trajectories": [{"dir": f"traj_{i:03d}", "steps": len(d.waypoints)}
                         for i, d in enumerate(demos)],
    }
    _dump_json(index, out / "dataset.json")
    return index


def load_dataset_index(dataset_dir) -> dict:
    return json.loads((Path(dataset_dir) / "dataset.json").read_text())


def load_trajectory_record(dataset_dir, traj_dir_name: str) -> dict:
    raw = json.loads((Path(dataset_dir) / traj_dir_name / "trajectory.json").read_text())
    return {
        "waypoints": [Waypoint(Pose.from_matrix(wp["pose"]), wp["phase"],
                               wp["is_pregrasp"]) for wp in raw["waypoints"]],
        "actions": [EulerAction.from_vector(a) for a in raw["actions"]],
        "grasp": Pose.from_matrix(raw["grasp"]),
        "pregrasp": Pose.from_matrix(raw["pregrasp"]),
        "frames": raw["frames"],
    }


def _make_policy(name: str, cfg: RunConfig, actions):
    if name == "oracle":
        return OracleReplayPolicy(actions)
    if name == "ibvs_mask":
        return IbvsMaskPolicy(cfg.ibvs_gains())
    if name == "zero":
        return ZeroPolicy()
    raise ValueError(f"unknown policy {name!r}; choose from {POLICY_NAMES}")


def rollout_dataset(cfg: RunConfig, dataset_dir, policy_name: str, out_dir,
                    workers: int = 1, limit: int | None = None) -> list[RolloutReport]:
    """Run one policy over every trajectory start in a dataset; write
    reports.jsonl (one record per episode) and summary.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    index = load_dataset_index(dataset_dir)
    scene = load_scene(cfg.scene)
    grasp_scene = Pose.from_matrix(index["grasp_pose"])
    episode_cfg = cfg.episode_config()
    camera = cfg.camera()

    entries = index["trajectories"][:limit] if limit else index["trajectories"]

    def run_one(entry):
        record = load_trajectory_record(dataset_dir, entry["dir"])
        start = record["waypoints"][0].pose
        policy = _make_policy(policy_name, cfg, record["actions"])
        try:
            report = run_episode(scene, start, policy, grasp_scene,
                                 episode_cfg, camera)
        except NonFiniteAction as e:
            return entry["dir"], start, None, str(e)
        return entry["dir"], start, report, None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, entries))
    else:
        results = [run_one(e) for e in entries]

    reports = []
    with open(out / "reports.jsonl", "w") as f:
        for traj_name, start, report, error in results:
            line = {
                "scene": cfg.scene,
                "trajectory": traj_name,
                "policy": policy_name,
                "seed": cfg.seed,
                "start_pose": start.as_flat(),
            }
            if report is None:
                line["error"] = "NonFiniteAction"
                line["message"] = error
            else:
                line.update(final_distance=report.final_distance,
                            centered=report.centered, safe=report.safe,
                            steps=report.steps,
                            terminated_by=report.terminated_by,
                            final_pose=report.final_pose.as_flat())
                reports.append(report)
            f.write(json.dumps(line, sort_keys=True) + "\n")

    if reports:
        summary = aggregate_reports(reports)
        with open(out / "summary.csv", "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(["object", "policy", "mean_dis", "std_dis",
                        "safe_rate", "center_rate"])
            w.writerow([index["object_id"], policy_name,
                        f"{summary.mean_distance:.2f}",
                        f"{summary.std_distance:.2f}",
                        summary.safe_rate, summary.center_rate])
    return reports
