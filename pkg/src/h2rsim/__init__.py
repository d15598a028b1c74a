"""Desk-scale human-to-robot handover demonstration synthesis and
closed-loop reaching evaluation over metric point-cloud scenes."""

from .config import RunConfig, load_config, save_config
from .demos import (Demonstration, SamplerConfig, TrajectoryConfig, Waypoint,
                    actions_from_waypoints, compute_pregrasp,
                    generate_trajectory, sample_initial_poses)
from .errors import (ClearanceViolation, DegenerateFrame, EmptyCloud,
                     H2RSimError, NoSafeGrasp, NonFiniteAction,
                     NonFiniteCoordinate, ParseError, PolicyFailure,
                     SamplingExhausted, StepBudgetExceeded, ZeroVector)
from .geometry import (EulerAction, Pose, Rotation, angle_between, compose,
                       inverse, look_rotation, slerp)
from .render import (CameraIntrinsics, RenderedFrame, masked_input,
                     project_point, render)
from .rollout import (EpisodeConfig, IbvsGains, IbvsMaskPolicy, LossWeights,
                      OracleReplayPolicy, PolicyDecision, RolloutReport,
                      RolloutSummary, ZeroPolicy, aggregate_reports,
                      classify_pregrasp, handover_loss, ibvs_mask_policy,
                      run_episode)
from .safety import (SafetyVerdict, filter_unsafe_grasps,
                     hand_point_in_grasp_frame, select_grasp)
from .scene import (GraspCandidate, PointCloud, SceneAssets,
                    align_grasp_to_scene, load_grasps, load_ply_cloud,
                    load_scene, min_distance_to_clouds, save_grasps,
                    save_scene)

__version__ = "0.1.0"
