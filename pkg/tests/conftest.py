import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from h2rsim.demos import SamplerConfig, TrajectoryConfig, generate_trajectory, sample_initial_poses
from h2rsim.fixtures import FIXTURE_NAMES, make_fixture
from h2rsim.render import CameraIntrinsics
from h2rsim.safety import filter_unsafe_grasps, select_grasp
from h2rsim.scene import GraspCandidate, align_grasp_to_scene


@pytest.fixture(scope="session")
def small_camera():
    """Quarter-resolution intrinsics to keep unit-test renders fast."""
    return CameraIntrinsics(fx=131.25, fy=131.25, cx=80.0, cy=60.0,
                            width=160, height=120, near=0.05)


@pytest.fixture(scope="session")
def sphere_scene():
    scene, grasps = make_fixture("sphere_in_hand", 7)
    return scene, grasps


@pytest.fixture(scope="session")
def sphere_grasp(sphere_scene):
    """Scene-frame pose of the safe sphere grasp."""
    scene, grasps = sphere_scene
    aligned = [GraspCandidate(align_grasp_to_scene(g, scene), g.score)
               for g in grasps]
    verdicts = filter_unsafe_grasps(aligned, scene.hand, 0.1)
    return select_grasp(aligned, verdicts).pose


@pytest.fixture(scope="session")
def sphere_demos(sphere_scene, sphere_grasp):
    """Five default-config demonstrations on the sphere fixture."""
    scene, _ = sphere_scene
    starts = sample_initial_poses(sphere_grasp, scene, scene.hand_centroid,
                                  SamplerConfig(k=5, seed=3), d_min=0.1)
    cfg = TrajectoryConfig()
    return [generate_trajectory(p, sphere_grasp, scene, cfg) for p in starts]


@pytest.fixture(scope="session")
def all_fixture_scenes():
    return {name: make_fixture(name, 7) for name in FIXTURE_NAMES}
