import math

import numpy as np
import pytest

from h2rsim.demos import (PHASE_ALIGN, PHASE_REFINE, PHASE_TRANSLATE,
                          SamplerConfig, TrajectoryConfig,
                          actions_from_waypoints, compute_pregrasp,
                          generate_trajectory, sample_initial_poses)
from h2rsim.errors import (ClearanceViolation, SamplingExhausted,
                           StepBudgetExceeded)
from h2rsim.geometry import Pose, Rotation, angle_between, compose
from h2rsim.scene import PointCloud, SceneAssets

from helpers import brute_min_distance, check_initial_pose, quat_to_matrix


class TestComputePregrasp:
    def test_paper_offset_along_z(self):
        out = compute_pregrasp(Pose(), 0.3)
        np.testing.assert_allclose(out.translation, [0, 0, -0.3], atol=1e-15)

    def test_zero_offset(self):
        g = Pose(Rotation.from_axis_angle((1, 1, 0), 0.7), (0.1, 0.2, 0.3))
        out = compute_pregrasp(g, 0.0)
        np.testing.assert_allclose(out.as_matrix(), g.as_matrix(), atol=1e-15)

    def test_rotated_grasp_quaternion_oracle(self):
        # oracle: rotate unit z by the quaternion matrix independently
        rot = Rotation.from_axis_angle((1, 0, 0), math.pi / 2)
        z_dir = quat_to_matrix(rot.quat) @ [0, 0, 1]
        np.testing.assert_allclose(z_dir, [0, -1, 0], atol=1e-12)
        out = compute_pregrasp(Pose(rot, (0, 0, 0)), 0.3)
        np.testing.assert_allclose(out.translation, [0, 0.3, 0], atol=1e-12)
        assert out.rotation.angle_to(rot) == 0.0

    def test_rotation_preserved(self):
        g = Pose(Rotation.from_axis_angle((0, 1, 0), 1.2), (1, 1, 1))
        assert compute_pregrasp(g, 0.25).rotation.angle_to(g.rotation) == 0.0


class TestSampleInitialPoses:
    def test_hand_separation_constraint(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        cfg = SamplerConfig(k=15, seed=11)
        t_o = scene.object_mean
        hand = scene.hand_centroid
        for pose in sample_initial_poses(sphere_grasp, scene, hand, cfg):
            assert angle_between(hand - t_o, pose.translation - t_o) \
                > cfg.alpha_min

    def test_zero_offset_looks_exactly_at_object(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        cfg = SamplerConfig(k=8, seed=2, theta_offset_range=0.0)
        t_o = scene.object_mean
        for pose in sample_initial_poses(sphere_grasp, scene,
                                         scene.hand_centroid, cfg):
            look = t_o - pose.translation
            look /= np.linalg.norm(look)
            np.testing.assert_allclose(pose.z_axis(), look, atol=1e-9)

    def test_constraint_checker_oracle(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        cfg = SamplerConfig(k=15, r=0.7, seed=5)
        poses = sample_initial_poses(sphere_grasp, scene, scene.hand_centroid,
                                     cfg, d_min=0.1)
        assert len(poses) == 15
        clouds = [scene.object.points, scene.hand.points]
        for pose in poses:
            failures = check_initial_pose(
                pose.as_matrix(), sphere_grasp.as_matrix(), scene.object_mean,
                scene.hand_centroid, cfg.r, cfg.alpha_min,
                cfg.theta_offset_range, cfg.theta_max, 0.1, clouds)
            assert failures == []

    def test_deterministic_bit_exact(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        cfg = SamplerConfig(k=6, seed=99)
        a = sample_initial_poses(sphere_grasp, scene, scene.hand_centroid, cfg)
        b = sample_initial_poses(sphere_grasp, scene, scene.hand_centroid, cfg)
        for pa, pb in zip(a, b):
            assert np.array_equal(pa.as_matrix(), pb.as_matrix())

    def test_exhaustion(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        # an impossible grasp-axis cone exhausts the rejection budget
        cfg = SamplerConfig(k=1, seed=0, theta_max=1e-6, theta_offset_range=0.0,
                            max_attempts=200)
        flipped = Pose(Rotation.from_axis_angle((1, 0, 0), math.pi)
                       .compose(sphere_grasp.rotation), sphere_grasp.translation)
        with pytest.raises(SamplingExhausted):
            sample_initial_poses(flipped, scene, scene.hand_centroid, cfg)


def simple_scene():
    """Tiny scene with the object at z=0.6 and the hand far below."""
    rng = np.random.default_rng(40)
    obj = rng.normal(size=(200, 3))
    obj = 0.05 * obj / np.linalg.norm(obj, axis=1, keepdims=True) + [0, 0, 0.6]
    hand = rng.uniform(-0.03, 0.03, (80, 3)) + [0, 0, 0.15]
    return SceneAssets(PointCloud(obj, np.full((200, 3), 0.5), "object"),
                       PointCloud(hand, np.full((80, 3), 0.5), "hand"))


def top_grasp(scene):
    return Pose(Rotation.from_axis_angle((1, 0, 0), math.pi),
                scene.object_mean + [0, 0, 0.05])


class TestGenerateTrajectory:
    def test_degenerate_start_is_single_waypoint(self):
        scene = simple_scene()
        grasp = top_grasp(scene)
        cfg = TrajectoryConfig()
        pre = compute_pregrasp(grasp, cfg.s)
        demo = generate_trajectory(pre, grasp, scene, cfg)
        assert len(demo.waypoints) == 1
        assert demo.waypoints[0].is_pregrasp
        assert demo.actions == []

    def test_phase2_ends_strictly_inside_d(self, sphere_scene, sphere_grasp,
                                           sphere_demos):
        cfg = TrajectoryConfig()
        for demo in sphere_demos:
            p_pre = demo.pregrasp.translation
            translate = [wp for wp in demo.waypoints if wp.phase == PHASE_TRANSLATE]
            if not translate:
                continue
            for wp in translate[:-1]:
                assert np.linalg.norm(wp.pose.translation - p_pre) >= cfg.d
            assert np.linalg.norm(translate[-1].pose.translation - p_pre) < cfg.d
            for wp in demo.waypoints:
                if wp.phase == PHASE_REFINE:
                    assert np.linalg.norm(wp.pose.translation - p_pre) < cfg.d

    def test_endpoint_exactness(self, sphere_demos):
        for demo in sphere_demos:
            final = demo.waypoints[-1].pose
            assert np.linalg.norm(final.translation
                                  - demo.pregrasp.translation) < 1e-6
            assert final.rotation.angle_to(demo.pregrasp.rotation) < 1e-6
            assert demo.waypoints[-1].is_pregrasp

    def test_pregrasp_flag_unique(self, sphere_demos):
        for demo in sphere_demos:
            assert sum(wp.is_pregrasp for wp in demo.waypoints) == 1

    def test_step_bounds(self, sphere_demos):
        cfg = TrajectoryConfig()
        for demo in sphere_demos:
            for a, b in zip(demo.waypoints[:-1], demo.waypoints[1:]):
                dt = np.linalg.norm(b.pose.translation - a.pose.translation)
                dr = a.pose.rotation.angle_to(b.pose.rotation)
                assert dt <= cfg.step_translation + 1e-9
                assert dr <= cfg.step_rotation + 1e-9

    def test_step_budget(self, sphere_demos):
        for demo in sphere_demos:
            assert len(demo.waypoints) <= 30

    def test_clearance_brute_force(self, sphere_scene, sphere_demos):
        scene, _ = sphere_scene
        clouds = [scene.object.points, scene.hand.points]
        for demo in sphere_demos:
            for wp in demo.waypoints:
                assert brute_min_distance(wp.pose.translation, clouds) > 0.1

    def test_distance_monotone_after_align(self, sphere_demos):
        for demo in sphere_demos:
            p_pre = demo.pregrasp.translation
            moving = [wp for wp in demo.waypoints if wp.phase != PHASE_ALIGN]
            dists = [np.linalg.norm(wp.pose.translation - p_pre) for wp in moving]
            for a, b in zip(dists[:-1], dists[1:]):
                assert b <= a + 1e-12

    def test_phase_order(self, sphere_demos):
        rank = {PHASE_ALIGN: 0, PHASE_TRANSLATE: 1, PHASE_REFINE: 2}
        for demo in sphere_demos:
            ranks = [rank[wp.phase] for wp in demo.waypoints]
            assert ranks == sorted(ranks)

    def test_deterministic(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        cfg = TrajectoryConfig()
        start = sample_initial_poses(sphere_grasp, scene, scene.hand_centroid,
                                     SamplerConfig(k=1, seed=8))[0]
        d1 = generate_trajectory(start, sphere_grasp, scene, cfg)
        d2 = generate_trajectory(start, sphere_grasp, scene, cfg)
        assert len(d1.waypoints) == len(d2.waypoints)
        for a, b in zip(d1.waypoints, d2.waypoints):
            assert np.array_equal(a.pose.as_matrix(), b.pose.as_matrix())

    def test_step_budget_exceeded(self, sphere_scene, sphere_grasp):
        scene, _ = sphere_scene
        start = sample_initial_poses(sphere_grasp, scene, scene.hand_centroid,
                                     SamplerConfig(k=1, seed=8))[0]
        with pytest.raises(StepBudgetExceeded):
            generate_trajectory(start, sphere_grasp, scene,
                                TrajectoryConfig(max_steps=3))

    def test_clearance_violation(self):
        scene = simple_scene()
        grasp = top_grasp(scene)
        # an initial pose already closer than d_min to the object
        start = Pose(Rotation.identity(), scene.object_mean + [0, 0, 0.08])
        with pytest.raises(ClearanceViolation):
            generate_trajectory(start, grasp, scene,
                                TrajectoryConfig(max_steps=100))


class TestActionsFromWaypoints:
    def test_identical_waypoints_zero_action(self, sphere_demos):
        demo = sphere_demos[0]
        wp = demo.waypoints[0]
        actions = actions_from_waypoints([wp, wp])
        np.testing.assert_allclose(actions[0].as_vector(), np.zeros(6),
                                   atol=1e-12)

    def test_pure_z_advance(self):
        from h2rsim.demos import Waypoint
        a = Waypoint(Pose(translation=(0, 0, 0)), PHASE_TRANSLATE)
        b = Waypoint(Pose(translation=(0, 0, 0.05)), PHASE_TRANSLATE)
        actions = actions_from_waypoints([a, b])
        np.testing.assert_allclose(actions[0].as_vector(),
                                   [0, 0, 0, 0, 0, 0.05], atol=1e-15)

    def test_left_fold_reproduces_final_pose(self, sphere_demos):
        for demo in sphere_demos:
            pose = demo.waypoints[0].pose
            for action in demo.actions:
                pose = compose(pose, action.to_pose())
            final = demo.waypoints[-1].pose
            assert np.linalg.norm(pose.translation - final.translation) < 1e-6
            assert pose.rotation.angle_to(final.rotation) < 1e-6

    def test_needs_two_waypoints(self):
        from h2rsim.demos import Waypoint
        with pytest.raises(ValueError):
            actions_from_waypoints([Waypoint(Pose(), PHASE_ALIGN)])

    def test_action_count(self, sphere_demos):
        for demo in sphere_demos:
            assert len(demo.actions) == len(demo.waypoints) - 1


class TestConfigValidation:
    def test_sampler_rejects_bad_values(self):
        with pytest.raises(ValueError):
            SamplerConfig(k=0)
        with pytest.raises(ValueError):
            SamplerConfig(r=-1.0)
        with pytest.raises(ValueError):
            SamplerConfig(alpha_min=0.0)
        with pytest.raises(ValueError):
            SamplerConfig(theta_max=4.0)

    def test_trajectory_rejects_bad_values(self):
        with pytest.raises(ValueError):
            TrajectoryConfig(s=0.5, d=0.5)
        with pytest.raises(ValueError):
            TrajectoryConfig(d_min=0.0)
        with pytest.raises(ValueError):
            TrajectoryConfig(max_steps=0)
