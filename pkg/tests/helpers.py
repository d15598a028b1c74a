"""Independent oracles used across the test suite.

Everything here is deliberately written against raw numpy (4x4 matrices,
exhaustive scans, trigonometry) rather than the package's own operators, so
a bug in the implementation cannot hide inside its own checker.
"""

import math

import numpy as np


def random_unit_quat(rng):
    q = rng.normal(size=4)
    return q / np.linalg.norm(q)


def quat_to_matrix(q):
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def random_rotation_matrix(rng):
    return quat_to_matrix(random_unit_quat(rng))


def se3_matrix(R, t):
    M = np.eye(4)
    M[:3, :3] = R
    M[:3, 3] = t
    return M


def rotation_angle_between_matrices(Ra, Rb):
    c = (np.trace(Ra.T @ Rb) - 1.0) / 2.0
    return math.acos(max(-1.0, min(1.0, c)))


def brute_min_distance(p, point_arrays):
    """Exhaustive O(N) nearest-distance scan over one or more point arrays."""
    best = np.inf
    for pts in point_arrays:
        if len(pts):
            best = min(best, float(np.min(np.linalg.norm(pts - np.asarray(p), axis=1))))
    return best


def max_view_offset_angle(offset_range):
    """Largest angle Rx(a)Ry(b) with |a|,|b| <= offset_range can tilt the
    local z-axis: arccos(cos(a) cos(b)) maximized at the range corners."""
    c = math.cos(offset_range)
    return math.acos(max(-1.0, min(1.0, c * c)))


def check_initial_pose(matrix, grasp_matrix, object_center, hand_centroid,
                       r, alpha_min, offset_range, theta_max,
                       d_min, cloud_arrays, tol=1e-6):
    """Re-validate every sampling constraint on an emitted pose from its raw
    4x4 matrix. Returns a list of violated constraint names (empty = pass)."""
    M = np.asarray(matrix)
    pos = M[:3, 3]
    z_axis = M[:3, 2]
    grasp_pos = np.asarray(grasp_matrix)[:3, 3]
    grasp_z = np.asarray(grasp_matrix)[:3, 2]
    failures = []

    if abs(np.linalg.norm(pos - grasp_pos) - r) > tol:
        failures.append("radius")

    a = np.asarray(hand_centroid) - np.asarray(object_center)
    b = pos - np.asarray(object_center)
    cos_sep = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    if math.acos(max(-1.0, min(1.0, cos_sep))) <= alpha_min:
        failures.append("hand_separation")

    look = np.asarray(object_center) - pos
    look = look / np.linalg.norm(look)
    cos_off = max(-1.0, min(1.0, float(np.dot(z_axis, look))))
    if math.acos(cos_off) > max_view_offset_angle(offset_range) + 1e-9:
        failures.append("view_offset")

    cos_grasp = max(-1.0, min(1.0, float(np.dot(z_axis, grasp_z))))
    if math.acos(cos_grasp) > theta_max + 1e-9:
        failures.append("grasp_axis_angle")

    if brute_min_distance(pos, cloud_arrays) <= d_min:
        failures.append("clearance")
    return failures
