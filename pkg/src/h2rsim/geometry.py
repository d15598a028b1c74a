"""SE(3)/SO(3) arithmetic: quaternion rotations, rigid poses, Euler actions.

Conventions used throughout the package:
  * quaternions are stored (w, x, y, z), unit norm, canonicalized to w >= 0
  * Euler angles are intrinsic XYZ (rotate about x, then new y, then new z)
  * poses map points from their local frame into the parent frame
  * serialized poses are 4x4 row-major matrices (16 numbers); actions are
    6-vectors [rx, ry, rz, tx, ty, tz] in radians/meters
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateFrame, ZeroVector

_EPS_PARALLEL = 1e-6
_EPS_SLERP_LINEAR = 1e-9


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


@dataclass(frozen=True)
class Rotation:
    """A rotation stored as a unit quaternion (w, x, y, z) with w >= 0."""

    quat: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0, 0.0]))

    def __post_init__(self):
        q = np.asarray(self.quat, dtype=np.float64).copy()
        if q.shape != (4,):
            raise ValueError(f"quaternion must have shape (4,), got {q.shape}")
        n = float(np.linalg.norm(q))
        if n < 1e-12:
            raise ZeroVector("quaternion has zero norm")
        q /= n
        if q[0] < 0.0:  # double-cover canonicalization
            q = -q
        q.setflags(write=False)
        object.__setattr__(self, "quat", q)

    @staticmethod
    def identity() -> "Rotation":
        return Rotation()

    @staticmethod
    def from_axis_angle(axis, angle: float) -> "Rotation":
        a = _as_vec3(axis)
        n = float(np.linalg.norm(a))
        if n < 1e-12:
            raise ZeroVector("rotation axis has zero norm")
        half = 0.5 * float(angle)
        s = math.sin(half) / n
        return Rotation(np.array([math.cos(half), a[0] * s, a[1] * s, a[2] * s]))

    @staticmethod
    def from_matrix(m) -> "Rotation":
        """Build from a 3x3 rotation matrix (Shepperd's method)."""
        R = np.asarray(m, dtype=np.float64)
        if R.shape != (3, 3):
            raise ValueError(f"rotation matrix must be 3x3, got {R.shape}")
        tr = R[0, 0] + R[1, 1] + R[2, 2]
        if tr > 0.0:
            s = math.sqrt(tr + 1.0) * 2.0
            q = np.array([0.25 * s,
                          (R[2, 1] - R[1, 2]) / s,
                          (R[0, 2] - R[2, 0]) / s,
                          (R[1, 0] - R[0, 1]) / s])
        elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
            s = math.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
            q = np.array([(R[2, 1] - R[1, 2]) / s,
                          0.25 * s,
                          (R[0, 1] + R[1, 0]) / s,
                          (R[0, 2] + R[2, 0]) / s])
        elif R[1, 1] >= R[2, 2]:
            s = math.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
            q = np.array([(R[0, 2] - R[2, 0]) / s,
                          (R[0, 1] + R[1, 0]) / s,
                          0.25 * s,
                          (R[1, 2] + R[2, 1]) / s])
        else:
            s = math.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
            q = np.array([(R[1, 0] - R[0, 1]) / s,
                          (R[0, 2] + R[2, 0]) / s,
                          (R[1, 2] + R[2, 1]) / s,
                          0.25 * s])
        return Rotation(q)

    @staticmethod
    def from_euler_xyz(rx: float, ry: float, rz: float) -> "Rotation":
        """Intrinsic XYZ Euler angles to rotation (R = Rx @ Ry @ Rz)."""
        qx = Rotation.from_axis_angle((1.0, 0.0, 0.0), rx)
        qy = Rotation.from_axis_angle((0.0, 1.0, 0.0), ry)
        qz = Rotation.from_axis_angle((0.0, 0.0, 1.0), rz)
        return qx.compose(qy).compose(qz)

    def as_matrix(self) -> np.ndarray:
        w, x, y, z = self.quat
        return np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])

    def as_euler_xyz(self) -> tuple[float, float, float]:
        """Intrinsic XYZ angles; at gimbal lock (|ry| = pi/2) rz is set to 0."""
        R = self.as_matrix()
        sy = float(np.clip(R[0, 2], -1.0, 1.0))
        ry = math.asin(sy)
        if abs(sy) < 1.0 - 1e-9:
            rx = math.atan2(-R[1, 2], R[2, 2])
            rz = math.atan2(-R[0, 1], R[0, 0])
        else:
            rx = math.atan2(R[2, 1], R[1, 1])
            rz = 0.0
        return rx, ry, rz

    def compose(self, other: "Rotation") -> "Rotation":
        """Hamilton product self * other (apply `other` first, then self)."""
        w1, x1, y1, z1 = self.quat
        w2, x2, y2, z2 = other.quat
        return Rotation(np.array([
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ]))

    def inverse(self) -> "Rotation":
        w, x, y, z = self.quat
        return Rotation(np.array([w, -x, -y, -z]))

    def apply(self, v) -> np.ndarray:
        """Rotate a 3-vector: v' = q v q*."""
        p = _as_vec3(v)
        w = self.quat[0]
        u = self.quat[1:]
        t = 2.0 * np.cross(u, p)
        return p + w * t + np.cross(u, t)

    def angle(self) -> float:
        """Rotation angle in [0, pi]."""
        return 2.0 * math.acos(min(1.0, abs(float(self.quat[0]))))

    def angle_to(self, other: "Rotation") -> float:
        """Geodesic distance to another rotation, in [0, pi]."""
        d = abs(float(np.dot(self.quat, other.quat)))
        return 2.0 * math.acos(min(1.0, d))

    def z_axis(self) -> np.ndarray:
        """Third column of the rotation matrix (local +z in the parent frame)."""
        w, x, y, z = self.quat
        return np.array([2 * (x * z + w * y), 2 * (y * z - w * x), 1 - 2 * (x * x + y * y)])


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation followed by translation (meters)."""

    rotation: Rotation = field(default_factory=Rotation)
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=np.float64).copy()
        if t.shape != (3,):
            raise ValueError(f"translation must have shape (3,), got {t.shape}")
        t.setflags(write=False)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose()

    @staticmethod
    def from_matrix(m) -> "Pose":
        M = np.asarray(m, dtype=np.float64)
        if M.shape == (16,):
            M = M.reshape(4, 4)
        if M.shape != (4, 4):
            raise ValueError(f"pose matrix must be 4x4, got {M.shape}")
        return Pose(Rotation.from_matrix(M[:3, :3]), M[:3, 3])

    def as_matrix(self) -> np.ndarray:
        M = np.eye(4)
        M[:3, :3] = self.rotation.as_matrix()
        M[:3, 3] = self.translation
        return M

    def as_flat(self) -> list[float]:
        """Row-major 16-number serialization."""
        return [float(v) for v in self.as_matrix().reshape(16)]

    def apply(self, p) -> np.ndarray:
        """Map a point from the local frame into the parent frame."""
        return self.rotation.apply(p) + self.translation

    def z_axis(self) -> np.ndarray:
        return self.rotation.z_axis()


def compose(a: Pose, b: Pose) -> Pose:
    """Composite pose applying b first, then a: (a . b) p = a(b(p))."""
    return Pose(a.rotation.compose(b.rotation), a.rotation.apply(b.translation) + a.translation)


def inverse(p: Pose) -> Pose:
    r_inv = p.rotation.inverse()
    return Pose(r_inv, -r_inv.apply(p.translation))


def slerp(r0: Rotation, r1: Rotation, u: float) -> Rotation:
    """Shortest-arc spherical interpolation between two rotations, u in [0, 1].

    Falls back to normalized linear interpolation when the rotations are
    nearly identical (quaternion dot > 1 - 1e-9).
    """
    u = float(u)
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"interpolation parameter must be in [0, 1], got {u}")
    if u == 0.0:
        return r0
    if u == 1.0:
        return r1
    q0 = r0.quat
    q1 = r1.quat
    d = float(np.dot(q0, q1))
    if d < 0.0:  # take the short way around
        q1 = -q1
        d = -d
    if d > 1.0 - _EPS_SLERP_LINEAR:
        return Rotation((1.0 - u) * q0 + u * q1)
    theta = math.acos(min(1.0, d))
    s = math.sin(theta)
    return Rotation((math.sin((1.0 - u) * theta) * q0 + math.sin(u * theta) * q1) / s)


def look_rotation(forward, up_hint=(0.0, 1.0, 0.0)) -> Rotation:
    """Rotation whose z-axis equals `forward`, x-axis orthogonal to `up_hint`.

    Raises DegenerateFrame when forward and up_hint are parallel.
    """
    f = _as_vec3(forward)
    nf = float(np.linalg.norm(f))
    if nf < 1e-12:
        raise ZeroVector("forward direction has zero norm")
    f = f / nf
    up = _as_vec3(up_hint)
    x = np.cross(up, f)
    nx = float(np.linalg.norm(x))
    if nx < _EPS_PARALLEL:
        raise DegenerateFrame("forward direction is parallel to the up hint")
    x = x / nx
    y = np.cross(f, x)
    return Rotation.from_matrix(np.column_stack([x, y, f]))


def angle_between(a, b) -> float:
    """Angle between two 3-vectors, in [0, pi]."""
    va = _as_vec3(a)
    vb = _as_vec3(b)
    na = float(np.linalg.norm(va))
    nb = float(np.linalg.norm(vb))
    if na <= 1e-9 or nb <= 1e-9:
        raise ZeroVector("cannot measure an angle against a zero vector")
    c = float(np.dot(va, vb) / (na * nb))
    return math.acos(max(-1.0, min(1.0, c)))


@dataclass(frozen=True)
class EulerAction:
    """A 6D relative motion: intrinsic XYZ Euler angles + translation."""

    rotation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).copy()
        t = np.asarray(self.translation, dtype=np.float64).copy()
        if r.shape != (3,) or t.shape != (3,):
            raise ValueError("EulerAction components must be 3-vectors")
        r.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def from_pose(p: Pose) -> "EulerAction":
        return EulerAction(np.array(p.rotation.as_euler_xyz()), p.translation)

    @staticmethod
    def from_vector(v) -> "EulerAction":
        a = np.asarray(v, dtype=np.float64)
        if a.shape != (6,):
            raise ValueError(f"action vector must have 6 components, got {a.shape}")
        return EulerAction(a[:3], a[3:])

    def to_pose(self) -> Pose:
        rx, ry, rz = self.rotation
        return Pose(Rotation.from_euler_xyz(rx, ry, rz), self.translation)

    def as_vector(self) -> np.ndarray:
        """[rx, ry, rz, tx, ty, tz] in radians/meters."""
        return np.concatenate([self.rotation, self.translation])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.rotation)) and np.all(np.isfinite(self.translation)))
