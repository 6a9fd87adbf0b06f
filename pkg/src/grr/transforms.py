"""Minimal rigid-transform and quaternion helpers.

Quaternions are stored as (w, x, y, z) numpy arrays with unit norm.
Rotations are 3x3 matrices; poses are (R, t) pairs.
"""

import numpy as np

IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def axis_angle_matrix(axis, angle):
    """Rotation matrix about a unit axis (Rodrigues formula)."""
    x, y, z = axis
    c, s = np.cos(angle), np.sin(angle)
    C = 1.0 - c
    return np.array([
        [c + x * x * C, x * y * C - z * s, x * z * C + y * s],
        [y * x * C + z * s, c + y * y * C, y * z * C - x * s],
        [z * x * C - y * s, z * y * C + x * s, c + z * z * C],
    ])


def quat_from_matrix(R):
    """Unit quaternion (w, x, y, z) from a rotation matrix."""
    tr = R[0, 0] + R[1, 1] + R[2, 2]
    if tr > 0.0:
        s = np.sqrt(tr + 1.0) * 2.0
        w = 0.25 * s
        x = (R[2, 1] - R[1, 2]) / s
        y = (R[0, 2] - R[2, 0]) / s
        z = (R[1, 0] - R[0, 1]) / s
    elif R[0, 0] >= R[1, 1] and R[0, 0] >= R[2, 2]:
        s = np.sqrt(1.0 + R[0, 0] - R[1, 1] - R[2, 2]) * 2.0
        w = (R[2, 1] - R[1, 2]) / s
        x = 0.25 * s
        y = (R[0, 1] + R[1, 0]) / s
        z = (R[0, 2] + R[2, 0]) / s
    elif R[1, 1] >= R[2, 2]:
        s = np.sqrt(1.0 + R[1, 1] - R[0, 0] - R[2, 2]) * 2.0
        w = (R[0, 2] - R[2, 0]) / s
        x = (R[0, 1] + R[1, 0]) / s
        y = 0.25 * s
        z = (R[1, 2] + R[2, 1]) / s
    else:
        s = np.sqrt(1.0 + R[2, 2] - R[0, 0] - R[1, 1]) * 2.0
        w = (R[1, 0] - R[0, 1]) / s
        x = (R[0, 2] + R[2, 0]) / s
        y = (R[1, 2] + R[2, 1]) / s
        z = 0.25 * s
    q = np.array([w, x, y, z])
    return q / np.linalg.norm(q)


def matrix_from_quat(q):
    """Rotation matrix from a unit quaternion (w, x, y, z)."""
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def quat_about_z(angle):
    """Quaternion for a rotation of `angle` about the +z axis."""
    return np.array([np.cos(0.5 * angle), 0.0, 0.0, np.sin(0.5 * angle)])


def angle_about_z(q):
    """Signed rotation angle about +z encoded by a planar quaternion."""
    return 2.0 * np.arctan2(q[3], q[0])


def quat_multiply(a, b):
    """Hamilton product a * b."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array([
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    ])


def quat_conjugate(q):
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_error_rotvec(q_target, q_current):
    """Shortest rotation vector taking q_current onto q_target."""
    e = quat_multiply(q_target, quat_conjugate(q_current))
    if e[0] < 0.0:
        e = -e
    v = e[1:]
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        return np.zeros(3)
    angle = 2.0 * np.arctan2(norm, e[0])
    return v * (angle / norm)


def rotvec_from_matrix(R):
    """Axis-angle vector (axis * angle) of a rotation matrix."""
    cos_a = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    angle = np.arccos(cos_a)
    if angle < 1e-12:
        return np.zeros(3)
    if np.pi - angle < 1e-6:
        # Near pi the off-diagonal extraction degenerates; use the symmetric part.
        B = (R + np.eye(3)) / 2.0
        axis = np.sqrt(np.maximum(np.diag(B), 0.0))
        # Fix signs from the largest component.
        k = int(np.argmax(axis))
        if axis[k] > 0.0:
            if k == 0:
                axis[1] = B[0, 1] / axis[0]
                axis[2] = B[0, 2] / axis[0]
            elif k == 1:
                axis[0] = B[0, 1] / axis[1]
                axis[2] = B[1, 2] / axis[1]
            else:
                axis[0] = B[0, 2] / axis[2]
                axis[1] = B[1, 2] / axis[2]
        axis = axis / np.linalg.norm(axis)
        return axis * angle
    axis = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return axis * (angle / (2.0 * np.sin(angle)))


def wrap_angle(a):
    """Wrap an angle (or array of angles) to [-pi, pi)."""
    return np.mod(a + np.pi, 2.0 * np.pi) - np.pi


class Transform:
    """Rigid transform: rotation matrix plus translation."""

    __slots__ = ("R", "t")

    def __init__(self, R=None, t=None):
        self.R = np.eye(3) if R is None else np.asarray(R, dtype=float)
        self.t = np.zeros(3) if t is None else np.asarray(t, dtype=float)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_translation(cls, t):
        t3 = np.zeros(3)
        t3[: len(t)] = t
        return cls(np.eye(3), t3)

    @classmethod
    def from_rotation_z(cls, angle, t=None):
        return cls(axis_angle_matrix(np.array([0.0, 0.0, 1.0]), angle),
                   t if t is not None else np.zeros(3))

    def compose(self, other):
        return Transform(self.R @ other.R, self.R @ other.t + self.t)

    def apply(self, p):
        return self.R @ p + self.t

    def is_identity(self, tol=0.0):
        return (np.all(np.abs(self.R - np.eye(3)) <= tol)
                and np.all(np.abs(self.t) <= tol))
