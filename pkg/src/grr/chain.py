"""Serial-chain kinematics for redundant revolute manipulators.

Provides the kinematic chain model (joints, link capsules, base and tool
transforms), forward kinematics, the geometric Jacobian restricted to the
active task coordinates, the wraparound-aware configuration metric, and
configuration interpolation/averaging used by roadmap construction.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .transforms import (
    Transform,
    angle_about_z,
    axis_angle_matrix,
    quat_about_z,
    quat_from_matrix,
    wrap_angle,
)

_Z = np.array([0.0, 0.0, 1.0])


class TaskMode(Enum):
    """Task-space flavor a chain is paired with."""

    POSITION = "position"
    FIXED_ORIENTATION = "position_fixed_orientation"


@dataclass(frozen=True)
class RevoluteJoint:
    """One revolute joint: unit rotation axis, fixed translation to the next
    joint, and either angle limits in radians or no limits (continuous)."""

    axis: np.ndarray
    offset: np.ndarray
    lower: float | None = None
    upper: float | None = None

    @property
    def continuous(self):
        return self.lower is None and self.upper is None


@dataclass(frozen=True)
class Capsule:
    """Collision capsule: segment endpoints in the owning link frame."""

    p0: np.ndarray
    p1: np.ndarray
    radius: float


@dataclass
class Configuration:
    """Joint value vector in radians; continuous joints kept in [-pi, pi)."""

    values: np.ndarray

    def copy(self):
        return Configuration(self.values.copy())

    def __len__(self):
        return len(self.values)


@dataclass
class TaskPoint:
    """Task-space point: 2D/3D translation plus optional unit quaternion."""

    translation: np.ndarray
    orientation: np.ndarray | None = None
    mode: TaskMode = TaskMode.POSITION


class KinematicChain:
    """Immutable geometric description of a serial revolute manipulator.

    Args:
        joints: ordered revolute joint descriptors, base to tip.
        links: collision capsules, one per joint (may be empty for none).
        base_pose: rigid transform of joint 0 (default identity).
        ee_offset: rigid transform from the last joint frame to the tool.
        planar: all joint axes parallel to +/-z; enables a 2D task space.
    """

    def __init__(self, joints, links=(), base_pose=None, ee_offset=None,
                 planar=False):
        if not joints:
            raise ValueError("chain needs at least one joint")
        self.joints = tuple(joints)
        self.links = tuple(links)
        if self.links and len(self.links) != len(self.joints):
            raise ValueError("links must be empty or one capsule per joint")
        self.base_pose = base_pose if base_pose is not None else Transform.identity()
        self.ee_offset = ee_offset if ee_offset is not None else Transform.identity()
        self.planar = planar

        n = len(self.joints)
        self.n_joints = n
        self.axes = np.array([j.axis for j in self.joints], dtype=float)
        self.offsets = np.array([j.offset for j in self.joints], dtype=float)
        norms = np.linalg.norm(self.axes, axis=1)
        if np.any(np.abs(norms - 1.0) > 1e-9):
            raise ValueError("joint axes must have unit norm")
        self.continuous = np.array([j.continuous for j in self.joints])
        self.lower = np.array(
            [-np.inf if j.continuous else j.lower for j in self.joints])
        self.upper = np.array(
            [np.inf if j.continuous else j.upper for j in self.joints])
        if np.any(self.lower >= self.upper):
            raise ValueError("joint limits must satisfy lower < upper")

        if planar:
            dots = self.axes @ _Z
            if np.any(np.abs(np.abs(dots) - 1.0) > 1e-9):
                raise ValueError("planar chain requires axes parallel to z")
            self._signs = np.sign(dots)
            self._base_angle = angle_about_z(quat_from_matrix(self.base_pose.R))
            self._ee_angle = angle_about_z(quat_from_matrix(self.ee_offset.R))
        else:
            self._signs = None
            self._base_angle = None
            self._ee_angle = None

        self._seg_lengths = np.linalg.norm(self.offsets, axis=1)
        self._ee_len = float(np.linalg.norm(self.ee_offset.t))
        self._any_capsule = any(c.radius > 0.0 for c in self.links)

    # ---- configuration handling -------------------------------------------------

    def normalize(self, values):
        """Wrap continuous joints to [-pi, pi); leave limited joints alone."""
        v = np.array(values, dtype=float)
        v[self.continuous] = wrap_angle(v[self.continuous])
        return v

    def clamp(self, values):
        """Clamp limited joints to their bounds and wrap continuous ones."""
        v = np.clip(values, self.lower, self.upper)
        v[self.continuous] = wrap_angle(v[self.continuous])
        return v

    def make_config(self, values):
        """Validated Configuration from raw joint values."""
        v = np.asarray(values, dtype=float)
        if v.shape != (self.n_joints,):
            raise ValueError(
                f"expected {self.n_joints} joint values, got shape {v.shape}")
        v = self.normalize(v)
        if np.any(v < self.lower - 1e-12) or np.any(v > self.upper + 1e-12):
            raise ValueError("joint values violate limits")
        return Configuration(v)

    def random_config(self, rng):
        """Uniform random configuration (continuous joints over [-pi, pi))."""
        lo = np.where(self.continuous, -np.pi, self.lower)
        hi = np.where(self.continuous, np.pi, self.upper)
        return Configuration(self.normalize(rng.uniform(lo, hi)))

    def task_dim(self, mode):
        base = 2 if self.planar else 3
        if mode is TaskMode.FIXED_ORIENTATION:
            return base + (1 if self.planar else 3)
        return base

    # ---- forward kinematics -----------------------------------------------------

    def _fk_planar(self, qv):
        """Planar tool position (2,), frame angles (n,), joint positions (n, 2)."""
        phi = self._base_angle + np.cumsum(self._signs * qv)
        c, s = np.cos(phi), np.sin(phi)
        ox, oy = self.offsets[:, 0], self.offsets[:, 1]
        dx = c * ox - s * oy
        dy = s * ox + c * oy
        jx = self.base_pose.t[0] + np.concatenate(([0.0], np.cumsum(dx)[:-1]))
        jy = self.base_pose.t[1] + np.concatenate(([0.0], np.cumsum(dy)[:-1]))
        px = jx[-1] + dx[-1]
        py = jy[-1] + dy[-1]
        et = self.ee_offset.t
        if et[0] != 0.0 or et[1] != 0.0:
            cn, sn = c[-1], s[-1]
            px += cn * et[0] - sn * et[1]
            py += sn * et[0] + cn * et[1]
        return np.array([px, py]), phi, np.column_stack([jx, jy])

    def _fk_spatial(self, qv):
        """World joint rotations, joint origins, tool position and rotation."""
        R = self.base_pose.R.copy()
        origin = self.base_pose.t.copy()
        axes_w = np.empty((self.n_joints, 3))
        origins = np.empty((self.n_joints, 3))
        for i in range(self.n_joints):
            origins[i] = origin
            R = R @ axis_angle_matrix(self.axes[i], qv[i])
            axes_w[i] = R @ self.axes[i]
            origin = origin + R @ self.offsets[i]
        tool = origin + R @ self.ee_offset.t
        return axes_w, origins, tool, R @ self.ee_offset.R

    def fk_pose(self, qv):
        """Tool position (task dim) and orientation quaternion."""
        if self.planar:
            t, phi, _ = self._fk_planar(qv)
            return t, quat_about_z(wrap_angle(phi[-1] + self._ee_angle))
        _, _, tool, R = self._fk_spatial(qv)
        return tool, quat_from_matrix(R)

    def fk_and_jacobian(self, qv, mode):
        """Tool pose plus geometric Jacobian for the active task coordinates.

        Returns (translation, orientation quaternion, J) where J has the
        translation rows first and, in fixed-orientation mode, the
        angular-velocity rows after (about +z for planar chains).
        """
        if self.planar:
            t, phi, jpos = self._fk_planar(qv)
            rel = t[None, :] - jpos
            J_t = np.column_stack([-self._signs * rel[:, 1],
                                   self._signs * rel[:, 0]]).T
            quat = quat_about_z(wrap_angle(phi[-1] + self._ee_angle))
            if mode is TaskMode.FIXED_ORIENTATION:
                J = np.vstack([J_t, self._signs[None, :]])
            else:
                J = J_t
            return t, quat, J
        axes_w, origins, tool, R = self._fk_spatial(qv)
        J_t = np.cross(axes_w, tool[None, :] - origins).T
        if mode is TaskMode.FIXED_ORIENTATION:
            J = np.vstack([J_t, axes_w.T])
        else:
            J = J_t
        return tool, quat_from_matrix(R), J

    # ---- reach bounds -----------------------------------------------------------

    def reach(self, mode=TaskMode.POSITION, fixed_orientation=None):
        """Necessary-condition reach annulus (center, r_min, r_max).

        In fixed-orientation mode the last joint frame orientation is pinned
        by the target orientation, so the final offset and tool segments
        become a fixed tail and only the preceding joints contribute reach.
        """
        if mode is TaskMode.FIXED_ORIENTATION:
            if fixed_orientation is None:
                raise ValueError("fixed-orientation reach needs an orientation")
            from .transforms import matrix_from_quat
            R_pin = matrix_from_quat(np.asarray(fixed_orientation, dtype=float)) \
                @ self.ee_offset.R.T
            tail = R_pin @ (self.offsets[-1] + self.ee_offset.t)
            center = self.base_pose.t + tail
            segs = self._seg_lengths[:-1]
        else:
            center = self.base_pose.t
            segs = np.concatenate([self._seg_lengths, [self._ee_len]])
        segs = segs[segs > 0.0]
        if segs.size == 0:
            return center, 0.0, 0.0
        total = float(np.sum(segs))
        r_min = max(0.0, 2.0 * float(np.max(segs)) - total)
        return center, r_min, total

    # ---- collision geometry -----------------------------------------------------

    def link_frames(self, qv):
        """World (rotation, origin) of each link frame (origin at its joint)."""
        if self.planar:
            _, phi, jpos = self._fk_planar(qv)
            frames = []
            for i in range(self.n_joints):
                R = axis_angle_matrix(_Z, phi[i])
                origin = np.array([jpos[i, 0], jpos[i, 1], 0.0])
                frames.append((R, origin))
            return frames
        R = self.base_pose.R.copy()
        origin = self.base_pose.t.copy()
        frames = []
        for i in range(self.n_joints):
            joint_origin = origin
            R = R @ axis_angle_matrix(self.axes[i], qv[i])
            frames.append((R, joint_origin))
            origin = origin + R @ self.offsets[i]
        return frames

    def canonical_dict(self):
        """Stable plain-data description used for hashing and robot specs."""
        return {
            "planar": self.planar,
            "joints": [
                {
                    "axis": [float(x) for x in j.axis],
                    "offset": [float(x) for x in j.offset],
                    "limits": None if j.continuous else [float(j.lower), float(j.upper)],
                }
                for j in self.joints
            ],
            "links": [
                {
                    "p0": [float(x) for x in c.p0],
                    "p1": [float(x) for x in c.p1],
                    "radius": float(c.radius),
                }
                for c in self.links
            ],
            "base_pose": {
                "R": [[float(x) for x in row] for row in self.base_pose.R],
                "t": [float(x) for x in self.base_pose.t],
            },
            "ee_offset": {
                "R": [[float(x) for x in row] for row in self.ee_offset.R],
                "t": [float(x) for x in self.ee_offset.t],
            },
        }


# ---- spec operations ------------------------------------------------------------


def forward_kinematics(chain, q, mode=TaskMode.POSITION):
    """Tool TaskPoint for a configuration.

    Planar chains report a 2D translation and encode the planar orientation
    as a quaternion about the plane normal. In position mode the returned
    point carries no orientation.
    """
    qv = _values(chain, q)
    t, quat = chain.fk_pose(qv)
    if mode is TaskMode.FIXED_ORIENTATION:
        return TaskPoint(t, quat, mode)
    return TaskPoint(t, None, TaskMode.POSITION)


def jacobian(chain, q, mode=TaskMode.POSITION):
    """Geometric Jacobian restricted to the active task coordinates."""
    qv = _values(chain, q)
    _, _, J = chain.fk_and_jacobian(qv, mode)
    return J


def config_distance(chain, q_i, q_j):
    """Euclidean norm over per-joint differences; continuous joints use the
    shortest signed angular difference."""
    d = _joint_diffs(chain, _values(chain, q_i), _values(chain, q_j))
    return float(np.linalg.norm(d))


def bisect_q(chain, q_i, q_j):
    """Per-joint midpoint; continuous joints take the shorter-arc midpoint."""
    vi = _values(chain, q_i)
    vj = _values(chain, q_j)
    mid = vi + 0.5 * _joint_diffs(chain, vj, vi)
    return Configuration(chain.normalize(mid))


def weighted_average(chain, qs, ws):
    """Weighted mean configuration.

    Limited joints use the arithmetic weighted mean; continuous joints use
    the circular weighted mean (angle of the weighted phasor sum). If a
    continuous joint's phasor nearly cancels, the highest-weight input wins.
    """
    if len(qs) == 0:
        raise ValueError("weighted_average needs at least one configuration")
    ws = np.asarray(ws, dtype=float)
    if len(ws) != len(qs):
        raise ValueError("weights must match configurations")
    if np.any(ws < 0.0) or abs(float(np.sum(ws)) - 1.0) > 1e-9:
        raise ValueError("weights must be nonnegative and sum to 1")
    top = int(np.argmax(ws))
    if ws[top] == 1.0:
        return Configuration(_values(chain, qs[top]).copy())
    V = np.array([_values(chain, q) for q in qs])
    out = ws @ V
    if np.any(chain.continuous):
        cols = np.where(chain.continuous)[0]
        cx = ws @ np.cos(V[:, cols])
        sx = ws @ np.sin(V[:, cols])
        ang = np.arctan2(sx, cx)
        weak = np.hypot(cx, sx) < 1e-9
        ang[weak] = V[top, cols[weak]]
        out[cols] = ang
    return Configuration(chain.normalize(out))


def self_collision_free(chain, q):
    """True iff no pair of non-adjacent link capsules intersects."""
    if not chain._any_capsule:
        return True
    qv = _values(chain, q)
    frames = chain.link_frames(qv)
    world = []
    for cap, (R, origin) in zip(chain.links, frames):
        world.append((R @ cap.p0 + origin, R @ cap.p1 + origin, cap.radius))
    n = len(world)
    for i in range(n):
        for j in range(i + 2, n):
            a0, a1, ri = world[i]
            b0, b1, rj = world[j]
            if ri + rj <= 0.0:
                continue
            if segment_distance(a0, a1, b0, b1) < ri + rj:
                return False
    return True


def segment_distance(p0, p1, q0, q1, eps=1e-12):
    """Minimum distance between segments [p0, p1] and [q0, q1]."""
    u = p1 - p0
    v = q1 - q0
    w = p0 - q0
    a = u @ u
    b = u @ v
    c = v @ v
    d = u @ w
    e = v @ w
    D = a * c - b * b
    sN, sD = 0.0, D
    tN, tD = 0.0, D
    if D < eps:
        sN, sD = 0.0, 1.0
        tN, tD = e, c
    else:
        sN = b * e - c * d
        tN = a * e - b * d
        if sN < 0.0:
            sN = 0.0
            tN, tD = e, c
        elif sN > sD:
            sN = sD
            tN, tD = e + b, c
    if tN < 0.0:
        tN = 0.0
        if -d < 0.0:
            sN = 0.0
        elif -d > a:
            sN = sD
        else:
            sN, sD = -d, a
    elif tN > tD:
        tN = tD
        if -d + b < 0.0:
            sN = 0.0
        elif -d + b > a:
            sN = sD
        else:
            sN, sD = -d + b, a
    sc = 0.0 if abs(sN) < eps else sN / sD
    tc = 0.0 if abs(tN) < eps else tN / tD
    return float(np.linalg.norm(w + sc * u - tc * v))


def _values(chain, q):
    v = q.values if isinstance(q, Configuration) else np.asarray(q, dtype=float)
    if v.shape != (chain.n_joints,):
        raise ValueError(
            f"expected {chain.n_joints} joint values, got shape {v.shape}")
    return v


def _joint_diffs(chain, a, b):
    d = a - b
    d[chain.continuous] = wrap_angle(d[chain.continuous])
    return d
