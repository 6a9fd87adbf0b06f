"""Built-in robot models and their cyclic seed paths.

Each factory returns a chain plus the manually designed closed configuration
cycle used to seed roadmap expansion. The planar cycles are exact: joint
angles are chosen so the end effector (position mode) or the wrist
(fixed-orientation mode) sweeps a circle while consecutive entries stay
within the continuity threshold.
"""

from dataclasses import dataclass

import numpy as np

from .chain import Capsule, Configuration, KinematicChain, RevoluteJoint, TaskMode
from .transforms import wrap_angle

_Z = (0.0, 0.0, 1.0)
_Y = (0.0, 1.0, 0.0)


@dataclass
class RobotModel:
    """A chain bundled with its task mode and cyclic seed path."""

    name: str
    chain: KinematicChain
    mode: TaskMode
    seed_cycle: list
    fixed_orientation: np.ndarray | None = None
    workspace: tuple = None
    resolution: tuple = None


def _planar_chain(lengths, radius=0.0):
    joints = [RevoluteJoint(np.array(_Z), np.array([L, 0.0, 0.0]))
              for L in lengths]
    links = [Capsule(np.zeros(3), np.array([L, 0.0, 0.0]), radius)
             for L in lengths]
    return KinematicChain(joints, links, planar=True)


def planar_5link():
    """Five unit links, all joints continuous, self-intersection allowed."""
    return _planar_chain([1.0, 1.0, 1.0, 1.0, 1.0])


def planar_3link():
    """Three links (2, 0.75, 0.75): reach annulus with an inner hole."""
    return _planar_chain([2.0, 0.75, 0.75])


def planar5_position_cycle(entries=64):
    """Closed seed cycle for the 5-link arm in position mode.

    Keeps all four distal joints at a constant bend kappa so the tool sweeps
    the circle of radius 2.5 while only the base joint advances; the bend
    solves 1 + 2*cos(kappa) + 2*cos(2*kappa) = 2.5.
    """
    kappa = np.arccos((-1.0 + np.sqrt(15.0)) / 4.0)
    cycle = []
    for theta in np.linspace(0.0, 2.0 * np.pi, entries, endpoint=False):
        q = np.array([wrap_angle(theta - 2.0 * kappa)] + [kappa] * 4)
        cycle.append(Configuration(q))
    return cycle


def planar5_fixed_cycle(entries=96):
    """Closed seed cycle for the 5-link arm with the tool facing +x.

    The first four joints hold a symmetric bend that keeps the wrist on a
    circle of radius 2 about the base; the last joint counter-rotates so the
    tool orientation stays fixed. The bend solves
    cos(kappa/2) + cos(3*kappa/2) = 1 (wrist radius 2 with unit links).
    """
    roots = np.roots([4.0, 0.0, -2.0, -1.0])
    u = float(np.real(roots[np.isreal(roots) & (np.real(roots) > 0)][0]))
    kappa = 2.0 * np.arccos(u)
    cycle = []
    for theta in np.linspace(0.0, 2.0 * np.pi, entries, endpoint=False):
        q = np.array([
            wrap_angle(theta - 1.5 * kappa),
            kappa, kappa, kappa,
            wrap_angle(-theta - 1.5 * kappa),
        ])
        cycle.append(Configuration(q))
    return cycle


def planar3_cycle(entries=80):
    """Closed seed cycle for the 3-link arm: tool circle of radius 2.

    The distal joints hold the bend solving
    |2*e^{-i*kappa} + 0.75 + 0.75*e^{i*kappa}| = 2.
    """
    c = (-4.125 + np.sqrt(4.125 ** 2 + 4.0 * 6.0 * 1.875)) / 12.0
    kappa = np.arccos(c)
    cycle = []
    for theta in np.linspace(0.0, 2.0 * np.pi, entries, endpoint=False):
        q = np.array([wrap_angle(theta - kappa), kappa, kappa])
        cycle.append(Configuration(q))
    return cycle


def spatial_7dof():
    """Synthetic 7-joint spatial arm (alternating z/y axes, thin capsules)."""
    lengths = [0.12, 0.20, 0.20, 0.18, 0.15, 0.12, 0.08]
    axes = [_Z, _Y, _Z, _Y, _Z, _Y, _Z]
    joints = [RevoluteJoint(np.array(a), np.array([0.0, 0.0, L]))
              for a, L in zip(axes, lengths)]
    links = [Capsule(np.zeros(3), np.array([0.0, 0.0, L]), 0.02)
             for L in lengths]
    from .transforms import Transform
    ee = Transform.from_translation(np.array([0.0, 0.0, 0.10]))
    return KinematicChain(joints, links, ee_offset=ee)


def spatial7_cycle(entries=64):
    """Closed seed cycle for the spatial arm: base joint sweep with a fixed
    elbow pose, tracing a horizontal circle."""
    pose = np.array([0.0, 0.7, 0.0, 1.3, 0.0, 1.0, 0.0])
    cycle = []
    for theta in np.linspace(0.0, 2.0 * np.pi, entries, endpoint=False):
        q = pose.copy()
        q[0] = wrap_angle(theta)
        cycle.append(Configuration(q))
    return cycle


def planar5_position_model():
    return RobotModel(
        name="planar5",
        chain=planar_5link(),
        mode=TaskMode.POSITION,
        seed_cycle=planar5_position_cycle(),
        workspace=((-5.0, -5.0), (5.0, 5.0)),
        resolution=(36, 36),
    )


def planar5_fixed_model():
    return RobotModel(
        name="planar5-fixed",
        chain=planar_5link(),
        mode=TaskMode.FIXED_ORIENTATION,
        seed_cycle=planar5_fixed_cycle(),
        fixed_orientation=np.array([1.0, 0.0, 0.0, 0.0]),
        workspace=((-5.0, -5.0), (5.0, 5.0)),
        resolution=(36, 36),
    )


def planar3_model():
    return RobotModel(
        name="planar3",
        chain=planar_3link(),
        mode=TaskMode.POSITION,
        seed_cycle=planar3_cycle(),
        workspace=((-4.0, -4.0), (4.0, 4.0)),
        resolution=(24, 24),
    )


def spatial7_model():
    return RobotModel(
        name="spatial7",
        chain=spatial_7dof(),
        mode=TaskMode.POSITION,
        seed_cycle=spatial7_cycle(),
        # Box sized so every cell centre sits well inside the 1.15 m reach
        # sphere; targets in the outermost ~10% demand near-full stretch,
        # where the clamped projection steps orbit instead of converging.
        workspace=((-0.7, -0.7, -0.2), (0.7, 0.7, 0.6)),
        resolution=(7, 7, 5),
    )


MODELS = {
    "planar5": planar5_position_model,
    "planar5-fixed": planar5_fixed_model,
    "planar3": planar3_model,
    "spatial7": spatial7_model,
}
