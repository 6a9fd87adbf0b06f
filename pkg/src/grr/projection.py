"""Projection of configurations onto task points via damped least squares.

Given a target task point and an initial configuration, `project` iterates
Newton-style updates with Tikhonov damping until the task metric drops below
tolerance. Limited joints are clamped and continuous joints rewrapped after
every step, and the converged result is rejected if it self-collides.
"""

from dataclasses import dataclass

import numpy as np

from .chain import Configuration, TaskMode, TaskPoint, self_collision_free
from .taskgraph import TaskMetricWeights, task_distance
from .transforms import angle_about_z, quat_error_rotvec, wrap_angle


@dataclass(frozen=True)
class ProjectionParams:
    """Damped-least-squares settings.

    tolerance is measured with the task metric, damping is the Tikhonov
    term added to J J^T, and step_clamp bounds the joint-space step norm
    (radians) by scaling the whole step.
    """

    max_iterations: int = 100
    tolerance: float = 1e-4
    damping: float = 1e-6
    step_clamp: float = 0.5


@dataclass
class ProjectionResult:
    """Outcome of a projection attempt.

    reason is one of "converged", "max_iterations", "collision". q holds
    the final iterate even on failure; residual is its task-metric error.
    """

    q: Configuration
    success: bool
    reason: str
    residual: float
    iterations: int


def project(chain, target, q_init, params=None, weights=None):
    """Drive a configuration onto a target task point.

    Args:
        chain: manipulator to solve on.
        target: TaskPoint; its mode selects the tracked coordinates, and
            fixed-orientation targets must carry an orientation.
        q_init: starting configuration (unchanged by the call).
        params: ProjectionParams (defaults used when omitted).
        weights: task metric weights for the convergence test.

    Returns:
        ProjectionResult with the final configuration.
    """
    if params is None:
        params = ProjectionParams()
    mode = target.mode
    if mode is TaskMode.FIXED_ORIENTATION and target.orientation is None:
        raise ValueError("fixed-orientation target needs an orientation")

    qv = chain.clamp(np.array(q_init.values, dtype=float))
    damping_eye = None
    residual = np.inf
    iterations = 0
    for it in range(params.max_iterations + 1):
        t, quat, J = chain.fk_and_jacobian(qv, mode)
        current = TaskPoint(t, quat if mode is TaskMode.FIXED_ORIENTATION
                            else None, mode)
        residual = task_distance(target, current, weights)
        iterations = it
        if residual <= params.tolerance:
            q = Configuration(chain.normalize(qv))
            if not self_collision_free(chain, q):
                return ProjectionResult(q, False, "collision", residual, it)
            return ProjectionResult(q, True, "converged", residual, it)
        if it == params.max_iterations:
            break
        err = _task_error(chain, target, t, quat, mode)
        if damping_eye is None:
            damping_eye = params.damping * np.eye(J.shape[0])
        step = J.T @ np.linalg.solve(J @ J.T + damping_eye, err)
        norm = float(np.linalg.norm(step))
        if norm > params.step_clamp:
            step *= params.step_clamp / norm
        qv = chain.clamp(qv + step)

    return ProjectionResult(Configuration(chain.normalize(qv)), False,
                            "max_iterations", residual, iterations)


def _task_error(chain, target, t, quat, mode):
    """Stacked task-space error vector matching the Jacobian rows."""
    dt = np.asarray(target.translation, dtype=float) - t
    if mode is not TaskMode.FIXED_ORIENTATION:
        return dt
    if chain.planar:
        dth = wrap_angle(angle_about_z(target.orientation) - angle_about_z(quat))
        return np.concatenate([dt, [dth]])
    return np.concatenate([dt, quat_error_rotvec(target.orientation, quat)])
