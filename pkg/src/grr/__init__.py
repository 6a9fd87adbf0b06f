"""Global redundancy resolution roadmaps for redundant serial manipulators."""

from .chain import (
    Capsule,
    Configuration,
    KinematicChain,
    RevoluteJoint,
    TaskMode,
    TaskPoint,
    bisect_q,
    config_distance,
    forward_kinematics,
    jacobian,
    self_collision_free,
    weighted_average,
)
from .grr import (
    ContinuityParams,
    ResolutionRoadmap,
    connectivity,
    global_expansion,
    is_continuous,
    project_neighbors,
    seed_from_cycle,
    smoothness,
)
from .io_cli import (
    load_roadmap,
    load_robot_spec,
    save_roadmap,
    save_robot_spec,
)
from .projection import ProjectionParams, ProjectionResult, project
from .query import (
    TeleopState,
    TeleopStatus,
    UnreachableGoalError,
    plan_task_path,
    resolve,
    teleop_step,
)
from .taskgraph import (
    TaskGraph,
    TaskMetricWeights,
    bisect_p,
    build_grid,
    nearest_neighbors,
    task_distance,
)

__all__ = [
    "Capsule",
    "Configuration",
    "ContinuityParams",
    "KinematicChain",
    "ProjectionParams",
    "ProjectionResult",
    "ResolutionRoadmap",
    "RevoluteJoint",
    "TaskGraph",
    "TaskMetricWeights",
    "TaskMode",
    "TaskPoint",
    "TeleopState",
    "TeleopStatus",
    "UnreachableGoalError",
    "bisect_p",
    "bisect_q",
    "build_grid",
    "config_distance",
    "connectivity",
    "forward_kinematics",
    "global_expansion",
    "is_continuous",
    "jacobian",
    "load_roadmap",
    "load_robot_spec",
    "nearest_neighbors",
    "plan_task_path",
    "project",
    "project_neighbors",
    "resolve",
    "save_roadmap",
    "save_robot_spec",
    "seed_from_cycle",
    "self_collision_free",
    "smoothness",
    "task_distance",
    "teleop_step",
    "weighted_average",
]
