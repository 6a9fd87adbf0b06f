"""Roadmap queries: one-shot IK, task-space path planning, and the
teleoperation controller that tracks a streamed target point."""

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .chain import Configuration, TaskPoint, forward_kinematics
from .grr import is_continuous, project_neighbors
from .projection import ProjectionResult
from .taskgraph import nearest_neighbors, task_distance

HISTORY_LIMIT = 1024


class UnreachableGoalError(ValueError):
    """No path to the goal exists in the resolved edge set."""


class TeleopStatus(str, Enum):
    TRACKING = "tracking"
    DETOURING = "detouring"
    BLOCKED = "blocked"


def _resolved_adjacency(roadmap):
    """Vertex → neighbor ids over resolved edges, cached on the roadmap."""
    adj = getattr(roadmap, "_resolved_adjacency", None)
    if adj is None:
        buckets = {}
        for i, j in roadmap.resolved_edges:
            buckets.setdefault(int(i), []).append(int(j))
            buckets.setdefault(int(j), []).append(int(i))
        adj = {v: np.array(sorted(ws), dtype=int) for v, ws in buckets.items()}
        roadmap._resolved_adjacency = adj
    return adj


def _local_support(roadmap, ids):
    """Restrict a nearest-first candidate list to the largest component of
    the subgraph those candidates induce in the resolved edges.

    Ties on size go to the component holding the best-ranked (nearest)
    candidate, so the selection is a deterministic function of the list.
    """
    id_set = set(int(v) for v in ids)
    rank = {int(v): r for r, v in enumerate(ids)}
    adj = _resolved_adjacency(roadmap)
    seen = set()
    components = []
    for v in ids:
        v = int(v)
        if v in seen:
            continue
        comp = []
        stack = [v]
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj.get(u, ()):
                w = int(w)
                if w in id_set and w not in seen:
                    seen.add(w)
                    stack.append(w)
        components.append(comp)
    best = min(components,
               key=lambda comp: (-len(comp), min(rank[v] for v in comp)))
    chosen = set(best)
    return np.array([int(v) for v in ids if int(v) in chosen], dtype=int)


def resolve(roadmap, graph, chain, p, k=None, *, context=None,
            projection=None, weights=None):
    """Configuration for an arbitrary task point, supported by the roadmap.

    Gathers the k nearest assigned vertices, keeps only the largest locally
    connected group of them (mixed-branch support would average
    incompatible configurations), and projects from their weighted average.

    Args:
        roadmap, graph, chain: resolution roadmap and what it was built on.
        p: query task point.
        k: support size (default: the roadmap's build-time k).
        context: optional assigned vertex id; restricts support to that
            vertex's connected component, which keeps a stream of queries on
            one branch. The result then depends only on p and the component,
            never on the caller's current configuration.
        projection, weights: overrides for the roadmap's stored parameters.

    Returns:
        ProjectionResult; reason "out_of_coverage" when no assigned vertex
        is eligible.
    """
    if k is None:
        k = roadmap.k
    if projection is None:
        projection = roadmap.projection
    if weights is None:
        weights = roadmap.weights
    candidates = roadmap.assigned_ids()
    if context is not None:
        labels = roadmap.component_labels()
        if labels[context] < 0:
            return ProjectionResult(None, False, "out_of_coverage", np.inf, 0)
        candidates = candidates[labels[candidates] == labels[context]]
    if len(candidates) == 0:
        return ProjectionResult(None, False, "out_of_coverage", np.inf, 0)
    ids = nearest_neighbors(graph, p, k, candidates=candidates)
    support = _local_support(roadmap, ids)
    return project_neighbors(chain, p, graph, roadmap, k, support=support,
                             projection=projection, weights=weights)


def _nearest_assigned(roadmap, graph, p, candidates=None):
    if candidates is None:
        candidates = roadmap.assigned_ids()
    if len(candidates) == 0:
        return None
    return int(nearest_neighbors(graph, p, 1, candidates=candidates)[0])


def _astar(roadmap, graph, start, goal):
    """Vertex path over resolved edges minimizing summed task distance."""
    if start == goal:
        return [start]
    adj = _resolved_adjacency(roadmap)
    goal_t = graph.translations[goal]

    def h(v):
        return float(np.linalg.norm(graph.translations[v] - goal_t))

    g = {start: 0.0}
    came = {}
    heap = [(h(start), start)]
    closed = set()
    while heap:
        f, v = heapq.heappop(heap)
        if v in closed:
            continue
        if v == goal:
            path = [v]
            while v in came:
                v = came[v]
                path.append(v)
            return path[::-1]
        closed.add(v)
        for w in adj.get(v, ()):
            w = int(w)
            cost = g[v] + task_distance(graph.task_point(v),
                                        graph.task_point(w), roadmap.weights)
            if cost < g.get(w, np.inf):
                g[w] = cost
                came[w] = v
                heapq.heappush(heap, (cost + h(w), w))
    return None


def _default_step(graph):
    if graph.meta is None:
        raise ValueError("graph has no grid metadata; pass step explicitly")
    return float(np.min(graph.meta.pitch)) / 2.0


def plan_task_path(roadmap, graph, chain, q_start, p_goal, step=None):
    """Configuration sequence tracking the shortest resolved-edge route
    from the start configuration's region to the goal point's region.

    The route is interpolated so consecutive task waypoints are at most
    `step` apart, and every waypoint is resolved against roadmap support
    from the route's own component, so consecutive configurations inherit
    the continuity the resolved edges were checked for.

    Raises:
        UnreachableGoalError: start and goal regions are not connected by
            resolved edges (or the roadmap has no assignments at all).
    """
    if step is None:
        step = _default_step(graph)
    p_start = forward_kinematics(chain, q_start, graph.mode)
    v_start = _nearest_assigned(roadmap, graph, p_start)
    v_goal = _nearest_assigned(roadmap, graph, p_goal)
    if v_start is None or v_goal is None:
        raise UnreachableGoalError("roadmap has no assigned vertices")
    labels = roadmap.component_labels()
    if labels[v_start] != labels[v_goal]:
        raise UnreachableGoalError(
            f"vertices {v_start} and {v_goal} lie in different components")
    vertex_path = _astar(roadmap, graph, v_start, v_goal)
    if vertex_path is None:
        raise UnreachableGoalError(
            f"no resolved-edge path from vertex {v_start} to {v_goal}")

    orientation = (None if graph.fixed_orientation is None
                   else graph.fixed_orientation.copy())
    points = [graph.task_point(vertex_path[0])]
    for a, b in zip(vertex_path, vertex_path[1:]):
        t_a, t_b = graph.translations[a], graph.translations[b]
        n_sub = max(1, int(np.ceil(np.linalg.norm(t_b - t_a) / step)))
        for s in range(1, n_sub + 1):
            t = t_a + (t_b - t_a) * (s / n_sub)
            points.append(TaskPoint(t, orientation, graph.mode))

    configs = []
    for pt in points:
        result = resolve(roadmap, graph, chain, pt, context=v_start)
        if not result.success:
            raise UnreachableGoalError(
                f"resolution failed along the route ({result.reason})")
        configs.append(result.q)
    return configs


@dataclass
class TeleopState:
    """Mutable controller state for one teleoperation session.

    `history` keeps the most recent (input point, output configuration)
    pairs for metric computation; `target_feasible` remembers whether the
    previous input resolved, which gates replanning on re-entry.
    """

    current_config: Configuration
    active_target: object = None
    detour_plan: deque = field(default_factory=deque)
    status: TeleopStatus = TeleopStatus.TRACKING
    history: deque = field(default_factory=lambda: deque(maxlen=HISTORY_LIMIT))
    target_feasible: bool = True


def _emit(state, p_t, q, status, target=None):
    state.current_config = q
    state.status = status
    if target is not None:
        state.active_target = target
    state.history.append((p_t, q))
    return q, state


def teleop_step(state, p_t, roadmap, graph, chain, *, k=None,
                continuity=None, projection=None, weights=None,
                plan_step=None):
    """Advance the teleop controller by one tick toward the target point.

    Feasible targets within a continuous motion of the current
    configuration are tracked directly. A feasible target whose direct
    motion fails the continuity check is reached by planning a detour over
    resolved edges and playing it back one waypoint per tick. An infeasible
    target parks the arm at (or walks it along resolved edges toward) the
    nearest covered vertex, reported as blocked.

    Returns:
        (configuration, state); the configuration is always
        self-collision-free, and the state's active_target records the
        target actually pursued (the fallback vertex point while blocked).
    """
    if continuity is None:
        continuity = roadmap.continuity
    if projection is None:
        projection = roadmap.projection
    if weights is None:
        weights = roadmap.weights
    q_c = state.current_config

    if state.detour_plan:
        q = state.detour_plan.popleft()
        status = (TeleopStatus.DETOURING if state.detour_plan
                  else TeleopStatus.TRACKING)
        return _emit(state, p_t, q, status)

    v_c = _nearest_assigned(roadmap, graph,
                            forward_kinematics(chain, q_c, graph.mode))
    if v_c is None:
        return _emit(state, p_t, q_c, TeleopStatus.BLOCKED)

    result = resolve(roadmap, graph, chain, p_t, k, context=v_c,
                     projection=projection, weights=weights)
    if result.success:
        state.target_feasible = True
        q_t = result.q
        p_c = forward_kinematics(chain, q_c, graph.mode)
        if is_continuous(chain, p_c, p_t, q_c, q_t, continuity,
                         projection=projection, weights=weights):
            return _emit(state, p_t, q_t, TeleopStatus.TRACKING, target=p_t)
        try:
            plan = plan_task_path(roadmap, graph, chain, q_c, p_t,
                                  step=plan_step)
        except UnreachableGoalError:
            plan = None
        if plan:
            state.detour_plan = deque(plan)
            q = state.detour_plan.popleft()
            status = (TeleopStatus.DETOURING if state.detour_plan
                      else TeleopStatus.TRACKING)
            return _emit(state, p_t, q, status, target=p_t)
        return _emit(state, p_t, q_c, TeleopStatus.BLOCKED)

    # Target out of coverage: fall back to the nearest covered vertex
    # reachable from here, stepping one resolved edge per tick.
    state.target_feasible = False
    labels = roadmap.component_labels()
    reachable = roadmap.assigned_ids()
    reachable = reachable[labels[reachable] == labels[v_c]]
    p_n = _nearest_assigned(roadmap, graph, p_t, candidates=reachable)
    target = graph.task_point(p_n)
    if p_n == v_c:
        return _emit(state, p_t, roadmap.assignment(v_c),
                     TeleopStatus.BLOCKED, target=target)
    path = _astar(roadmap, graph, v_c, p_n)
    if path is None or len(path) < 2:
        return _emit(state, p_t, q_c, TeleopStatus.BLOCKED, target=target)
    q = roadmap.assignment(path[1])
    return _emit(state, p_t, q, TeleopStatus.BLOCKED, target=target)
