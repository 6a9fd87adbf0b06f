"""Global redundancy resolution: build a configuration-space roadmap over a
task graph so that every task vertex carries one configuration and every
edge that passes a recursive continuity check is recorded.

The exported pieces are the continuity check (recursive bisection against a
deviation bound), projection from multiple assigned neighbors (weighted
average of nearby configurations, then projection), seeded breadth-first
expansion over the task graph, cyclic seed extraction, and the two roadmap
quality metrics (connectivity and smoothness).
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .chain import (
    Configuration,
    bisect_q,
    config_distance,
    forward_kinematics,
    weighted_average,
)
from .projection import ProjectionParams, ProjectionResult, project
from .taskgraph import bisect_p, nearest_neighbors, task_distance

DEFAULT_DEPTH_LIMIT = 16
_REPAIR_ROUND_CAP = 3

# Distances below this are treated as "query sits on a vertex": the weight
# formula in project_neighbors divides by them.
_COINCIDENT = 1e-12


@dataclass(frozen=True)
class ContinuityParams:
    """Thresholds of the continuity check.

    epsilon is the configuration-space resolution below which an edge is
    accepted outright; c bounds how far the projected midpoint may deviate
    from the chord endpoints, as a factor of the endpoint distance.
    """

    c: float
    epsilon: float

    def __post_init__(self):
        if self.c <= 0.5:
            raise ValueError("deviation factor c must exceed 0.5")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")

    @classmethod
    def for_chain(cls, chain):
        """Defaults that scale with configuration-space dimension."""
        root = float(np.sqrt(chain.n_joints))
        return cls(c=0.5 * root, epsilon=0.05 * root)


@dataclass
class BuildReport:
    """What happened during one global expansion."""

    n_vertices: int = 0
    n_edges: int = 0
    seed_vertices: list = field(default_factory=list)
    assigned_count: int = 0
    failed_vertices: list = field(default_factory=list)
    pass1_failed: list = field(default_factory=list)
    retry_assigned: int = 0
    edges_checked: int = 0
    edges_passed: int = 0
    repair_rounds: int = 0
    repair_reassigned: int = 0
    k: int = 0
    build_seconds: float = 0.0


class ResolutionRoadmap:
    """Partial map from task-graph vertices to configurations, plus the
    edges whose configuration motion passed the continuity check.

    Instances are produced by global_expansion (or the roadmap loader) and
    treated as immutable afterwards; component labels are cached.
    """

    def __init__(self, graph, q_values, assigned, resolved_edges, *,
                 chain=None, weights=None, continuity=None, projection=None,
                 k=None, build_report=None, task_graph_ref=None):
        self.graph = graph
        self.chain = chain
        self.q_values = q_values
        self.assigned = assigned
        self.resolved_edges = resolved_edges
        self.weights = weights
        self.continuity = continuity
        self.projection = projection if projection is not None else ProjectionParams()
        self.k = k
        self.build_report = build_report
        self.task_graph_ref = task_graph_ref
        self._labels = None

    @property
    def n_assigned(self):
        return int(np.count_nonzero(self.assigned))

    def has_assignment(self, i):
        return bool(self.assigned[i])

    def assignment(self, i):
        if not self.assigned[i]:
            raise KeyError(f"vertex {i} has no assignment")
        return Configuration(self.q_values[i].copy())

    @property
    def assignments(self):
        """Vertex-index → Configuration mapping (built on demand)."""
        return {int(i): Configuration(self.q_values[i].copy())
                for i in np.where(self.assigned)[0]}

    def assigned_ids(self):
        return np.where(self.assigned)[0]

    def component_labels(self):
        """Per-vertex component id over resolved edges; -1 for unassigned.

        Assigned vertices with no resolved edge form singleton components.
        Labels are the smallest vertex id in each component, so they are
        stable across runs.
        """
        if self._labels is None:
            n = self.graph.n_vertices
            parent = np.arange(n)

            def find(x):
                root = x
                while parent[root] != root:
                    root = parent[root]
                while parent[x] != root:
                    parent[x], x = root, parent[x]
                return root

            for i, j in self.resolved_edges:
                ri, rj = find(int(i)), find(int(j))
                if ri != rj:
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj
            labels = np.array([find(i) for i in range(n)])
            labels[~self.assigned] = -1
            self._labels = labels
        return self._labels


def is_continuous(chain, p_i, p_j, q_i, q_j, params=None,
                  depth_limit=DEFAULT_DEPTH_LIMIT, *, projection=None,
                  weights=None):
    """Recursive bisection test that the motion q_i → q_j tracks p_i → p_j.

    Accepts once the configuration gap drops under epsilon. At each level
    the task midpoint is projected starting from the configuration midpoint;
    a projection failure, a midpoint deviating by more than c times the
    endpoint gap, or running out of depth all reject the edge.
    """
    if params is None:
        params = ContinuityParams.for_chain(chain)
    d_q = config_distance(chain, q_i, q_j)
    if d_q < params.epsilon:
        return True
    if depth_limit <= 0:
        return False
    p_m = bisect_p(p_i, p_j)
    result = project(chain, p_m, bisect_q(chain, q_i, q_j),
                     projection, weights)
    if not result.success:
        return False
    q_m = result.q
    if max(config_distance(chain, q_i, q_m),
           config_distance(chain, q_m, q_j)) > params.c * d_q:
        return False
    return (is_continuous(chain, p_i, p_m, q_i, q_m, params, depth_limit - 1,
                          projection=projection, weights=weights)
            and is_continuous(chain, p_m, p_j, q_m, q_j, params,
                              depth_limit - 1, projection=projection,
                              weights=weights))


def project_neighbors(chain, p, graph, roadmap, k=None, *, support=None,
                      projection=None, weights=None):
    """Resolve a task point from the configurations of nearby assigned
    vertices: inverse-square distance weights, weighted average, projection.

    Args:
        chain, p: manipulator and target task point.
        graph, roadmap: task graph and the (possibly partial) resolution.
        k: neighbor count (default 2·dim(T) + 2).
        support: optional explicit assigned-vertex ids to use instead of
            the k-nearest gather (the IK/teleop resolvers pass this).
        projection, weights: forwarded to project / the task metric.

    Returns:
        ProjectionResult; reason "no_support" (with q = None) when none of
        the candidate vertices carries an assignment.
    """
    if k is None:
        k = default_k(graph)
    if support is None:
        near = nearest_neighbors(graph, p, k)
        support = near[roadmap.assigned[near]]
    else:
        support = np.asarray(support, dtype=int)
    if len(support) == 0:
        return ProjectionResult(None, False, "no_support", np.inf, 0)

    ds = np.array([task_distance(p, graph.task_point(int(j)), weights)
                   for j in support])
    hit = int(np.argmin(ds))
    if ds[hit] < _COINCIDENT:
        guess = Configuration(roadmap.q_values[support[hit]].copy())
    else:
        ws = (np.max(ds) / ds) ** 2
        ws /= np.sum(ws)
        qs = [Configuration(roadmap.q_values[int(j)]) for j in support]
        guess = weighted_average(chain, qs, ws)
    return project(chain, p, guess, projection, weights)


def default_k(graph):
    """Neighborhood size 2·dim(T) + 2 for this graph's task dimension."""
    dim = graph.translations.shape[1]
    if graph.fixed_orientation is not None:
        dim += 1 if graph.translations.shape[1] == 2 else 3
    return 2 * dim + 2


def seed_from_cycle(chain, cycle, graph, *, projection=None, weights=None):
    """Snap a continuous cyclic configuration path onto graph vertices.

    Each cycle entry is projected onto its nearest vertex's task point; the
    first entry claiming a vertex wins and failed projections are skipped.

    Returns:
        Ordered mapping vertex-index → Configuration.
    """
    if len(cycle) == 0:
        raise ValueError("seed cycle is empty")
    seeds = {}
    for q in cycle:
        p = forward_kinematics(chain, q, graph.mode)
        v = int(nearest_neighbors(graph, p, 1)[0])
        if v in seeds:
            continue
        result = project(chain, graph.task_point(v), q, projection, weights)
        if result.success:
            seeds[v] = result.q
    if not seeds:
        raise RuntimeError("every cycle entry failed to project onto a vertex")
    return seeds


def global_expansion(chain, graph, seeds, *, k=None, continuity=None,
                     projection=None, weights=None):
    """Grow a resolution roadmap outward from seed configurations.

    Breadth-first over the task graph: dequeue a vertex, enqueue its
    unvisited k-nearest neighbors plus its graph-adjacent neighbors, assign
    the vertex by projecting the weighted average of nearby assigned
    configurations, then run the continuity check against every assigned
    graph neighbor (each unordered pair checked once). Vertices whose
    projection fails are retried once after the main pass, when their
    neighborhoods are richer.

    Args:
        chain: manipulator.
        graph: task graph G_p.
        seeds: mapping vertex-index → Configuration; queue order follows
            the mapping's iteration order.
        k, continuity, projection, weights: expansion parameters; defaults
            are derived from the graph dimension and chain dimension.

    Returns:
        ResolutionRoadmap over `graph`.
    """
    from collections import deque

    from .taskgraph import graph_fingerprint

    if not seeds:
        raise ValueError("seeds must be nonempty")
    if k is None:
        k = default_k(graph)
    if continuity is None:
        continuity = ContinuityParams.for_chain(chain)

    t_start = time.perf_counter()
    n = graph.n_vertices
    q_values = np.zeros((n, chain.n_joints))
    assigned = np.zeros(n, dtype=bool)
    for v, q in seeds.items():
        if assigned[v]:
            raise ValueError(f"duplicate seed for vertex {v}")
        q_values[v] = q.values
        assigned[v] = True

    roadmap = ResolutionRoadmap(
        graph, q_values, assigned, None, chain=chain, weights=weights,
        continuity=continuity, projection=projection, k=k,
        task_graph_ref=graph_fingerprint(graph))

    decided = {}
    report = BuildReport(n_vertices=n, n_edges=graph.n_edges,
                         seed_vertices=[int(v) for v in seeds], k=k)

    def check_edges(v):
        for w in graph.neighbors(v):
            w = int(w)
            if not assigned[w]:
                continue
            pair = (v, w) if v < w else (w, v)
            if pair in decided:
                continue
            ok = is_continuous(
                chain, graph.task_point(v), graph.task_point(w),
                Configuration(q_values[v]), Configuration(q_values[w]),
                continuity, projection=projection, weights=weights)
            decided[pair] = ok

    queue = deque(int(v) for v in seeds)
    visited = np.zeros(n, dtype=bool)
    visited[list(seeds)] = True
    failed = []

    while queue:
        v = queue.popleft()
        p_v = graph.task_point(v)
        for w in nearest_neighbors(graph, p_v, k):
            w = int(w)
            if not visited[w]:
                visited[w] = True
                queue.append(w)
        for w in graph.neighbors(v):
            w = int(w)
            if not visited[w]:
                visited[w] = True
                queue.append(w)
        if not assigned[v]:
            result = project_neighbors(chain, p_v, graph, roadmap, k,
                                       projection=projection, weights=weights)
            if not result.success:
                failed.append(v)
                continue
            q_values[v] = result.q.values
            assigned[v] = True
        check_edges(v)

    report.pass1_failed = list(failed)
    still_failed = []
    for v in failed:
        result = project_neighbors(chain, graph.task_point(v), graph, roadmap,
                                   k, projection=projection, weights=weights)
        if result.success:
            q_values[v] = result.q.values
            assigned[v] = True
            report.retry_assigned += 1
            check_edges(v)
        else:
            still_failed.append(v)

    # Expansion fronts that wrap around a fold in the solution sheet can
    # meet with incompatible configurations: both endpoints of an edge are
    # individually fine, yet the edge fails.  Re-projecting one endpoint
    # from the other side's configuration continues that branch across the
    # seam.  A reassignment is kept only when it strictly increases the
    # vertex's passing-edge count, so every acceptance raises the global
    # count of passing edges and the loop terminates.
    for _ in range(_REPAIR_ROUND_CAP):
        failing = sorted(pair for pair, ok in decided.items() if not ok)
        if not failing:
            break
        changed = False
        for i, j in failing:
            if decided[(i, j)]:
                continue
            for src, dst in ((i, j), (j, i)):
                result = project(chain, graph.task_point(dst),
                                 Configuration(q_values[src]), projection,
                                 weights=weights)
                if not result.success:
                    continue
                candidate = result.q.values
                nbrs = [int(w) for w in graph.neighbors(dst)
                        if assigned[int(w)]]
                current_pass = sum(
                    decided[(dst, w) if dst < w else (w, dst)] for w in nbrs)
                verdicts = {
                    w: is_continuous(
                        chain, graph.task_point(dst), graph.task_point(w),
                        Configuration(candidate), Configuration(q_values[w]),
                        continuity, projection=projection, weights=weights)
                    for w in nbrs}
                if sum(verdicts.values()) <= current_pass:
                    continue
                q_values[dst] = candidate
                for w, ok in verdicts.items():
                    decided[(dst, w) if dst < w else (w, dst)] = ok
                report.repair_reassigned += 1
                changed = True
                break
        if not changed:
            break
        report.repair_rounds += 1

    report.edges_checked = len(decided)
    report.edges_passed = sum(1 for ok in decided.values() if ok)
    resolved = sorted(pair for pair, ok in decided.items() if ok)
    roadmap.resolved_edges = np.array(resolved, dtype=int).reshape(-1, 2)
    report.assigned_count = int(np.count_nonzero(assigned))
    report.failed_vertices = still_failed
    report.build_seconds = time.perf_counter() - t_start
    roadmap.build_report = report
    return roadmap


def connectivity(roadmap, graph=None):
    """Resolved-edge fraction of the task graph (1.0 = fully resolved)."""
    if graph is None:
        graph = roadmap.graph
    if graph.n_edges == 0:
        raise ValueError("task graph has no edges")
    return len(roadmap.resolved_edges) / graph.n_edges


def smoothness(roadmap, graph=None, chain=None, weights=None):
    """Mean configuration-per-task distance ratio over resolved edges."""
    if graph is None:
        graph = roadmap.graph
    if chain is None:
        chain = roadmap.chain
    if len(roadmap.resolved_edges) == 0:
        raise ValueError("roadmap has no resolved edges")
    if weights is None:
        weights = roadmap.weights
    ratios = []
    for i, j in roadmap.resolved_edges:
        d_q = config_distance(chain, Configuration(roadmap.q_values[i]),
                              Configuration(roadmap.q_values[j]))
        d_p = task_distance(graph.task_point(int(i)), graph.task_point(int(j)),
                            weights)
        ratios.append(d_q / d_p)
    return float(np.mean(ratios))
