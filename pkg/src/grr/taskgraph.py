"""Task-space graphs: grid sampling, the task metric, and neighbor queries.

A task graph discretizes the reachable task space into vertices (grid cell
centers that pass a cheap reach test) connected by axis and diagonal
adjacency. Graphs in fixed-orientation mode share a single target
orientation across all vertices.
"""

from dataclasses import dataclass, field

import numpy as np

from .chain import TaskMode, TaskPoint

_ORIENTATION_TERM_EPS = 1e-12


@dataclass(frozen=True)
class TaskMetricWeights:
    """Weights of the translation and orientation terms of the task metric."""

    translation: float = 1.0
    orientation: float = 0.3


def task_distance(p_i, p_j, weights=None):
    """Weighted task-space distance.

    Translation contributes its Euclidean norm; orientation, when both
    points carry one, contributes 1 - |<o_i, o_j>| on unit quaternions.
    """
    if weights is None:
        weights = TaskMetricWeights()
    d = weights.translation * float(
        np.linalg.norm(np.asarray(p_i.translation) - np.asarray(p_j.translation)))
    if p_i.orientation is not None and p_j.orientation is not None:
        dot = abs(float(np.dot(p_i.orientation, p_j.orientation)))
        d += weights.orientation * (1.0 - min(dot, 1.0))
    return d


def bisect_p(p_i, p_j):
    """Midpoint task point; orientations (when present) are slerped."""
    t = 0.5 * (np.asarray(p_i.translation, dtype=float)
               + np.asarray(p_j.translation, dtype=float))
    o = None
    if p_i.orientation is not None and p_j.orientation is not None:
        o = _slerp_half(p_i.orientation, p_j.orientation)
    elif p_i.orientation is not None:
        o = np.array(p_i.orientation, dtype=float)
    elif p_j.orientation is not None:
        o = np.array(p_j.orientation, dtype=float)
    return TaskPoint(t, o, p_i.mode)


def _slerp_half(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.dot(a, b) < 0.0:
        b = -b
    mid = a + b
    norm = np.linalg.norm(mid)
    if norm < 1e-9:
        # Antipodal on the quaternion sphere: any midpoint is 90 degrees off
        # both; keep the first argument to stay deterministic.
        return a.copy()
    return mid / norm


@dataclass(frozen=True)
class GridMeta:
    """Axis-aligned grid parameters behind a task graph."""

    lo: np.ndarray
    hi: np.ndarray
    resolution: tuple
    pitch: np.ndarray

    @property
    def cell_diagonal(self):
        return float(np.linalg.norm(self.pitch))


@dataclass
class TaskGraph:
    """Vertices (translations plus an optional shared orientation) and
    undirected adjacency over them."""

    mode: TaskMode
    translations: np.ndarray
    edges: np.ndarray
    fixed_orientation: np.ndarray | None = None
    meta: GridMeta | None = None
    adjacency: tuple = field(default=None, repr=False)

    def __post_init__(self):
        if self.adjacency is None:
            self.adjacency = _build_adjacency(len(self.translations), self.edges)

    @property
    def n_vertices(self):
        return len(self.translations)

    @property
    def n_edges(self):
        return len(self.edges)

    def task_point(self, i):
        o = None if self.fixed_orientation is None else self.fixed_orientation.copy()
        return TaskPoint(self.translations[i].copy(), o, self.mode)

    def neighbors(self, i):
        return self.adjacency[i]

    def translation_distance(self, i, j):
        return float(np.linalg.norm(self.translations[i] - self.translations[j]))


def _build_adjacency(n, edges):
    buckets = [[] for _ in range(n)]
    for i, j in edges:
        buckets[int(i)].append(int(j))
        buckets[int(j)].append(int(i))
    return tuple(np.array(sorted(b), dtype=int) for b in buckets)


def build_grid(chain, lo, hi, resolution, mode=TaskMode.POSITION,
               fixed_orientation=None, keep_largest_component=True):
    """Task graph over an axis-aligned grid of cell centers.

    Cell centers failing the chain's reach annulus (a cheap necessary
    condition, not a reachability proof) are dropped, remaining cells are
    connected to their axis and diagonal grid neighbors, and by default only
    the largest connected component is kept.

    Args:
        chain: the manipulator the graph is built for.
        lo, hi: grid bounds per task translation axis.
        resolution: cells per axis (int, applied to all axes, or sequence).
        mode: task-space flavor; fixed orientation requires an orientation.
        fixed_orientation: unit quaternion shared by every vertex.
        keep_largest_component: drop all but the largest component.
    """
    dim = 2 if chain.planar else 3
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.shape != (dim,) or hi.shape != (dim,):
        raise ValueError(f"bounds must have {dim} coordinates")
    if np.any(hi <= lo):
        raise ValueError("grid bounds must satisfy lo < hi")
    if np.isscalar(resolution):
        resolution = (int(resolution),) * dim
    resolution = tuple(int(r) for r in resolution)
    if len(resolution) != dim or any(r < 1 for r in resolution):
        raise ValueError("resolution must be positive per axis")
    if mode is TaskMode.FIXED_ORIENTATION:
        if fixed_orientation is None:
            raise ValueError("fixed-orientation graphs need an orientation")
        fixed_orientation = np.asarray(fixed_orientation, dtype=float)
        if abs(np.linalg.norm(fixed_orientation) - 1.0) > 1e-9:
            raise ValueError("fixed orientation must be a unit quaternion")
        if chain.planar and np.max(np.abs(fixed_orientation[1:3])) > 1e-9:
            raise ValueError("planar orientation must rotate about z")
    elif fixed_orientation is not None:
        raise ValueError("orientation given but mode is position-only")

    pitch = (hi - lo) / np.array(resolution, dtype=float)
    center, r_min, r_max = chain.reach(mode, fixed_orientation)
    center = center[:dim]

    axes = [lo[a] + (np.arange(resolution[a]) + 0.5) * pitch[a]
            for a in range(dim)]
    grids = np.meshgrid(*axes, indexing="ij")
    centers = np.column_stack([g.ravel() for g in grids])
    dist = np.linalg.norm(centers - center, axis=1)
    keep = (dist >= r_min) & (dist <= r_max)

    flat_kept = np.where(keep)[0]
    if flat_kept.size == 0:
        raise ValueError("no grid cell lies inside the reach annulus")
    id_of = {int(f): v for v, f in enumerate(flat_kept)}
    strides = np.array(
        [int(np.prod(resolution[a + 1:])) for a in range(dim)], dtype=int)
    multis = np.stack(np.unravel_index(flat_kept, resolution), axis=1)

    offsets = _positive_offsets(dim)
    edges = []
    for v, multi in enumerate(multis):
        for off in offsets:
            nb = multi + off
            if np.any(nb < 0) or np.any(nb >= resolution):
                continue
            flat_nb = int(nb @ strides)
            w = id_of.get(flat_nb)
            if w is not None:
                edges.append((v, w))
    edges = np.array(sorted(edges), dtype=int).reshape(-1, 2)
    translations = centers[flat_kept]

    if keep_largest_component:
        comp = _largest_component(len(flat_kept), edges)
        remap = -np.ones(len(flat_kept), dtype=int)
        remap[comp] = np.arange(len(comp))
        translations = translations[comp]
        edges = remap[edges]
        edges = np.array(sorted((min(i, j), max(i, j)) for i, j in edges
                                if i >= 0 and j >= 0), dtype=int).reshape(-1, 2)

    meta = GridMeta(lo=lo, hi=hi, resolution=resolution, pitch=pitch)
    return TaskGraph(mode=mode, translations=translations, edges=edges,
                     fixed_orientation=fixed_orientation, meta=meta)


def _positive_offsets(dim):
    """Half of the 3^dim - 1 neighbor offsets, one per undirected pair."""
    offs = []
    for raw in np.ndindex(*(3,) * dim):
        off = np.array(raw) - 1
        if np.all(off == 0):
            continue
        nz = off[off != 0]
        if nz[0] > 0:
            offs.append(off)
    return offs


def _largest_component(n, edges):
    """Sorted vertex ids of the largest component (ties: smallest first id)."""
    adjacency = _build_adjacency(n, edges)
    seen = np.zeros(n, dtype=bool)
    best = None
    for start in range(n):
        if seen[start]:
            continue
        comp = [start]
        seen[start] = True
        head = 0
        while head < len(comp):
            for nb in adjacency[comp[head]]:
                if not seen[nb]:
                    seen[nb] = True
                    comp.append(int(nb))
            head += 1
        if best is None or len(comp) > len(best):
            best = comp
    return np.array(sorted(best), dtype=int)


def graph_fingerprint(graph):
    """Content hash of a task graph (vertices, edges, mode, orientation)."""
    import hashlib

    h = hashlib.sha256()
    h.update(graph.mode.value.encode())
    h.update(np.ascontiguousarray(graph.translations, dtype=float).tobytes())
    h.update(np.ascontiguousarray(graph.edges, dtype=np.int64).tobytes())
    if graph.fixed_orientation is not None:
        h.update(np.ascontiguousarray(graph.fixed_orientation,
                                      dtype=float).tobytes())
    return h.hexdigest()


def nearest_neighbors(graph, p, k, candidates=None):
    """Indices of the k nearest vertices to a task point.

    Distances use the translation part only (every vertex shares the graph
    orientation, so the orientation term cannot change the ranking); ties are
    broken by vertex index so results are reproducible.

    Args:
        graph: the task graph to query.
        p: query TaskPoint (or bare translation array).
        k: how many neighbors to return (capped at the candidate count).
        candidates: optional vertex-id array restricting the search.
    """
    t = p.translation if isinstance(p, TaskPoint) else np.asarray(p, dtype=float)
    if candidates is None:
        pool = graph.translations
        ids = None
    else:
        ids = np.asarray(candidates, dtype=int)
        pool = graph.translations[ids]
    if len(pool) == 0:
        return np.array([], dtype=int)
    d = np.linalg.norm(pool - t, axis=1)
    tie = np.arange(len(pool)) if ids is None else ids
    order = np.lexsort((tie, d))[:min(k, len(pool))]
    return order if ids is None else ids[order]
