"""Teleoperation benchmark: waypoint-stream task generators, solver
replay at the command rate, deviation and smoothness metrics, success
judgment, and a machine-readable report."""

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .chain import (Configuration, TaskMode, TaskPoint, config_distance,
                    forward_kinematics, self_collision_free)
from .projection import project
from .query import TeleopState, resolve, teleop_step
from .taskgraph import task_distance

RATE_HZ = 50.0
DURATION_S = 4.0
STREAM_LEN = int(RATE_HZ * DURATION_S)
STALL_WINDOW = 25
STALL_MOTION = 1e-5
TASK_KINDS = ("random_line", "self_crossing_line", "random_circle",
              "partial_circle")
SOLVER_NAMES = ("expansion-grr", "newton-ik")


@dataclass(frozen=True)
class Workspace:
    """Where task generators may sample: grid box plus reach annulus."""

    lo: np.ndarray
    hi: np.ndarray
    r_min: float
    r_max: float

    @classmethod
    def from_graph(cls, chain, graph):
        _, r_min, r_max = chain.reach(graph.mode, graph.fixed_orientation)
        return cls(graph.meta.lo.copy(), graph.meta.hi.copy(),
                   float(r_min), float(r_max))


@dataclass
class WaypointStream:
    """A fixed-rate target stream; always rate × duration points."""

    waypoints: list
    rate: float = RATE_HZ
    duration: float = DURATION_S
    task_kind: str = ""
    rng_seed: int = -1

    def __post_init__(self):
        expected = int(round(self.rate * self.duration))
        if len(self.waypoints) != expected:
            raise ValueError(
                f"stream must hold {expected} waypoints, got "
                f"{len(self.waypoints)}")


@dataclass
class TrialResult:
    """One solver replay of one stream."""

    input_path: list
    produced_path_t: list
    produced_path_q: list
    deviation: float | None = None
    smoothness: float | None = None
    success: bool = False
    failure_reason: str | None = None
    task_kind: str = ""
    solver: str = ""
    rng_seed: int = -1
    wall_ms: float = 0.0


def _rng_of(rng):
    """Accept either an integer seed (recorded on the stream) or a
    ready-made generator (seed recorded as -1)."""
    if isinstance(rng, (int, np.integer)):
        return np.random.default_rng(int(rng)), int(rng)
    return rng, -1


def _sample_annulus(workspace, rng, margin=0.05):
    pad = margin * workspace.r_max
    lo_r = workspace.r_min + pad if workspace.r_min > 0 else 0.0
    hi_r = workspace.r_max - pad
    while True:
        t = rng.uniform(workspace.lo, workspace.hi)
        if lo_r <= np.linalg.norm(t) <= hi_r:
            return t


def gen_random_line(workspace, rng):
    """Uniform sweep between two random reachable points."""
    rng, seed = _rng_of(rng)
    a = _sample_annulus(workspace, rng)
    b = _sample_annulus(workspace, rng)
    pts = np.linspace(a, b, STREAM_LEN)
    return WaypointStream([TaskPoint(t.copy()) for t in pts],
                          task_kind="random_line", rng_seed=seed)


def gen_self_crossing_line(workspace, chain, rng):
    """Line through the base: endpoints reachable, opposite and colinear,
    so the stream midpoint passes (arbitrarily close to) the base axis."""
    rng, seed = _rng_of(rng)
    _, r_min, r_max = chain.reach()
    pad = 0.05 * r_max
    theta = rng.uniform(-np.pi, np.pi)
    u = np.array([np.cos(theta), np.sin(theta)])
    r = rng.uniform(max(0.3 * r_max, r_min + pad), 0.93 * r_max)
    pts = np.linspace(r * u, -r * u, STREAM_LEN)
    return WaypointStream([TaskPoint(t.copy()) for t in pts],
                          task_kind="self_crossing_line", rng_seed=seed)


def _circle_points(center, radius, phi0, direction):
    angles = phi0 + direction * np.linspace(0.0, 2.0 * np.pi, STREAM_LEN,
                                            endpoint=False)
    arc = np.stack([np.cos(angles), np.sin(angles)], axis=1) * radius
    return center + arc


def gen_random_circle(workspace, rng):
    """Closed circular loop lying entirely inside the reachable annulus."""
    rng, seed = _rng_of(rng)
    pad = 0.05 * workspace.r_max
    lo_r = workspace.r_min + pad if workspace.r_min > 0 else 0.0
    while True:
        center = rng.uniform(workspace.lo, workspace.hi)
        radius = rng.uniform(0.1, 0.45) * workspace.r_max
        d = np.linalg.norm(center)
        if d + radius <= workspace.r_max - pad and (
                lo_r == 0.0 or d - radius >= lo_r):
            break
    phi0 = rng.uniform(-np.pi, np.pi)
    direction = 1.0 if rng.uniform() < 0.5 else -1.0
    pts = _circle_points(center, radius, phi0, direction)
    return WaypointStream([TaskPoint(t.copy()) for t in pts],
                          task_kind="random_circle", rng_seed=seed)


def gen_partial_circle(workspace, chain, rng):
    """Closed loop that leaves the reachable space for 10-40% of its
    points, forcing the solver to park and re-acquire."""
    rng, seed = _rng_of(rng)
    _, r_min, r_max = chain.reach()
    pad = 0.05 * r_max
    lo_r = r_min + pad if r_min > 0 else 0.0
    while True:
        theta = rng.uniform(-np.pi, np.pi)
        u = np.array([np.cos(theta), np.sin(theta)])
        center = u * rng.uniform(0.4, 0.8) * r_max
        radius = rng.uniform(0.25, 0.6) * r_max
        if lo_r > 0.0 and np.linalg.norm(center) - radius < lo_r:
            continue
        # Start the sweep at the circle point nearest the base: the loop
        # then begins and ends deep in the reachable arc, so finishing the
        # trial requires re-acquiring the input after the unreachable arc,
        # not just parking there.
        phi0 = np.arctan2(-u[1], -u[0])
        pts = _circle_points(center, radius, phi0,
                             1.0 if rng.uniform() < 0.5 else -1.0)
        beyond = np.mean(np.linalg.norm(pts, axis=1) > r_max)
        if 0.12 <= beyond <= 0.38:
            break
    return WaypointStream([TaskPoint(t.copy()) for t in pts],
                          task_kind="partial_circle", rng_seed=seed)


def _translations(path):
    out = []
    for p in path:
        out.append(np.asarray(p.translation if isinstance(p, TaskPoint)
                              else p, dtype=float))
    return out


def dtw_deviation(input_path, produced_path, weights=None):
    """Average task distance between dynamically time-warped pairs.

    Unit-slope dynamic time warping: each cell extends the best of its
    diagonal, upper, and left predecessor; the deviation is the summed
    matched cost divided by the number of matched pairs on the optimal
    alignment (backtracked deterministically, diagonal preferred).
    """
    a = input_path
    b = produced_path
    if len(a) == 0 or len(b) == 0:
        raise ValueError("paths must be nonempty")
    a_pts = [p if isinstance(p, TaskPoint) else TaskPoint(np.asarray(p))
             for p in a]
    b_pts = [p if isinstance(p, TaskPoint) else TaskPoint(np.asarray(p))
             for p in b]
    n, m = len(a_pts), len(b_pts)
    cost = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            cost[i, j] = task_distance(a_pts[i], b_pts[j], weights)
    acc = np.full((n, m), np.inf)
    acc[0, 0] = cost[0, 0]
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = acc[i - 1, j - 1]
            if i > 0:
                best = min(best, acc[i - 1, j])
            if j > 0:
                best = min(best, acc[i, j - 1])
            acc[i, j] = cost[i, j] + best
    # Count matched pairs along one optimal path, diagonal first.
    i, j = n - 1, m - 1
    pairs = 1
    while i > 0 or j > 0:
        if i > 0 and j > 0 and acc[i - 1, j - 1] <= acc[i - 1, j] \
                and acc[i - 1, j - 1] <= acc[i, j - 1]:
            i, j = i - 1, j - 1
        elif i > 0 and (j == 0 or acc[i - 1, j] <= acc[i, j - 1]):
            i -= 1
        else:
            j -= 1
        pairs += 1
    return float(acc[n - 1, m - 1] / pairs)


def path_smoothness(chain, produced_q, produced_t, weights=None):
    """Mean configuration-per-task step ratio along a produced path.

    Steps with task motion under 1e-9 (parking) are skipped; a path with
    no measurable task motion at all has no defined smoothness.
    """
    ts = _translations(produced_t)
    ratios = []
    for k in range(1, len(ts)):
        d_p = task_distance(TaskPoint(ts[k - 1]), TaskPoint(ts[k]), weights)
        if d_p < 1e-9:
            continue
        d_q = config_distance(chain, produced_q[k - 1], produced_q[k])
        ratios.append(d_q / d_p)
    if not ratios:
        raise ValueError("path is stationary; smoothness undefined")
    return float(np.mean(ratios))


def judge_success(trial, goal_tolerance, *, chain, workspace, pitch):
    """Success verdict for one replay.

    Success requires reaching the final feasible input waypoint within
    tolerance, never emitting a self-colliding configuration, and never
    stalling: more than STALL_WINDOW consecutive steps of sub-STALL_MOTION
    output motion while the feasible input moved more than half a grid
    pitch is a stall.

    Returns:
        (success, reason) with reason in {"local-minima", "self-collision",
        "stalled"} or None.
    """
    ins = _translations(trial.input_path)
    outs = _translations(trial.produced_path_t)
    feasible = [workspace.r_min - 1e-12 <= np.linalg.norm(t)
                <= workspace.r_max + 1e-12 for t in ins]
    if not any(feasible):
        raise ValueError("input stream has no feasible waypoint")

    for q in trial.produced_path_q:
        if not self_collision_free(chain, q):
            return False, "self-collision"

    run = 0
    anchor = None
    for k in range(1, len(outs)):
        moved_out = np.linalg.norm(outs[k] - outs[k - 1])
        if moved_out < STALL_MOTION and feasible[k]:
            if run == 0:
                anchor = ins[k - 1]
            run += 1
            if run > STALL_WINDOW and \
                    np.linalg.norm(ins[k] - anchor) > pitch / 2.0:
                return False, "stalled"
        else:
            run = 0

    final_feasible = max(k for k, f in enumerate(feasible) if f)
    err = np.linalg.norm(outs[-1] - ins[final_feasible])
    if err > goal_tolerance:
        return False, "local-minima"
    return True, None


def _initial_config(chain, roadmap, graph, p0):
    result = resolve(roadmap, graph, chain, p0)
    if result.success:
        return result.q
    from .query import _nearest_assigned
    v = _nearest_assigned(roadmap, graph, p0)
    if v is None:
        raise ValueError("roadmap has no assignments to start from")
    return roadmap.assignment(v)


def _replay_grr(chain, roadmap, graph, stream):
    state = TeleopState(_initial_config(chain, roadmap, graph,
                                        stream.waypoints[0]))
    qs, ts = [], []
    for p in stream.waypoints:
        q, state = teleop_step(state, p, roadmap, graph, chain)
        qs.append(q)
        ts.append(forward_kinematics(chain, q, graph.mode).translation)
    return qs, ts


def _replay_newton(chain, roadmap, graph, stream):
    """Per-waypoint projection from the previous output; holds on failure."""
    q = _initial_config(chain, roadmap, graph, stream.waypoints[0])
    qs, ts = [], []
    for p in stream.waypoints:
        result = project(chain, p, q, roadmap.projection,
                         weights=roadmap.weights)
        if result.success:
            q = result.q
        qs.append(q)
        ts.append(forward_kinematics(chain, q, graph.mode).translation)
    return qs, ts


_SOLVERS = {
    "expansion-grr": _replay_grr,
    "newton-ik": _replay_newton,
}

_GENERATORS = {
    "random_line": lambda ws, chain, rng: gen_random_line(ws, rng),
    "self_crossing_line": gen_self_crossing_line,
    "random_circle": lambda ws, chain, rng: gen_random_circle(ws, rng),
    "partial_circle": gen_partial_circle,
}


def _trial_seed(master, kind_index, trial):
    return int(master) * 1_000_003 + kind_index * 10_007 + trial


def run_benchmark(chain, roadmap, solvers=SOLVER_NAMES, tasks=TASK_KINDS,
                  trials=20, seed=0, goal_tolerance=None, out_path=None):
    """Replay generated streams through each solver and aggregate.

    Every solver sees the identical stream per trial. Mean deviation and
    smoothness are aggregated both over trials where all solvers succeeded
    and unfiltered over each solver's own successes.

    Returns:
        report dict with "trials" (one record per replay), "aggregate"
        (per task × solver), and "config"; written as line-delimited
        records plus one aggregate record when out_path is given.
    """
    graph = roadmap.graph
    if graph.mode != TaskMode.POSITION:
        raise ValueError("benchmark streams carry positions only; "
                         "fixed-orientation roadmaps are not replayable")
    if len(graph.meta.lo) != 2:
        raise ValueError("task generators are planar; spatial roadmaps "
                         "are exercised through build/eval instead")
    workspace = Workspace.from_graph(chain, graph)
    if goal_tolerance is None:
        goal_tolerance = graph.meta.cell_diagonal
    pitch = float(np.min(graph.meta.pitch))
    unknown = set(solvers) - set(_SOLVERS)
    if unknown:
        raise ValueError(f"unknown solvers: {sorted(unknown)}")
    unknown = set(tasks) - set(_GENERATORS)
    if unknown:
        raise ValueError(f"unknown tasks: {sorted(unknown)}")

    results = {kind: {name: [] for name in solvers} for kind in tasks}
    for kind_index, kind in enumerate(tasks):
        gen = _GENERATORS[kind]
        for trial in range(trials):
            stream = gen(workspace, chain,
                         _trial_seed(seed, kind_index, trial))
            for name in solvers:
                t0 = time.perf_counter()
                qs, ts = _SOLVERS[name](chain, roadmap, graph, stream)
                wall_ms = (time.perf_counter() - t0) * 1e3
                res = TrialResult(stream.waypoints, ts, qs,
                                  task_kind=kind, solver=name,
                                  rng_seed=stream.rng_seed, wall_ms=wall_ms)
                res.success, res.failure_reason = judge_success(
                    res, goal_tolerance, chain=chain, workspace=workspace,
                    pitch=pitch)
                res.deviation = dtw_deviation(stream.waypoints, ts,
                                              roadmap.weights)
                try:
                    res.smoothness = path_smoothness(chain, qs, ts,
                                                     roadmap.weights)
                except ValueError:
                    res.smoothness = None
                results[kind][name].append(res)

    records = []
    aggregate = {}
    for kind in tasks:
        aggregate[kind] = {}
        per_solver = results[kind]
        all_ok = [all(per_solver[name][i].success for name in solvers)
                  for i in range(trials)]
        for name in solvers:
            rs = per_solver[name]
            records.extend({
                "task_kind": r.task_kind, "solver": r.solver,
                "rng_seed": r.rng_seed, "success": r.success,
                "failure_reason": r.failure_reason,
                "deviation": r.deviation, "smoothness": r.smoothness,
                "wall_ms": round(r.wall_ms, 3),
            } for r in rs)

            def _mean(values):
                values = [v for v in values if v is not None]
                return float(np.mean(values)) if values else None

            aggregate[kind][name] = {
                "success_rate": float(np.mean([r.success for r in rs])),
                "n_all_succeed": int(np.sum(all_ok)),
                "deviation_all_succeed": _mean(
                    [r.deviation for r, ok in zip(rs, all_ok) if ok]),
                "smoothness_all_succeed": _mean(
                    [r.smoothness for r, ok in zip(rs, all_ok) if ok]),
                "deviation_unfiltered": _mean(
                    [r.deviation for r in rs if r.success]),
                "smoothness_unfiltered": _mean(
                    [r.smoothness for r in rs if r.success]),
            }

    report = {
        "trials": records,
        "aggregate": aggregate,
        "config": {
            "tasks": list(tasks), "solvers": list(solvers),
            "trials": trials, "seed": seed,
            "goal_tolerance": goal_tolerance,
            "stall_window": STALL_WINDOW, "stall_motion": STALL_MOTION,
            "rate_hz": RATE_HZ, "duration_s": DURATION_S,
        },
    }
    if out_path is not None:
        with open(out_path, "w") as fh:
            for record in records:
                fh.write(json.dumps(record) + "\n")
            fh.write(json.dumps({"aggregate": aggregate,
                                 "config": report["config"]}) + "\n")
    return report
