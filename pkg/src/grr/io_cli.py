"""Robot spec files, roadmap persistence, and the command-line surface.

Robot specs are hand-editable YAML (one chain, its task mode, and the
cyclic seed path). Roadmaps are machine-written JSON keyed to the robot by
hash; all floats survive the round trip exactly, and rebuilding the same
roadmap twice yields byte-identical files.
"""

import hashlib
import json
import sys
import time

import click
import numpy as np
import yaml

from .chain import (Capsule, Configuration, KinematicChain, RevoluteJoint,
                    TaskMode, TaskPoint, forward_kinematics,
                    self_collision_free)
from .grr import (BuildReport, ContinuityParams, ResolutionRoadmap,
                  connectivity, global_expansion, seed_from_cycle,
                  smoothness)
from .projection import ProjectionParams, project
from .taskgraph import (TaskMetricWeights, build_grid, graph_fingerprint,
                        nearest_neighbors)
from .transforms import Transform

ROBOT_FORMAT = "grr-robot/1"
ROADMAP_FORMAT = "grr-roadmap/1"


class SpecError(ValueError):
    """A robot or roadmap file failed validation; message names the field."""


def robot_hash(chain):
    """Stable content hash of a chain's canonical description."""
    blob = json.dumps(chain.canonical_dict(), sort_keys=True,
                      separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


# ---- robot specs ------------------------------------------------------------------


def _field(mapping, key, where):
    if key not in mapping:
        raise SpecError(f"{where}: missing required field '{key}'")
    return mapping[key]


def _vector(value, length, where):
    try:
        v = np.asarray(value, dtype=float)
    except (TypeError, ValueError):
        raise SpecError(f"{where}: expected {length} numbers") from None
    if v.shape != (length,):
        raise SpecError(f"{where}: expected {length} numbers, got {value!r}")
    return v


def save_robot_spec(model, path):
    """Write a RobotModel's chain, mode, and seed cycle as YAML."""
    chain = model.chain
    doc = {
        "format": ROBOT_FORMAT,
        "name": model.name,
        "task_mode": model.mode.value,
        "fixed_orientation": (None if model.fixed_orientation is None
                              else [float(x) for x in model.fixed_orientation]),
        **chain.canonical_dict(),
        "seed_cycle": [[float(x) for x in q.values] for q in model.seed_cycle],
    }
    with open(path, "w") as fh:
        yaml.safe_dump(doc, fh, sort_keys=False)


def load_robot_spec(path):
    """Parse and validate a robot spec file.

    Returns:
        RobotModel (workspace and resolution unset; those arrive as build
        flags, not robot properties).

    Raises:
        SpecError: malformed document, with the offending field named.
    """
    from .robots import RobotModel

    with open(path) as fh:
        doc = yaml.safe_load(fh)
    if not isinstance(doc, dict):
        raise SpecError(f"{path}: not a mapping")
    fmt = _field(doc, "format", path)
    if fmt != ROBOT_FORMAT:
        raise SpecError(f"{path}: unsupported format {fmt!r} "
                        f"(expected {ROBOT_FORMAT!r})")
    name = str(_field(doc, "name", path))

    raw_joints = _field(doc, "joints", path)
    if not isinstance(raw_joints, list) or not raw_joints:
        raise SpecError(f"{path}: 'joints' must be a nonempty list")
    joints = []
    for idx, rj in enumerate(raw_joints):
        where = f"{path}: joints[{idx}]"
        axis = _vector(_field(rj, "axis", where), 3, f"{where}.axis")
        offset = _vector(_field(rj, "offset", where), 3, f"{where}.offset")
        limits = rj.get("limits")
        if limits is None:
            joints.append(RevoluteJoint(axis, offset))
        else:
            lim = _vector(limits, 2, f"{where}.limits")
            joints.append(RevoluteJoint(axis, offset, float(lim[0]),
                                        float(lim[1])))

    links = []
    for idx, rl in enumerate(doc.get("links") or []):
        where = f"{path}: links[{idx}]"
        links.append(Capsule(
            _vector(_field(rl, "p0", where), 3, f"{where}.p0"),
            _vector(_field(rl, "p1", where), 3, f"{where}.p1"),
            float(_field(rl, "radius", where))))
    if links and len(links) != len(joints):
        raise SpecError(f"{path}: {len(links)} links for {len(joints)} "
                        f"joints (need one capsule per joint, or none)")

    def _transform(key):
        raw = doc.get(key)
        if raw is None:
            return None
        where = f"{path}: {key}"
        R = np.asarray(_field(raw, "R", where), dtype=float)
        if R.shape != (3, 3):
            raise SpecError(f"{where}.R: expected a 3x3 matrix")
        return Transform(R, _vector(_field(raw, "t", where), 3,
                                    f"{where}.t"))

    try:
        chain = KinematicChain(joints, links, base_pose=_transform("base_pose"),
                               ee_offset=_transform("ee_offset"),
                               planar=bool(doc.get("planar", False)))
    except ValueError as exc:
        raise SpecError(f"{path}: {exc}") from None

    mode_raw = _field(doc, "task_mode", path)
    try:
        mode = TaskMode(mode_raw)
    except ValueError:
        raise SpecError(f"{path}: unknown task_mode {mode_raw!r}") from None
    fixed = doc.get("fixed_orientation")
    if mode is TaskMode.FIXED_ORIENTATION:
        if fixed is None:
            raise SpecError(f"{path}: task_mode {mode.value} requires "
                            f"fixed_orientation")
        fixed = _vector(fixed, 4, f"{path}: fixed_orientation")
    elif fixed is not None:
        fixed = _vector(fixed, 4, f"{path}: fixed_orientation")

    raw_cycle = _field(doc, "seed_cycle", path)
    if not isinstance(raw_cycle, list) or not raw_cycle:
        raise SpecError(f"{path}: 'seed_cycle' must be a nonempty list")
    cycle = []
    for idx, row in enumerate(raw_cycle):
        # Configuration() rather than make_config(): wrapping would nudge
        # in-range angles by an ulp and break the exact round trip.
        v = _vector(row, len(joints), f"{path}: seed_cycle[{idx}]")
        cycle.append(Configuration(v))

    return RobotModel(name=name, chain=chain, mode=mode, seed_cycle=cycle,
                      fixed_orientation=fixed)


# ---- roadmap persistence -----------------------------------------------------------


def _roadmap_doc(roadmap):
    graph = roadmap.graph
    meta = graph.meta
    if meta is None:
        raise SpecError("roadmap graph carries no grid metadata; only "
                        "grid-built roadmaps are persistable")
    weights = roadmap.weights or TaskMetricWeights()
    report = roadmap.build_report or BuildReport()
    vertices = []
    for i in range(graph.n_vertices):
        row = [int(i), [float(x) for x in graph.translations[i]]]
        row.append([float(x) for x in roadmap.q_values[i]]
                   if roadmap.assigned[i] else None)
        vertices.append(row)
    return {
        "format": ROADMAP_FORMAT,
        "robot_hash": robot_hash(roadmap.chain),
        "mode": graph.mode.value,
        "fixed_orientation": (None if graph.fixed_orientation is None else
                              [float(x) for x in graph.fixed_orientation]),
        "grid": {
            "lo": [float(x) for x in meta.lo],
            "hi": [float(x) for x in meta.hi],
            "resolution": [int(r) for r in meta.resolution],
        },
        "graph_fingerprint": roadmap.task_graph_ref or graph_fingerprint(graph),
        "k": int(roadmap.k),
        "weights": {"translation": float(weights.translation),
                    "orientation": float(weights.orientation)},
        "continuity": {"c": float(roadmap.continuity.c),
                       "epsilon": float(roadmap.continuity.epsilon)},
        "projection": {
            "max_iterations": int(roadmap.projection.max_iterations),
            "tolerance": float(roadmap.projection.tolerance),
            "damping": float(roadmap.projection.damping),
            "step_clamp": float(roadmap.projection.step_clamp),
        },
        "vertices": vertices,
        "resolved_edges": [[int(i), int(j)]
                           for i, j in roadmap.resolved_edges],
        # build_seconds is wall-clock noise; it stays out of the file so
        # identical builds stay byte-identical.
        "build_report": {
            "n_vertices": report.n_vertices,
            "n_edges": report.n_edges,
            "seed_vertices": [int(v) for v in report.seed_vertices],
            "assigned_count": report.assigned_count,
            "failed_vertices": [int(v) for v in report.failed_vertices],
            "pass1_failed": [int(v) for v in report.pass1_failed],
            "retry_assigned": report.retry_assigned,
            "edges_checked": report.edges_checked,
            "edges_passed": report.edges_passed,
            "repair_rounds": report.repair_rounds,
            "repair_reassigned": report.repair_reassigned,
            "k": report.k,
        },
    }


def save_roadmap(roadmap, path):
    """Serialize a roadmap; floats keep their exact values."""
    doc = _roadmap_doc(roadmap)
    with open(path, "w") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_roadmap(path, chain):
    """Load a roadmap and bind it to the chain it was built for.

    The task graph is rebuilt from the stored grid parameters and verified
    against the stored fingerprint and vertex table, so a loaded roadmap
    behaves identically to the one that was saved.

    Raises:
        SpecError: wrong format version, robot hash mismatch, or a stored
            vertex table that does not match the rebuilt grid.
    """
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SpecError(f"{path}: not valid JSON ({exc})") from None
    for key in ("format", "robot_hash", "mode", "grid", "vertices",
                "resolved_edges", "k", "continuity", "projection",
                "graph_fingerprint"):
        if key not in doc:
            raise SpecError(f"{path}: missing section '{key}'")
    if doc["format"] != ROADMAP_FORMAT:
        raise SpecError(f"{path}: unsupported format {doc['format']!r} "
                        f"(expected {ROADMAP_FORMAT!r})")
    have = robot_hash(chain)
    if doc["robot_hash"] != have:
        raise SpecError(
            f"{path}: roadmap was built for robot {doc['robot_hash'][:12]}…, "
            f"got chain {have[:12]}…")

    mode = TaskMode(doc["mode"])
    fixed = (None if doc["fixed_orientation"] is None
             else np.asarray(doc["fixed_orientation"], dtype=float))
    grid = doc["grid"]
    graph = build_grid(chain, grid["lo"], grid["hi"],
                       tuple(grid["resolution"]), mode,
                       fixed_orientation=fixed)
    if graph_fingerprint(graph) != doc["graph_fingerprint"]:
        raise SpecError(f"{path}: rebuilt task graph does not match the "
                        f"stored fingerprint")

    vertices = doc["vertices"]
    if len(vertices) != graph.n_vertices:
        raise SpecError(f"{path}: vertex table has {len(vertices)} rows, "
                        f"rebuilt grid has {graph.n_vertices}")
    q_values = np.zeros((graph.n_vertices, chain.n_joints))
    assigned = np.zeros(graph.n_vertices, dtype=bool)
    for row in vertices:
        i, translation, q = row
        if not np.array_equal(np.asarray(translation, dtype=float),
                              graph.translations[i]):
            raise SpecError(f"{path}: vertex {i} translation differs from "
                            f"the rebuilt grid")
        if q is not None:
            q_values[i] = q
            assigned[i] = True

    report = BuildReport(**doc.get("build_report", {}))
    weights = None
    if doc.get("weights") is not None:
        weights = TaskMetricWeights(doc["weights"]["translation"],
                                    doc["weights"]["orientation"])
    roadmap = ResolutionRoadmap(
        graph, q_values, assigned,
        np.asarray(doc["resolved_edges"], dtype=int).reshape(-1, 2),
        chain=chain, weights=weights,
        continuity=ContinuityParams(**doc["continuity"]),
        projection=ProjectionParams(**doc["projection"]),
        k=int(doc["k"]), build_report=report,
        task_graph_ref=doc["graph_fingerprint"])
    return roadmap


# ---- CLI ---------------------------------------------------------------------------


def _parse_floats(text, what):
    try:
        return [float(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise click.ClickException(f"{what}: expected comma-separated "
                                   f"numbers, got {text!r}") from None


def _parse_ints(text, what):
    try:
        return [int(x) for x in text.split(",") if x.strip() != ""]
    except ValueError:
        raise click.ClickException(f"{what}: expected comma-separated "
                                   f"integers, got {text!r}") from None


def _load_pair(roadmap_path, robot_path):
    try:
        model = load_robot_spec(robot_path)
        roadmap = load_roadmap(roadmap_path, model.chain)
    except (SpecError, OSError) as exc:
        raise click.ClickException(str(exc)) from None
    return model, roadmap


def _table_row(name, roadmap, seconds):
    conn = connectivity(roadmap) * 100.0
    smooth = smoothness(roadmap)
    return (f"{name:18s} vertices={roadmap.graph.n_vertices:6d} "
            f"connectivity={conn:7.2f}% smoothness={smooth:7.3f} "
            f"build={seconds:7.2f}s")


@click.group()
def main():
    """Global redundancy resolution roadmaps: build, inspect, serve."""


@main.command()
@click.argument("robot_spec", type=click.Path(exists=True, dir_okay=False))
@click.option("--workspace", required=True,
              help="Box as lo,...,hi,... (e.g. '-5,-5,5,5').")
@click.option("--resolution", required=True,
              help="Cells per axis (e.g. '36,36').")
@click.option("--k", type=int, default=None,
              help="Neighbor count (default 2*dim(T)+2).")
@click.option("--c", "c_param", type=float, default=None,
              help="Continuity deviation factor (default 0.5*sqrt(dim C)).")
@click.option("--epsilon", type=float, default=None,
              help="Continuity acceptance gap (default 0.05*sqrt(dim C)).")
@click.option("--single-seed", is_flag=True,
              help="Seed from one random configuration instead of the "
                   "robot's cyclic seed path.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="RNG seed for --single-seed.")
@click.option("-o", "--output", required=True,
              type=click.Path(dir_okay=False, writable=True))
def build(robot_spec, workspace, resolution, k, c_param, epsilon,
          single_seed, seed, output):
    """Build a roadmap over a grid workspace and save it."""
    try:
        model = load_robot_spec(robot_spec)
    except (SpecError, OSError) as exc:
        raise click.ClickException(str(exc)) from None
    chain = model.chain
    dim = 2 if chain.planar else 3
    box = _parse_floats(workspace, "--workspace")
    if len(box) != 2 * dim:
        raise click.ClickException(
            f"--workspace: expected {2 * dim} numbers for a "
            f"{dim}-d task space, got {len(box)}")
    res = _parse_ints(resolution, "--resolution")
    if len(res) == 1:
        res = res * dim
    if len(res) != dim:
        raise click.ClickException(
            f"--resolution: expected {dim} integers, got {len(res)}")

    graph = build_grid(chain, box[:dim], box[dim:], tuple(res), model.mode,
                       fixed_orientation=model.fixed_orientation)
    continuity = None
    if c_param is not None or epsilon is not None:
        defaults = ContinuityParams.for_chain(chain)
        continuity = ContinuityParams(
            c_param if c_param is not None else defaults.c,
            epsilon if epsilon is not None else defaults.epsilon)

    if single_seed:
        seeds = _single_random_seed(chain, model.mode, graph, seed)
    else:
        seeds = seed_from_cycle(chain, model.seed_cycle, graph)
    t0 = time.perf_counter()
    roadmap = global_expansion(chain, graph, seeds, k=k,
                               continuity=continuity)
    seconds = time.perf_counter() - t0
    save_roadmap(roadmap, output)
    click.echo(_table_row(model.name, roadmap, seconds))


def _single_random_seed(chain, mode, graph, seed):
    rng = np.random.default_rng(seed)
    for _ in range(1000):
        q = chain.random_config(rng)
        if not self_collision_free(chain, q):
            continue
        p = forward_kinematics(chain, q, mode)
        v = int(nearest_neighbors(graph, p, 1)[0])
        result = project(chain, graph.task_point(v), q)
        if result.success:
            return {v: result.q}
    raise click.ClickException("could not seed a random configuration "
                               "after 1000 attempts")


@main.command("eval")
@click.argument("roadmap_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--robot", "robot_path", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Robot spec the roadmap was built from.")
@click.option("--sample", type=int, default=50, show_default=True,
              help="Resolved edges to re-verify.")
@click.option("--seed", type=int, default=0, show_default=True)
def eval_cmd(roadmap_path, robot_path, sample, seed):
    """Recompute roadmap metrics and re-verify a sample of edges."""
    from .grr import is_continuous

    model, roadmap = _load_pair(roadmap_path, robot_path)
    graph = roadmap.graph
    chain = model.chain
    click.echo(_table_row(model.name, roadmap, 0.0))
    edges = roadmap.resolved_edges
    if len(edges) == 0:
        raise click.ClickException("roadmap has no resolved edges")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(edges), size=min(sample, len(edges)),
                       replace=False)
    bad = 0
    for idx in picks:
        i, j = (int(v) for v in edges[idx])
        ok = is_continuous(chain, graph.task_point(i), graph.task_point(j),
                           Configuration(roadmap.q_values[i]),
                           Configuration(roadmap.q_values[j]),
                           roadmap.continuity, projection=roadmap.projection,
                           weights=roadmap.weights)
        bad += not ok
    click.echo(f"re-verified {len(picks)} resolved edges: "
               f"{len(picks) - bad} pass, {bad} fail")
    if bad:
        raise click.ClickException("resolved edges failed re-verification")


@main.command()
@click.argument("roadmap_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--robot", "robot_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--tasks", default=None,
              help="Comma-separated task kinds (default: all four).")
@click.option("--trials", type=int, default=20, show_default=True)
@click.option("--solvers", default=None,
              help="Comma-separated solver names (default: both).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", default=None,
              type=click.Path(dir_okay=False, writable=True),
              help="Line-delimited trial records plus aggregate.")
def bench(roadmap_path, robot_path, tasks, trials, solvers, seed, output):
    """Replay generated waypoint streams through the teleop solvers."""
    from .bench import SOLVER_NAMES, TASK_KINDS, run_benchmark

    model, roadmap = _load_pair(roadmap_path, robot_path)
    task_list = tuple(tasks.split(",")) if tasks else TASK_KINDS
    solver_list = tuple(solvers.split(",")) if solvers else SOLVER_NAMES
    try:
        report = run_benchmark(model.chain, roadmap, solvers=solver_list,
                               tasks=task_list, trials=trials, seed=seed,
                               out_path=output)
    except ValueError as exc:
        raise click.ClickException(str(exc)) from None
    for kind, by_solver in report["aggregate"].items():
        for name, agg in by_solver.items():
            dev = agg["deviation_all_succeed"]
            smooth = agg["smoothness_all_succeed"]
            click.echo(
                f"{kind:20s} {name:14s} "
                f"success={agg['success_rate'] * 100.0:6.1f}% "
                f"deviation={'   n/a' if dev is None else f'{dev:.4f}'} "
                f"smoothness={'   n/a' if smooth is None else f'{smooth:.4f}'}")


@main.command()
@click.argument("roadmap_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--robot", "robot_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--port", type=int, default=8765, show_default=True)
@click.option("--tick-rate", type=float, default=50.0, show_default=True)
def serve(roadmap_path, robot_path, port, tick_rate):
    """Run the teleoperation service until interrupted."""
    from .teleop_service import serve as run_service

    model, roadmap = _load_pair(roadmap_path, robot_path)
    run_service(model.chain, roadmap, port=port, tick_rate=tick_rate)


@main.command()
@click.argument("roadmap_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--robot", "robot_path", required=True,
              type=click.Path(exists=True, dir_okay=False))
@click.option("--point", required=True,
              help="Task point coordinates (e.g. '2.5,0.4').")
def resolve(roadmap_path, robot_path, point):
    """One-shot IK: resolve a task point against the roadmap."""
    from .query import resolve as resolve_point

    model, roadmap = _load_pair(roadmap_path, robot_path)
    graph = roadmap.graph
    coords = _parse_floats(point, "--point")
    dim = len(graph.meta.lo)
    if len(coords) != dim:
        raise click.ClickException(f"--point: expected {dim} coordinates")
    target = TaskPoint(np.asarray(coords), graph.fixed_orientation,
                       graph.mode)
    result = resolve_point(roadmap, graph, model.chain, target)
    if not result.success:
        raise click.ClickException(f"resolution failed ({result.reason})")
    click.echo(" ".join(repr(float(x)) for x in result.q.values))


if __name__ == "__main__":
    sys.exit(main())
