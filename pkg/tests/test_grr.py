import numpy as np
import pytest

from grr.chain import Configuration, TaskMode, TaskPoint, forward_kinematics
from grr.grr import (
    ContinuityParams,
    ResolutionRoadmap,
    connectivity,
    default_k,
    global_expansion,
    is_continuous,
    project_neighbors,
    seed_from_cycle,
    smoothness,
)
from grr.projection import ProjectionParams, project
from grr.robots import planar3_cycle, planar_3link
from grr.taskgraph import TaskGraph, build_grid, task_distance
from test_chain import planar_chain


def two_joint_square_graph():
    """Unit square of task vertices with hand-checkable assignments."""
    chain = planar_chain([1.0, 1.0], limits=(-3.0, 3.0))
    graph = TaskGraph(
        TaskMode.POSITION,
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
        np.array([[0, 1], [0, 2], [1, 3], [2, 3]]))
    q_values = np.array([[0.0, 0.0], [0.5, 0.0], [0.0, 0.5], [0.5, 0.5]])
    return chain, graph, q_values


# ---- continuity parameters --------------------------------------------------------


def test_continuity_defaults_scale_with_dof():
    params = ContinuityParams.for_chain(planar_3link())
    assert params.c == pytest.approx(0.5 * np.sqrt(3.0))
    assert params.epsilon == pytest.approx(0.05 * np.sqrt(3.0))


def test_continuity_params_validate():
    with pytest.raises(ValueError):
        ContinuityParams(c=0.5, epsilon=0.1)
    with pytest.raises(ValueError):
        ContinuityParams(c=1.0, epsilon=0.0)


def test_default_k_by_task_dimension():
    planar = TaskGraph(TaskMode.POSITION, np.zeros((2, 2)),
                       np.array([[0, 1]]))
    assert default_k(planar) == 6
    planar_fixed = TaskGraph(TaskMode.FIXED_ORIENTATION, np.zeros((2, 2)),
                             np.array([[0, 1]]),
                             fixed_orientation=np.array([1.0, 0, 0, 0]))
    assert default_k(planar_fixed) == 8
    spatial = TaskGraph(TaskMode.POSITION, np.zeros((2, 3)),
                        np.array([[0, 1]]))
    assert default_k(spatial) == 8


# ---- continuity check -------------------------------------------------------------


def test_is_continuous_accepts_identical_configs():
    chain = planar_chain([1.0, 1.0])
    q = Configuration(np.array([0.0, np.pi / 2]))
    p = forward_kinematics(chain, q)
    assert is_continuous(chain, p, p, q, q)


def test_is_continuous_accepts_small_smooth_motion():
    chain = planar_chain([1.0, 1.0])
    q_i = Configuration(np.array([0.0, np.pi / 2]))
    p_i = forward_kinematics(chain, q_i)
    p_j = TaskPoint(p_i.translation + np.array([0.08, -0.05]))
    q_j = project(chain, p_j, q_i).q
    assert is_continuous(chain, p_i, p_j, q_i, q_j)


def test_is_continuous_rejects_elbow_flip():
    # Both configurations put the tool at (1, 1) but on opposite elbow
    # branches; no continuous motion can connect them while the tool holds
    # still, and the bisection must notice.
    chain = planar_chain([1.0, 1.0])
    q_up = Configuration(np.array([0.0, np.pi / 2]))
    q_down = Configuration(np.array([np.pi / 2, -np.pi / 2]))
    p = TaskPoint(np.array([1.0, 1.0]))
    np.testing.assert_allclose(forward_kinematics(chain, q_up).translation,
                               p.translation, atol=1e-12)
    np.testing.assert_allclose(forward_kinematics(chain, q_down).translation,
                               p.translation, atol=1e-12)
    assert not is_continuous(chain, p, p, q_up, q_down)


def test_is_continuous_depth_limit_rejects_unsplittable_edges():
    chain = planar_chain([1.0, 1.0])
    q_up = Configuration(np.array([0.0, np.pi / 2]))
    q_down = Configuration(np.array([np.pi / 2, -np.pi / 2]))
    p = TaskPoint(np.array([1.0, 1.0]))
    assert not is_continuous(chain, p, p, q_up, q_down, depth_limit=0)


def test_is_continuous_epsilon_accepts_without_projection():
    chain = planar_chain([1.0, 1.0])
    q_i = Configuration(np.array([0.3, 0.4]))
    q_j = Configuration(np.array([0.3 + 1e-3, 0.4]))
    p_i = forward_kinematics(chain, q_i)
    p_j = forward_kinematics(chain, q_j)
    assert is_continuous(chain, p_i, p_j, q_i, q_j, depth_limit=0)


# ---- neighbor projection ----------------------------------------------------------


def test_project_neighbors_inverse_square_weights():
    # Two assigned vertices; the query sits on their chord, twice as far
    # from the first. Inverse-square weighting gives 0.2 / 0.8, and with a
    # tolerance that accepts the first iterate the returned configuration
    # is exactly the weighted average of the two assignments.
    chain = planar_chain([1.0], limits=(-3.0, 3.0))
    t0 = np.array([1.0, 0.0])
    t1 = np.array([np.cos(0.6), np.sin(0.6)])
    graph = TaskGraph(TaskMode.POSITION, np.stack([t0, t1]),
                      np.array([[0, 1]]))
    roadmap = ResolutionRoadmap(graph, np.array([[0.0], [0.6]]),
                                np.array([True, True]),
                                np.array([[0, 1]]), chain=chain)
    p = TaskPoint(t0 + (2.0 / 3.0) * (t1 - t0))
    loose = ProjectionParams(tolerance=1e9)
    result = project_neighbors(chain, p, graph, roadmap, k=2,
                               projection=loose)
    assert result.success
    assert result.q.values[0] == pytest.approx(0.8 * 0.6, abs=1e-9)


def test_project_neighbors_coincident_vertex_short_circuits(planar3_setup):
    _, chain, graph, roadmap, _ = planar3_setup
    v = int(roadmap.assigned_ids()[10])
    result = project_neighbors(chain, graph.task_point(v), graph, roadmap)
    assert result.success
    assert result.iterations == 0
    np.testing.assert_allclose(result.q.values, roadmap.q_values[v],
                               rtol=0, atol=1e-12)


def test_project_neighbors_reports_missing_support():
    chain, graph, q_values = two_joint_square_graph()
    roadmap = ResolutionRoadmap(graph, q_values, np.zeros(4, dtype=bool),
                                np.empty((0, 2), dtype=int), chain=chain)
    result = project_neighbors(chain, TaskPoint(np.array([0.5, 0.5])),
                               graph, roadmap, k=4)
    assert not result.success
    assert result.reason == "no_support"
    assert result.q is None


def test_project_neighbors_uses_explicit_support(planar3_setup):
    _, chain, graph, roadmap, _ = planar3_setup
    ids = roadmap.assigned_ids()[:4]
    p = graph.task_point(int(ids[0]))
    result = project_neighbors(chain, p, graph, roadmap, support=ids)
    assert result.success


# ---- metrics on a hand graph ------------------------------------------------------


def test_connectivity_counts_resolved_fraction():
    chain, graph, q_values = two_joint_square_graph()
    roadmap = ResolutionRoadmap(graph, q_values, np.ones(4, dtype=bool),
                                np.array([[0, 1], [0, 2], [1, 3]]),
                                chain=chain)
    assert connectivity(roadmap) == pytest.approx(0.75)


def test_smoothness_mean_ratio_on_hand_graph():
    chain, graph, q_values = two_joint_square_graph()
    roadmap = ResolutionRoadmap(graph, q_values, np.ones(4, dtype=bool),
                                np.array([[0, 1], [0, 2], [1, 3]]),
                                chain=chain)
    # Every resolved edge spans one unit of task distance and half a radian
    # of configuration distance.
    assert smoothness(roadmap) == pytest.approx(0.5)


def test_metrics_reject_degenerate_inputs():
    chain, graph, q_values = two_joint_square_graph()
    empty_edges = TaskGraph(TaskMode.POSITION, graph.translations,
                            np.empty((0, 2), dtype=int))
    roadmap = ResolutionRoadmap(empty_edges, q_values,
                                np.ones(4, dtype=bool),
                                np.empty((0, 2), dtype=int), chain=chain)
    with pytest.raises(ValueError):
        connectivity(roadmap)
    with pytest.raises(ValueError):
        smoothness(roadmap)


def test_component_labels_split_and_unassigned():
    chain = planar_chain([1.0, 1.0], limits=(-3.0, 3.0))
    graph = TaskGraph(TaskMode.POSITION, np.zeros((5, 2)),
                      np.array([[0, 1], [1, 2], [2, 3], [3, 4]]))
    assigned = np.array([True, True, True, True, False])
    roadmap = ResolutionRoadmap(graph, np.zeros((5, 2)), assigned,
                                np.array([[0, 1], [2, 3]]), chain=chain)
    np.testing.assert_array_equal(roadmap.component_labels(),
                                  [0, 0, 2, 2, -1])


def test_roadmap_assignment_access():
    chain, graph, q_values = two_joint_square_graph()
    assigned = np.array([True, False, True, True])
    roadmap = ResolutionRoadmap(graph, q_values, assigned,
                                np.empty((0, 2), dtype=int), chain=chain)
    assert roadmap.n_assigned == 3
    np.testing.assert_array_equal(roadmap.assigned_ids(), [0, 2, 3])
    assert roadmap.has_assignment(0) and not roadmap.has_assignment(1)
    with pytest.raises(KeyError):
        roadmap.assignment(1)
    # Returned configurations are copies, not views into the roadmap.
    roadmap.assignment(0).values[0] = 42.0
    assert roadmap.q_values[0, 0] == 0.0


# ---- seeding and expansion --------------------------------------------------------


def test_seed_from_cycle_lands_on_distinct_vertices(planar3_setup):
    _, chain, graph, _, _ = planar3_setup
    seeds = seed_from_cycle(chain, planar3_cycle(), graph)
    assert len(seeds) > 10
    tol = ProjectionParams().tolerance
    for v, q in seeds.items():
        p = forward_kinematics(chain, q)
        assert task_distance(p, graph.task_point(v)) <= tol


def test_seed_from_cycle_rejects_empty_cycle(planar3_setup):
    _, chain, graph, _, _ = planar3_setup
    with pytest.raises(ValueError):
        seed_from_cycle(chain, [], graph)


def test_global_expansion_requires_seeds(planar3_setup):
    _, chain, graph, _, _ = planar3_setup
    with pytest.raises(ValueError):
        global_expansion(chain, graph, {})


def test_global_expansion_report_is_consistent(planar3_setup):
    _, _, graph, roadmap, _ = planar3_setup
    report = roadmap.build_report
    assert report.n_vertices == graph.n_vertices
    assert report.n_edges == graph.n_edges
    assert report.assigned_count == roadmap.n_assigned
    assert report.edges_passed == len(roadmap.resolved_edges)
    assert report.edges_checked <= graph.n_edges
    assert 0 <= report.repair_rounds <= 3
    assert report.k == default_k(graph)
    assert report.build_seconds > 0.0


def test_global_expansion_assigns_whole_component(planar3_setup):
    _, _, graph, roadmap, _ = planar3_setup
    assert roadmap.n_assigned == graph.n_vertices
    assert len(roadmap.build_report.failed_vertices) == 0


def test_resolved_edges_are_valid_and_sorted(planar3_setup):
    _, _, graph, roadmap, _ = planar3_setup
    edges = [tuple(e) for e in roadmap.resolved_edges]
    assert edges == sorted(edges)
    assert len(set(edges)) == len(edges)
    graph_edges = {tuple(e) for e in np.sort(graph.edges, axis=1).tolist()}
    for i, j in edges:
        assert i < j
        assert (i, j) in graph_edges
        assert roadmap.assigned[i] and roadmap.assigned[j]


def test_global_expansion_is_deterministic():
    chain = planar_3link()
    graph = build_grid(chain, (-4.0, -4.0), (4.0, 4.0), (10, 10))
    seeds = seed_from_cycle(chain, planar3_cycle(), graph)
    a = global_expansion(chain, graph, seeds)
    b = global_expansion(chain, graph, seeds)
    assert np.array_equal(a.q_values, b.q_values)
    assert np.array_equal(a.assigned, b.assigned)
    assert np.array_equal(np.asarray(a.resolved_edges),
                          np.asarray(b.resolved_edges))


def test_global_expansion_honors_k_override():
    chain = planar_3link()
    graph = build_grid(chain, (-4.0, -4.0), (4.0, 4.0), (10, 10))
    seeds = seed_from_cycle(chain, planar3_cycle(), graph)
    roadmap = global_expansion(chain, graph, seeds, k=4)
    assert roadmap.k == 4
    assert roadmap.build_report.k == 4
