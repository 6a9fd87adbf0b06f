import numpy as np
import pytest

from grr.chain import (
    Capsule,
    Configuration,
    KinematicChain,
    RevoluteJoint,
    TaskMode,
    bisect_q,
    config_distance,
    forward_kinematics,
    jacobian,
    self_collision_free,
    weighted_average,
)
from grr.robots import planar_3link, planar_5link, spatial_7dof
from grr.transforms import Transform, quat_about_z

_Z = np.array([0.0, 0.0, 1.0])


def planar_chain(lengths, radius=0.0, limits=None):
    joints = []
    for L in lengths:
        if limits is None:
            joints.append(RevoluteJoint(_Z, np.array([L, 0.0, 0.0])))
        else:
            joints.append(RevoluteJoint(_Z, np.array([L, 0.0, 0.0]),
                                        limits[0], limits[1]))
    links = [Capsule(np.zeros(3), np.array([L, 0.0, 0.0]), radius)
             for L in lengths]
    return KinematicChain(joints, links, planar=True)


# ---- forward kinematics -----------------------------------------------------------


def test_fk_two_link_stretched():
    chain = planar_chain([1.0, 1.0])
    p = forward_kinematics(chain, Configuration(np.zeros(2)))
    np.testing.assert_allclose(p.translation, [2.0, 0.0], atol=1e-12)
    assert p.orientation is None


def test_fk_two_link_base_quarter_turn():
    chain = planar_chain([1.0, 1.0])
    p = forward_kinematics(chain, Configuration(np.array([np.pi / 2, 0.0])))
    np.testing.assert_allclose(p.translation, [0.0, 2.0], atol=1e-12)


def test_fk_two_link_elbow_bend():
    chain = planar_chain([1.0, 1.0])
    p = forward_kinematics(chain, Configuration(np.array([0.0, np.pi / 2])))
    np.testing.assert_allclose(p.translation, [1.0, 1.0], atol=1e-12)


def test_fk_planar_translation_is_2d():
    chain = planar_chain([1.0, 1.0])
    p = forward_kinematics(chain, Configuration(np.zeros(2)))
    assert p.translation.shape == (2,)


def test_fk_fixed_orientation_reports_tool_angle():
    chain = planar_chain([1.0, 1.0])
    q = Configuration(np.array([0.3, 0.4]))
    p = forward_kinematics(chain, q, TaskMode.FIXED_ORIENTATION)
    np.testing.assert_allclose(p.orientation, quat_about_z(0.7), atol=1e-12)


def test_fk_respects_ee_offset():
    joints = [RevoluteJoint(_Z, np.array([1.0, 0.0, 0.0]))]
    ee = Transform.from_translation([0.0, 0.5])
    chain = KinematicChain(joints, ee_offset=ee, planar=True)
    p = forward_kinematics(chain, Configuration(np.zeros(1)))
    np.testing.assert_allclose(p.translation, [1.0, 0.5], atol=1e-12)


def test_fk_spatial_chain_matches_manual_sum():
    chain = spatial_7dof()
    p = forward_kinematics(chain, Configuration(np.zeros(7)))
    # All joints at zero: every offset stacks along +z, plus the tool offset.
    total = sum(j.offset[2] for j in chain.joints) + 0.10
    np.testing.assert_allclose(p.translation, [0.0, 0.0, total], atol=1e-12)


# ---- jacobian ---------------------------------------------------------------------


def test_jacobian_two_link_columns():
    chain = planar_chain([1.0, 1.0])
    J = jacobian(chain, Configuration(np.zeros(2)))
    np.testing.assert_allclose(J, [[0.0, 0.0], [2.0, 1.0]], atol=1e-12)


def _finite_difference_jacobian(chain, q, mode, h=1e-6):
    n = chain.n_joints
    base = forward_kinematics(chain, q, mode).translation
    cols = []
    for i in range(n):
        plus = q.values.copy()
        minus = q.values.copy()
        plus[i] += h
        minus[i] -= h
        fp = forward_kinematics(chain, Configuration(plus), mode).translation
        fm = forward_kinematics(chain, Configuration(minus), mode).translation
        cols.append((fp - fm) / (2.0 * h))
    J = np.column_stack(cols)
    assert J.shape[0] == len(base)
    return J


@pytest.mark.parametrize("factory", [planar_5link, planar_3link, spatial_7dof])
def test_jacobian_matches_finite_differences(factory):
    chain = factory()
    rng = np.random.default_rng(7)
    for _ in range(25):
        q = chain.random_config(rng)
        J = jacobian(chain, q)
        J_fd = _finite_difference_jacobian(chain, q, TaskMode.POSITION)
        np.testing.assert_allclose(J, J_fd, atol=1e-5)


def test_jacobian_fixed_orientation_angle_row():
    chain = planar_chain([1.0, 1.0])
    J = jacobian(chain, Configuration(np.array([0.2, -0.4])),
                 TaskMode.FIXED_ORIENTATION)
    assert J.shape == (3, 2)
    # The tool angle is the plain sum of joint angles, so its row is ones.
    np.testing.assert_allclose(J[2], [1.0, 1.0], atol=1e-12)


# ---- configuration metric ---------------------------------------------------------


def test_config_distance_wraps_continuous_joints():
    chain = planar_chain([1.0, 1.0])
    d = config_distance(chain, Configuration(np.array([6.2, 0.0])),
                        Configuration(np.zeros(2)))
    assert d == pytest.approx(0.0831853071795862, abs=1e-12)


def test_config_distance_euclidean_on_limited_joints():
    chain = planar_chain([1.0, 1.0], limits=(-10.0, 10.0))
    d = config_distance(chain, Configuration(np.array([3.0, 4.0])),
                        Configuration(np.zeros(2)))
    assert d == pytest.approx(5.0, abs=1e-12)


def test_config_distance_symmetric_and_zero_on_equal():
    chain = planar_5link()
    rng = np.random.default_rng(0)
    for _ in range(20):
        a, b = chain.random_config(rng), chain.random_config(rng)
        assert config_distance(chain, a, b) == pytest.approx(
            config_distance(chain, b, a))
        assert config_distance(chain, a, a) == 0.0


def test_bisect_q_takes_short_arc_through_pi():
    chain = planar_chain([1.0])
    mid = bisect_q(chain, Configuration(np.array([3.0])),
                   Configuration(np.array([-3.0])))
    # The short arc between 3.0 and -3.0 crosses the branch cut; its
    # midpoint is pi, normalized into [-pi, pi).
    assert mid.values[0] == pytest.approx(-np.pi)


def test_bisect_q_halves_the_distance():
    chain = planar_5link()
    rng = np.random.default_rng(5)
    for _ in range(20):
        a, b = chain.random_config(rng), chain.random_config(rng)
        mid = bisect_q(chain, a, b)
        d = config_distance(chain, a, b)
        assert config_distance(chain, a, mid) <= 0.5 * d + 1e-9
        assert config_distance(chain, mid, b) <= 0.5 * d + 1e-9


def test_weighted_average_one_hot_is_exact():
    chain = planar_5link()
    rng = np.random.default_rng(9)
    qs = [chain.random_config(rng) for _ in range(3)]
    out = weighted_average(chain, qs, [0.0, 1.0, 0.0])
    assert np.array_equal(out.values, qs[1].values)


def test_weighted_average_circular_mean_through_pi():
    chain = planar_chain([1.0])
    out = weighted_average(chain, [Configuration(np.array([3.0])),
                                   Configuration(np.array([-3.0]))],
                           [0.5, 0.5])
    assert abs(out.values[0]) == pytest.approx(np.pi)


def test_weighted_average_arithmetic_on_limited_joints():
    chain = planar_chain([1.0], limits=(-3.0, 3.0))
    out = weighted_average(chain, [Configuration(np.array([0.5])),
                                   Configuration(np.array([-0.3]))],
                           [0.2, 0.8])
    assert out.values[0] == pytest.approx(-0.14, abs=1e-12)


def test_weighted_average_rejects_bad_weights():
    chain = planar_chain([1.0])
    q = Configuration(np.zeros(1))
    with pytest.raises(ValueError):
        weighted_average(chain, [q, q], [0.7, 0.7])


# ---- collision and reach ----------------------------------------------------------


def test_fold_onto_first_link_collides():
    chain = planar_chain([1.0, 1.0, 1.0], radius=0.2)
    assert not self_collision_free(
        chain, Configuration(np.array([0.0, 0.0, np.pi])))


def test_square_pose_is_collision_free():
    chain = planar_chain([1.0, 1.0, 1.0], radius=0.2)
    assert self_collision_free(
        chain, Configuration(np.array([0.0, np.pi / 2, np.pi / 2])))


def test_zero_radius_capsules_never_collide():
    chain = planar_3link()
    assert self_collision_free(
        chain, Configuration(np.array([0.0, np.pi, 0.0])))


def test_reach_annulus_three_link():
    chain = planar_3link()
    center, r_min, r_max = chain.reach()
    np.testing.assert_allclose(center[:2], [0.0, 0.0], atol=1e-12)
    assert r_max == pytest.approx(3.5)
    assert r_min == pytest.approx(0.5)


def test_reach_annulus_five_link_has_no_hole():
    center, r_min, r_max = planar_5link().reach()
    assert r_max == pytest.approx(5.0)
    assert r_min == 0.0


def test_reach_fixed_orientation_shrinks_radius():
    chain = planar_5link()
    _, _, r_pos = chain.reach()
    _, _, r_fix = chain.reach(TaskMode.FIXED_ORIENTATION,
                              np.array([1.0, 0.0, 0.0, 0.0]))
    assert r_fix < r_pos


# ---- construction and validation --------------------------------------------------


def test_chain_rejects_empty_joints():
    with pytest.raises(ValueError):
        KinematicChain([])


def test_chain_rejects_link_count_mismatch():
    joints = [RevoluteJoint(_Z, np.array([1.0, 0.0, 0.0]))]
    links = [Capsule(np.zeros(3), np.ones(3), 0.1)] * 2
    with pytest.raises(ValueError):
        KinematicChain(joints, links, planar=True)


def test_make_config_checks_shape():
    chain = planar_5link()
    with pytest.raises(ValueError):
        chain.make_config(np.zeros(3))


def test_clamp_enforces_limits():
    chain = planar_chain([1.0, 1.0], limits=(-1.0, 1.0))
    out = chain.clamp(np.array([2.0, -3.0]))
    np.testing.assert_allclose(out, [1.0, -1.0])


def test_random_config_respects_limits():
    chain = planar_chain([1.0, 1.0], limits=(-0.5, 0.5))
    rng = np.random.default_rng(2)
    for _ in range(50):
        q = chain.random_config(rng)
        assert np.all(q.values >= -0.5) and np.all(q.values <= 0.5)


def test_canonical_dict_is_json_friendly():
    import json

    doc = spatial_7dof().canonical_dict()
    blob = json.dumps(doc, sort_keys=True)
    assert json.loads(blob) == doc
