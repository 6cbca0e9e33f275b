import math

import numpy as np
import pytest

from robokin import models
from robokin.errors import DimensionMismatch, InvalidScrew, SingularJacobian
from robokin.kinematics import (
    KinematicChain,
    body_jacobian,
    endpoint_jacobian,
    fk_chain_rule,
    fk_poe,
    positional_jacobian,
    space_jacobian,
    static_force,
    static_torque,
)
from robokin.se3 import adjoint, rot_z, transform_inverse

REF_Q = np.array([math.pi / 4, math.pi / 2, 3 * math.pi / 4])
R2 = math.sqrt(2.0)


@pytest.fixture
def arm():
    return models.planar_arm()


def _chains(seed=0, count=5):
    rng = np.random.default_rng(seed)
    return [models.random_chain(rng, n=int(rng.integers(1, 8))) for _ in range(count)]


def test_home_pose_at_zero(arm):
    assert np.array_equal(fk_poe(arm, np.zeros(3)), arm.home_pose)
    assert np.allclose(fk_chain_rule(arm, np.zeros(3)), arm.home_pose, atol=1e-15)


def test_planar_end_point(arm):
    for fk in (fk_poe, fk_chain_rule):
        assert np.allclose(fk(arm, REF_Q)[:3, 3], [0.0, R2 - 1.0, 1.0], atol=1e-9)


def test_planar_closed_form_position(arm):
    rng = np.random.default_rng(1)
    for _ in range(50):
        t, f, s = rng.uniform(-math.pi, math.pi, 3)
        y = math.sin(t) + math.sin(t + f) + math.sin(t + f + s)
        z = 1.0 + math.cos(t) + math.cos(t + f) + math.cos(t + f + s)
        assert np.allclose(fk_poe(arm, [t, f, s])[:3, 3], [0.0, y, z], atol=1e-12)


def test_single_joint_poe():
    c = KinematicChain.from_screws([[0, 0, 1, 0, 0, 0]], np.eye(4))
    assert np.allclose(fk_poe(c, [math.pi / 2])[:3, :3], rot_z(math.pi / 2), atol=1e-15)


def test_dual_path_fk():
    for chain in _chains(2, 8):
        rng = np.random.default_rng(chain.n)
        for _ in range(100 // 8 + 1):
            q = rng.uniform(-math.pi, math.pi, chain.n)
            assert np.max(np.abs(fk_poe(chain, q) - fk_chain_rule(chain, q))) < 1e-10


def test_from_screws_chain_rule_matches():
    rng = np.random.default_rng(3)
    for _ in range(5):
        n = 5
        S = []
        for k in range(n):
            if k == 2:
                v = rng.normal(size=3)
                S.append(np.concatenate([np.zeros(3), v / np.linalg.norm(v)]))
            else:
                w = rng.normal(size=3)
                S.append(np.concatenate([w / np.linalg.norm(w), rng.normal(size=3)]))
        M = fk_poe(models.random_chain(rng, 2), rng.normal(size=2))
        c = KinematicChain.from_screws(S, M)
        for _ in range(20):
            q = rng.normal(size=n)
            assert np.max(np.abs(fk_poe(c, q) - fk_chain_rule(c, q))) < 1e-10


def test_dimension_mismatch(arm):
    with pytest.raises(DimensionMismatch):
        fk_poe(arm, [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        space_jacobian(arm, np.zeros(4))


def test_invalid_screw_rejected():
    with pytest.raises(InvalidScrew):
        KinematicChain.from_screws([[0, 0, 0.5, 0, 0, 0]], np.eye(4))
    with pytest.raises(InvalidScrew):
        KinematicChain.from_screws([[0, 0, 0, 0, 0, 2.0]], np.eye(4), kinds=["prismatic"])


def test_chain_is_immutable(arm):
    with pytest.raises(ValueError):
        arm.screws[0, 0] = 1.0


def test_space_jacobian_at_zero_is_screws():
    for chain in _chains(4):
        assert np.allclose(space_jacobian(chain, np.zeros(chain.n)), chain.screws.T, atol=1e-15)


def _fd_twist(chain, q, qd, h=1e-6):
    """World twist from a central difference of the pose.

    The skew part is taken explicitly because difference noise leaves the
    rotation block skew only to about 1e-9.
    """
    Tdot = (fk_poe(chain, q + h * qd) - fk_poe(chain, q - h * qd)) / (2 * h)
    m = Tdot @ transform_inverse(fk_poe(chain, q))
    W = 0.5 * (m[:3, :3] - m[:3, :3].T)
    return np.array([W[2, 1], W[0, 2], W[1, 0], *m[:3, 3]])


def test_space_jacobian_finite_difference():
    for chain in _chains(5):
        rng = np.random.default_rng(chain.n + 10)
        for _ in range(10):
            q, qd = rng.uniform(-math.pi, math.pi, chain.n), rng.normal(size=chain.n)
            assert np.max(np.abs(_fd_twist(chain, q, qd) - space_jacobian(chain, q) @ qd)) < 1e-6


def test_space_body_relation():
    for chain in _chains(6):
        rng = np.random.default_rng(chain.n + 20)
        for _ in range(10):
            q = rng.uniform(-math.pi, math.pi, chain.n)
            Js, Jb = space_jacobian(chain, q), body_jacobian(chain, q)
            assert np.max(np.abs(Js - adjoint(fk_poe(chain, q)) @ Jb)) < 1e-10


def test_body_jacobian_last_column():
    for chain in _chains(7):
        q = np.random.default_rng(1).normal(size=chain.n)
        B_last = adjoint(transform_inverse(chain.home_pose)) @ chain.screws[-1]
        assert np.array_equal(body_jacobian(chain, q)[:, -1], B_last)
    c = KinematicChain.from_screws([[0, 0, 1, 0, 0, 0], [1, 0, 0, 0, 0, 1]], np.eye(4))
    assert np.allclose(body_jacobian(c, np.zeros(2)), c.screws.T, atol=1e-15)


def test_positional_jacobian_reference_value(arm):
    expected = [[0, 0, 0], [0, -R2 / 2, 0], [1 - R2, 1 - R2 / 2, 1]]
    assert np.max(np.abs(positional_jacobian(arm, REF_Q) - expected)) <= 1e-12


def test_positional_jacobian_straight(arm):
    J = positional_jacobian(arm, np.zeros(3))
    assert np.allclose(J[1], [3, 2, 1], atol=1e-15) and np.allclose(J[2], 0, atol=1e-15)


def test_positional_jacobian_finite_difference():
    h = 1e-6
    for chain in _chains(8):
        rng = np.random.default_rng(chain.n + 30)
        q = rng.uniform(-math.pi, math.pi, chain.n)
        J = positional_jacobian(chain, q)
        for k in range(chain.n):
            e = np.zeros(chain.n)
            e[k] = h
            col = (fk_poe(chain, q + e)[:3, 3] - fk_poe(chain, q - e)[:3, 3]) / (2 * h)
            assert np.max(np.abs(col - J[:, k])) < 1e-6


def test_endpoint_angular_rows_match_space():
    for chain in _chains(9):
        q = np.random.default_rng(2).normal(size=chain.n)
        assert np.array_equal(endpoint_jacobian(chain, q)[:3], space_jacobian(chain, q)[:3])


def test_static_torque(arm):
    J = positional_jacobian(arm, REF_Q)
    assert np.array_equal(static_torque(J, np.zeros(3)), np.zeros(3))
    assert np.allclose(static_torque(J, [0, 0, 1]), [1 - R2, 1 - R2 / 2, 1], atol=1e-12)
    rng = np.random.default_rng(3)
    for _ in range(100):
        J, f, qd = rng.normal(size=(6, 4)), rng.normal(size=6), rng.normal(size=4)
        assert abs(f @ (J @ qd) - static_torque(J, f) @ qd) < 1e-12
    with pytest.raises(DimensionMismatch):
        static_torque(np.eye(3), np.ones(4))


def test_static_force(arm):
    rng = np.random.default_rng(4)
    J = rng.normal(size=(6, 6)) + 3 * np.eye(6)
    assert np.array_equal(static_force(J, np.zeros(6)), np.zeros(6))
    f = rng.normal(size=6)
    assert np.allclose(static_force(J, static_torque(J, f)), f, atol=1e-12)
    J_yz = positional_jacobian(arm, np.zeros(3))[1:, :2]  # straight arm: z row vanishes
    with pytest.raises(SingularJacobian):
        static_force(J_yz, np.ones(2))
    with pytest.raises(SingularJacobian):
        static_force(np.ones((6, 3)), np.ones(3))


def test_prismatic_chain():
    c = KinematicChain.from_screws([[0, 0, 0, 0, 0, 1], [0, 0, 1, 0, 0, 0]], np.eye(4))
    assert c.kinds == ("prismatic", "revolute")
    T = fk_poe(c, [0.5, math.pi / 2])
    assert np.allclose(T[:3, 3], [0, 0, 0.5]) and np.allclose(T[:3, :3], rot_z(math.pi / 2))
    assert np.max(np.abs(fk_chain_rule(c, [0.5, 1.0]) - fk_poe(c, [0.5, 1.0]))) < 1e-12
