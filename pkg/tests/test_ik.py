import math

import numpy as np
import pytest

from robokin import models
from robokin.errors import DegenerateTarget, NonPositiveDamping, SingularJacobian, Unreachable
from robokin.ik import (
    IkSettings,
    analytic_2link,
    config_grid,
    dls_inverse,
    euler_xyz_jacobian,
    nr_step,
    pose_error,
    random_configs,
    singularity_scan,
    solve_ik,
    space_jacobian_batch,
    velocity_ik,
)
from robokin.kinematics import KinematicChain, endpoint_jacobian, fk_poe, space_jacobian
from robokin.se3 import make_transform, rot_z


def test_pose_error_cases():
    T = make_transform(rot_z(0.3), [1, 2, 3])
    dp, dw, loss = pose_error(T, T)
    assert loss == 0.0 and not dp.any() and not dw.any()
    _, _, loss = pose_error(make_transform(p=[0, 0, 0]), make_transform(p=[0.3, 0, 0.4]))
    assert abs(loss - 0.25) < 1e-15
    _, dw, loss = pose_error(np.eye(4), make_transform(rot_z(math.pi / 6)))
    assert abs(loss - (math.pi / 6) ** 2) < 1e-15
    assert np.allclose(dw, [0, 0, math.pi / 6])


def test_settings_validation():
    with pytest.raises(ValueError):
        IkSettings(step_scale=0.0)
    with pytest.raises(ValueError):
        IkSettings(step_scale=1.5)
    with pytest.raises(ValueError):
        IkSettings(tol=0.0)
    with pytest.raises(NonPositiveDamping):
        IkSettings(dls_damping=-1.0)


def test_nr_step_at_goal():
    arm = models.planar_arm()
    q = np.array([0.1, 0.2, 0.3])
    q2, loss = nr_step(arm, q, fk_poe(arm, q))
    assert loss == 0.0 and np.array_equal(q2, q)


def test_nr_step_single_joint_exact():
    c = KinematicChain.from_screws([[0, 0, 1, 0, 0, 0]], np.eye(4))
    goal = make_transform(rot_z(0.2))
    q1, loss = nr_step(c, [0.0], goal, IkSettings(step_scale=1.0, use_dls=False))
    assert abs(q1[0] - 0.2) < 1e-12 and abs(loss - 0.04) < 1e-15


def test_nr_step_dls_bound():
    arm = models.planar_arm()
    q = np.array([0.0, 1e-4, 0.0])
    goal = fk_poe(arm, [0.3, 0.2, 0.1])
    s = IkSettings(step_scale=1.0)
    J = endpoint_jacobian(arm, q)
    dp, dw, _ = pose_error(fk_poe(arm, q), goal)
    err = np.concatenate([dw, dp])
    q1, _ = nr_step(arm, q, goal, s)
    sv = np.linalg.svd(J, compute_uv=False)
    nonzero = sv[sv > 0]
    bound = np.linalg.norm(err) * nonzero.max() / (nonzero.min() ** 2 + s.dls_damping)
    assert np.linalg.norm(q1 - q) <= bound


def test_solve_ik_trivial_and_trace():
    arm = models.planar_arm()
    q = np.array([0.4, -0.3, 0.9])
    r = solve_ik(arm, q, fk_poe(arm, q))
    assert r.converged and r.iters == 0 and r.final_loss == 0.0
    r = solve_ik(arm, np.zeros(3), fk_poe(arm, [0.5, 0.5, 0.5]))
    assert r.converged and len(r.loss_trace) == r.iters + 1 and r.final_loss <= 1e-6
    dp, dw, _ = pose_error(fk_poe(arm, r.q), fk_poe(arm, [0.5, 0.5, 0.5]))
    assert np.linalg.norm(dp) <= 1e-3 and np.linalg.norm(dw) <= 1e-3


def test_solve_ik_unreachable():
    arm = models.planar_arm()
    goal = make_transform(p=[0.0, 5.0, 1.0])  # beyond l2 + l3 + l4 = 3 from the shoulder
    r = solve_ik(arm, np.zeros(3), goal, IkSettings(max_iters=50))
    assert not r.converged and r.final_loss > 0.0 and r.iters == 50


def test_solve_ik_deterministic():
    arm = models.planar_arm()
    goal = fk_poe(arm, [1.0, -0.5, 2.0])
    a, b = solve_ik(arm, np.zeros(3), goal), solve_ik(arm, np.zeros(3), goal)
    assert np.array_equal(a.q, b.q) and a.loss_trace == b.loss_trace


def test_adaptive_damping_converges_near_singularity():
    arm = models.planar_arm()
    goal = fk_poe(arm, [0.2, 0.3, -0.4])
    r = solve_ik(arm, np.zeros(3), goal, IkSettings(adaptive=True))
    assert r.converged


def test_analytic_2link():
    (t, f), (tm, fm) = analytic_2link(1.0, 1.0, 1.0, 1.0)
    assert abs(t) < 1e-12 and abs(f - math.pi / 2) < 1e-12
    (t, f), _ = analytic_2link(1.0, 1.0, 2.0, 0.0)
    assert abs(t) < 1e-7 and abs(f) < 1e-7
    with pytest.raises(Unreachable):
        analytic_2link(1.0, 1.0, 3.0, 0.0)
    with pytest.raises(Unreachable):
        analytic_2link(1.0, 0.5, 0.1, 0.0)
    with pytest.raises(DegenerateTarget):
        analytic_2link(1.0, 1.0, 0.0, 0.0)


def test_analytic_2link_both_branches_fk():
    rng = np.random.default_rng(0)
    l1, l2 = 0.9, 0.6
    arm = models.planar_2link_yz(l1, l2)
    for _ in range(200):
        r = rng.uniform(abs(l1 - l2) + 1e-3, l1 + l2 - 1e-3)
        a = rng.uniform(-math.pi, math.pi)
        y, z = r * math.cos(a), r * math.sin(a)
        for sol in analytic_2link(l1, l2, y, z):
            assert np.allclose(fk_poe(arm, sol)[1:3, 3], [y, z], atol=1e-9)


def test_velocity_ik_zero_and_leg():
    leg = models.leg6()
    J = endpoint_jacobian(leg, [0, 0, -math.pi / 6, math.pi / 3, -math.pi / 6, 0])
    assert np.array_equal(velocity_ik(J, np.zeros(6)), np.zeros(6))
    qd = velocity_ik(J, [0, 0, 0, 0, 0, 0.1], IkSettings(use_dls=False))
    assert np.allclose(qd, [0, 0, -1 / 3, 2 / 3, -1 / 3, 0], atol=1e-12)


def test_velocity_ik_straight_leg():
    leg = models.leg6()
    J = endpoint_jacobian(leg, np.zeros(6))
    nu = np.array([0.05, -0.02, 0.0, 0.01, 0.03, 0.1])
    with pytest.raises(SingularJacobian):
        velocity_ik(J, nu, IkSettings(use_dls=False))
    s = IkSettings()
    qd = velocity_ik(J, nu, s)
    assert np.all(np.isfinite(qd))
    assert np.linalg.norm(qd) <= np.linalg.norm(nu) / (2 * math.sqrt(s.dls_damping))


def test_velocity_ik_rectangular_plain():
    arm = models.planar_arm()
    q = np.array([0.3, 0.5, 0.7])
    J = endpoint_jacobian(arm, q)
    qd_true = np.array([0.1, -0.2, 0.3])
    assert np.allclose(velocity_ik(J, J @ qd_true, IkSettings(use_dls=False)), qd_true, atol=1e-12)
    with pytest.raises(SingularJacobian):
        velocity_ik(endpoint_jacobian(arm, np.zeros(3)), J @ qd_true, IkSettings(use_dls=False))


def test_dls_inverse_cases():
    assert np.allclose(dls_inverse(np.eye(6), 0.0), np.eye(6))
    sig = np.array([0.5, 1.0, 2.0])
    assert np.allclose(dls_inverse(np.diag(sig), 0.1), np.diag(sig / (sig**2 + 0.1)), atol=1e-15)
    J = np.zeros((3, 3))
    J[0, 0] = 1.0
    with pytest.raises(NonPositiveDamping):
        dls_inverse(J, 0.0)
    with pytest.raises(NonPositiveDamping):
        dls_inverse(J, -1e-3)


def test_dls_rank_deficient_residual_scan():
    rng = np.random.default_rng(3)
    J = rng.normal(size=(6, 4))
    J[:, 3] = J[:, 0] - J[:, 1]
    nu = rng.normal(size=6)
    Jd = dls_inverse(J, 1e-4)
    assert np.all(np.isfinite(Jd))

    def resid(lam):
        return np.linalg.norm(J @ dls_inverse(J, lam) @ nu - nu)

    # the residual grows with damping, so the smallest lambda on a golden-section
    # scan of [1e-8, 1] is the minimizer and stays below the 1e-4 value
    a, b = math.log(1e-8), 0.0
    g = (math.sqrt(5) - 1) / 2
    for _ in range(60):
        c, d = b - g * (b - a), a + g * (b - a)
        if resid(math.exp(c)) <= resid(math.exp(d)):
            b = d
        else:
            a = c
    best = resid(math.exp(a))
    assert best <= resid(1e-4) + 1e-12
    assert resid(1e-4) <= resid(1e-2) <= resid(1.0)


def test_euler_jacobian_gimbal_lock():
    sv = np.linalg.svd(euler_xyz_jacobian(0.3, math.pi / 2, -0.8), compute_uv=False)
    assert sv[-1] < 1e-12 and sv[1] > 0.5
    assert np.linalg.svd(euler_xyz_jacobian(0.3, 0.2, -0.8), compute_uv=False)[-1] > 0.1


def test_singularity_scan_planar():
    arm = models.planar_arm()
    rep = singularity_scan(arm, [np.zeros(3), [0.3, 0.9, -0.7]])
    assert rep[0].flagged
    assert not rep[1].flagged and rep[1].sigma_min > 1e-3
    assert rep[0].det is None  # 6 x 3 Jacobian


def test_singularity_scan_square_det_and_single_joint():
    leg = models.leg6()
    rep = singularity_scan(leg, [np.zeros(6), [0.1, 0.2, -0.5, 1.0, -0.4, 0.3]])
    assert rep[0].flagged and abs(rep[0].det) < 1e-12
    assert not rep[1].flagged
    assert abs(rep[1].det - np.linalg.det(space_jacobian(leg, rep[1].config))) < 1e-12
    one = KinematicChain.from_screws([[0, 0, 1, 0.3, 0, 0]], np.eye(4))
    for r in singularity_scan(one, random_configs(1, 20, seed=1)):
        assert not r.flagged and abs(r.sigma_min - math.sqrt(1 + 0.09)) < 1e-12


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_space_jacobian_batch(backend):
    rng = np.random.default_rng(4)
    chain = models.random_chain(rng, n=6, prismatic_prob=0.3)
    Q = rng.uniform(-math.pi, math.pi, (50, 6))
    Jb = space_jacobian_batch(chain, Q, backend=backend)
    for q, J in zip(Q, Jb):
        assert np.max(np.abs(J - space_jacobian(chain, q))) < 1e-12


def test_grid_and_random_configs():
    G = config_grid([0, -1], [1, 1], [2, 3])
    assert G.shape == (6, 2) and np.array_equal(G[1], [0, 0]) and np.array_equal(G[3], [1, -1])
    a, b = random_configs(3, 10, seed=7), random_configs(3, 10, seed=7)
    assert np.array_equal(a, b) and a.shape == (10, 3)
