"""Lagrangian and Newton-Euler dynamics.

Links are modeled as point masses (see ``KinematicChain.mass_points``).
General chains get their mass matrix from the point Jacobians, and their
Christoffel symbols and gravity torques from central differences. The planar
2-link arm also has closed forms, plus an independent Newton-Euler assembly
used to cross-check them.

Rigid-body helpers work on particle sets, 3x3 rotational inertias and 6x6
spatial inertias ordered (w, v).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from ._jit import use_numba
from .errors import DimensionMismatch, MissingMassData, NotCentered
from .kinematics import KinematicChain, _q, mass_point_jacobians, mass_point_positions
from .screw import twist_ad
from .se3 import adjoint, hat3

FD_STEP = 1e-6
CENTER_TOL = 1e-9


@dataclass(frozen=True)
class TwoLinkParams:
    """Planar 2-link arm in the x-y plane, gravity along -y.

    Joint angles are measured from the x axis; link masses sit at the link
    end points.
    """

    L1: float
    L2: float
    m1: float
    m2: float
    g: float = 9.81

    def __post_init__(self):
        if min(self.L1, self.L2, self.m1, self.m2) <= 0.0:
            raise ValueError("link lengths and masses must be positive")


@dataclass(frozen=True)
class ArmState:
    theta: np.ndarray
    theta_dot: np.ndarray
    theta_ddot: np.ndarray

    def __init__(self, theta, theta_dot=None, theta_ddot=None):
        th = np.asarray(theta, dtype=float).reshape(-1)
        td = np.zeros_like(th) if theta_dot is None else np.asarray(theta_dot, dtype=float).reshape(-1)
        tdd = np.zeros_like(th) if theta_ddot is None else np.asarray(theta_ddot, dtype=float).reshape(-1)
        if not th.shape == td.shape == tdd.shape:
            raise DimensionMismatch("theta, theta_dot and theta_ddot differ in length")
        object.__setattr__(self, "theta", th)
        object.__setattr__(self, "theta_dot", td)
        object.__setattr__(self, "theta_ddot", tdd)


def euler_lagrange_1d(m: float, g: float, q_ddot: float) -> float:
    """Force on a particle lifted against gravity: ``m q_ddot + m g``."""
    return m * q_ddot + m * g


# planar 2-link closed forms


def _two(s: ArmState) -> ArmState:
    if s.theta.shape != (2,):
        raise DimensionMismatch("the 2-link model needs 2-vectors")
    return s


def two_link_terms(p: TwoLinkParams, s: ArmState):
    """Mass matrix, Coriolis/centripetal vector and gravity vector."""
    _two(s)
    t1, t2 = s.theta
    d1, d2 = s.theta_dot
    c2, s2 = np.cos(t2), np.sin(t2)
    L1, L2, m1, m2 = p.L1, p.L2, p.m1, p.m2
    m12 = m2 * (L1 * L2 * c2 + L2 * L2)
    M = np.array([
        [m1 * L1 * L1 + m2 * (L1 * L1 + 2.0 * L1 * L2 * c2 + L2 * L2), m12],
        [m12, m2 * L2 * L2],
    ])
    h = m2 * L1 * L2 * s2
    c = np.array([-h * (2.0 * d1 * d2 + d2 * d2), h * d1 * d1])
    g12 = m2 * p.g * L2 * np.cos(t1 + t2)
    g = np.array([(m1 + m2) * L1 * p.g * np.cos(t1) + g12, g12])
    return M, c, g


def two_link_inverse_dynamics(p: TwoLinkParams, s: ArmState) -> np.ndarray:
    M, c, g = two_link_terms(p, s)
    return M @ s.theta_ddot + c + g


def two_link_forward_dynamics(p: TwoLinkParams, theta, theta_dot, tau) -> np.ndarray:
    M, c, g = two_link_terms(p, ArmState(theta, theta_dot))
    return np.linalg.solve(M, np.asarray(tau, dtype=float).reshape(2) - c - g)


def two_link_kinetic_energy(p: TwoLinkParams, theta, theta_dot) -> float:
    M, _, _ = two_link_terms(p, ArmState(theta, theta_dot))
    td = np.asarray(theta_dot, dtype=float)
    return 0.5 * float(td @ M @ td)


def two_link_potential_energy(p: TwoLinkParams, theta) -> float:
    t1, t2 = np.asarray(theta, dtype=float)
    y1 = p.L1 * np.sin(t1)
    y2 = y1 + p.L2 * np.sin(t1 + t2)
    return p.g * (p.m1 * y1 + p.m2 * y2)


def two_link_newton_euler(p: TwoLinkParams, s: ArmState) -> np.ndarray:
    """Joint torques from point-mass Newton-Euler balances.

    Each mass gets ``F = m (a + g e_y)``; joint torques are the z moments of
    the forces carried outboard of each joint.
    """
    _two(s)
    t1, t2 = s.theta
    d1, d2 = s.theta_dot
    a1_, a2_ = s.theta_ddot
    t12, d12, a12 = t1 + t2, d1 + d2, a1_ + a2_
    r1 = p.L1 * np.array([np.cos(t1), np.sin(t1)])
    r2 = p.L2 * np.array([np.cos(t12), np.sin(t12)])
    acc1 = p.L1 * np.array([-np.sin(t1) * a1_ - np.cos(t1) * d1 * d1,
                            np.cos(t1) * a1_ - np.sin(t1) * d1 * d1])
    acc2 = acc1 + p.L2 * np.array([-np.sin(t12) * a12 - np.cos(t12) * d12 * d12,
                                   np.cos(t12) * a12 - np.sin(t12) * d12 * d12])
    up = np.array([0.0, p.g])
    F1 = p.m1 * (acc1 + up)
    F2 = p.m2 * (acc2 + up)

    def moment(r, F):
        return r[0] * F[1] - r[1] * F[0]

    tau2 = moment(r2, F2)
    tau1 = moment(r1, F1) + moment(r1 + r2, F2)
    return np.array([tau1, tau2])


def two_link_rollout(p: TwoLinkParams, theta0, theta_dot0, h: float, steps: int, tau=(0.0, 0.0),
                     backend=None) -> np.ndarray:
    """Fixed-step RK4 under a constant joint torque.

    Returns:
        (steps + 1, 4) array of ``(theta1, theta2, theta1_dot, theta2_dot)``.
    """
    x0 = np.concatenate([np.asarray(theta0, float).reshape(2), np.asarray(theta_dot0, float).reshape(2)])
    tau = np.asarray(tau, dtype=float).reshape(2)
    if use_numba(backend):
        return kernels.two_link_rollout(x0, tau, p.L1, p.L2, p.m1, p.m2, p.g, float(h), int(steps))

    def f(x):
        return np.concatenate([x[2:], two_link_forward_dynamics(p, x[:2], x[2:], tau)])

    out = np.empty((steps + 1, 4))
    out[0] = x = x0
    for k in range(steps):
        k1 = f(x)
        k2 = f(x + 0.5 * h * k1)
        k3 = f(x + 0.5 * h * k2)
        k4 = f(x + h * k3)
        x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = x
    return out


# general chains


def _require_mass(chain: KinematicChain):
    if chain.masses is None or chain.mass_points is None:
        raise MissingMassData("chain has no link mass data")


def mass_matrix_general(chain: KinematicChain, theta) -> np.ndarray:
    """``M = sum_i m_i Jv_i^T Jv_i`` over the link point masses."""
    _require_mass(chain)
    Jv = mass_point_jacobians(chain, theta)
    M = np.einsum("i,iak,ial->kl", chain.masses, Jv, Jv)
    return 0.5 * (M + M.T)  # exact symmetry keeps the Christoffel symbols symmetric in (j, k)


def potential_energy(chain: KinematicChain, theta) -> float:
    _require_mass(chain)
    pts = mass_point_positions(chain, theta)
    return -float(chain.masses @ (pts @ chain.gravity))


def gravity_torque(chain: KinematicChain, theta, h: float = FD_STEP) -> np.ndarray:
    """Gradient of the potential energy by central differences."""
    th = _q(chain, theta)
    out = np.empty(chain.n)
    for k in range(chain.n):
        e = np.zeros(chain.n)
        e[k] = h
        out[k] = (potential_energy(chain, th + e) - potential_energy(chain, th - e)) / (2.0 * h)
    return out


def mass_matrix_partials(chain: KinematicChain, theta, h: float = FD_STEP) -> np.ndarray:
    """``dM[k] = dM/dtheta_k`` by central differences, shape (n, n, n)."""
    th = _q(chain, theta)
    n = chain.n
    dM = np.empty((n, n, n))
    for k in range(n):
        e = np.zeros(n)
        e[k] = h
        dM[k] = (mass_matrix_general(chain, th + e) - mass_matrix_general(chain, th - e)) / (2.0 * h)
    return dM


def christoffel(chain: KinematicChain, theta, h: float = FD_STEP) -> np.ndarray:
    """Christoffel symbols ``G[i, j, k] = (dm_ij/dk + dm_ik/dj - dm_jk/di) / 2``."""
    _require_mass(chain)
    dM = mass_matrix_partials(chain, theta, h)
    # dM[k, i, j] = d m_ij / d theta_k
    return 0.5 * (np.einsum("kij->ijk", dM) + np.einsum("jik->ijk", dM) - np.einsum("ijk->ijk", dM))


def coriolis_matrix(chain: KinematicChain, theta, theta_dot, h: float = FD_STEP) -> np.ndarray:
    """``C[i, j] = sum_k G[i, j, k] theta_dot_k``."""
    return np.einsum("ijk,k->ij", christoffel(chain, theta, h), np.asarray(theta_dot, dtype=float))


def euler_lagrange_torque(chain: KinematicChain, s: ArmState, h: float = FD_STEP) -> np.ndarray:
    """``tau = M theta_ddot + theta_dot^T G theta_dot + g(theta)``."""
    _require_mass(chain)
    M = mass_matrix_general(chain, s.theta)
    c = coriolis_matrix(chain, s.theta, s.theta_dot, h) @ s.theta_dot
    return M @ s.theta_ddot + c + gravity_torque(chain, s.theta, h)


def forward_dynamics(chain: KinematicChain, theta, theta_dot, tau, h: float = FD_STEP) -> np.ndarray:
    """Joint accelerations ``M^-1 (tau - C theta_dot - g)``."""
    _require_mass(chain)
    th = _q(chain, theta)
    td = np.asarray(theta_dot, dtype=float).reshape(-1)
    tau = np.asarray(tau, dtype=float).reshape(-1)
    if td.shape != th.shape or tau.shape != th.shape:
        raise DimensionMismatch("state and torque lengths differ from the joint count")
    M = mass_matrix_general(chain, th)
    rhs = tau - coriolis_matrix(chain, th, td, h) @ td - gravity_torque(chain, th, h)
    return np.linalg.solve(M, rhs)


# rigid bodies


def center_of_mass(masses, points) -> np.ndarray:
    m = np.asarray(masses, dtype=float).reshape(-1)
    r = np.asarray(points, dtype=float).reshape(-1, 3)
    return m @ r / m.sum()


def inertia_from_particles(masses, points, require_centered: bool = True) -> np.ndarray:
    """Rotational inertia ``-sum m_i hat(r_i)^2`` of a particle set.

    Raises:
        NotCentered: if ``|sum m_i r_i| > 1e-9`` and ``require_centered``.
    """
    m = np.asarray(masses, dtype=float).reshape(-1)
    r = np.asarray(points, dtype=float).reshape(-1, 3)
    if m.shape[0] != r.shape[0]:
        raise DimensionMismatch("one mass per particle is required")
    if np.any(m <= 0.0):
        raise ValueError("particle masses must be positive")
    if require_centered and np.linalg.norm(m @ r) > CENTER_TOL:
        raise NotCentered("particle set is not expressed in its center-of-mass frame")
    rr = np.einsum("i,i->", m, np.einsum("ij,ij->i", r, r))
    return rr * np.eye(3) - np.einsum("i,ij,ik->jk", m, r, r)


def parallel_axis(I_b, m: float, q) -> np.ndarray:
    """Inertia about a point offset by ``q`` from the center of mass."""
    q = np.asarray(q, dtype=float).reshape(3)
    return np.asarray(I_b, dtype=float) + m * ((q @ q) * np.eye(3) - np.outer(q, q))


def inertia_change_frame(R, I_c) -> np.ndarray:
    """``R^T I_c R`` where R maps frame-a coordinates to frame-c coordinates."""
    R = np.asarray(R, dtype=float)
    return R.T @ np.asarray(I_c, dtype=float) @ R


def is_physical_inertia(I, tol: float = 1e-12) -> bool:
    """Symmetric, PSD and satisfying the principal-moment triangle inequalities."""
    I = np.asarray(I, dtype=float)
    if np.max(np.abs(I - I.T)) > tol:
        return False
    ev = np.linalg.eigvalsh(I)
    if ev[0] < -tol:
        return False
    a, b, c = ev
    return bool(a + b >= c - tol)


def rotational_ke(I, w) -> float:
    w = np.asarray(w, dtype=float)
    return 0.5 * float(w @ np.asarray(I, dtype=float) @ w)


def spatial_inertia(I_b, m: float) -> np.ndarray:
    """``block_diag(I_b, m I3)``."""
    G = np.zeros((6, 6))
    G[:3, :3] = I_b
    G[3:, 3:] = m * np.eye(3)
    return G


def spatial_ke(G, nu) -> float:
    nu = np.asarray(nu, dtype=float)
    return 0.5 * float(nu @ np.asarray(G, dtype=float) @ nu)


def spatial_inertia_change_frame(T_ac, G_c) -> np.ndarray:
    """``Ad(T_ac)^T G_c Ad(T_ac)``, the spatial inertia seen from frame a."""
    A = adjoint(T_ac)
    return A.T @ np.asarray(G_c, dtype=float) @ A


def body_wrench(G_b, nu, nu_dot) -> np.ndarray:
    """Wrench ``G nu_dot - ad(nu)^T G nu`` in a center-of-mass body frame.

    Here ``ad(nu) = [[hat(w), 0], [hat(v), hat(w)]]``. The torque block is
    ``I w_dot + w x I w`` and the force block is ``m (v_dot + w x v)``.
    """
    G = np.asarray(G_b, dtype=float)
    nu = np.asarray(nu, dtype=float).reshape(6)
    return G @ np.asarray(nu_dot, dtype=float).reshape(6) - twist_ad(nu).T @ (G @ nu)


def euler_torque(I_b, w, w_dot) -> np.ndarray:
    """``I w_dot + hat(w) I w``."""
    I = np.asarray(I_b, dtype=float)
    w = np.asarray(w, dtype=float)
    return I @ np.asarray(w_dot, dtype=float) + hat3(w) @ (I @ w)


def spin_rollout(I_b, w0, h: float, steps: int, tau=(0.0, 0.0, 0.0), backend=None) -> np.ndarray:
    """RK4 rollout of Euler's equations in the body frame.

    Returns:
        (steps + 1, 3) body angular velocities.
    """
    I = np.ascontiguousarray(I_b, dtype=float)
    Iinv = np.linalg.inv(I)
    w0 = np.asarray(w0, dtype=float).reshape(3)
    tau = np.asarray(tau, dtype=float).reshape(3)
    if use_numba(backend):
        return kernels.spin_rollout(I, Iinv, w0, tau, float(h), int(steps))

    def f(w):
        return Iinv @ (tau - np.cross(w, I @ w))

    out = np.empty((steps + 1, 3))
    out[0] = w = w0
    for k in range(steps):
        k1 = f(w)
        k2 = f(w + 0.5 * h * k1)
        k3 = f(w + 0.5 * h * k2)
        k4 = f(w + h * k3)
        w = w + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[k + 1] = w
    return out
