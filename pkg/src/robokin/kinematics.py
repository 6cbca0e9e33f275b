"""Serial chains, forward kinematics, Jacobians and static force mapping.

A chain is stored in two equivalent parameterizations:

* product of exponentials: world-frame screw axes at the zero configuration
  plus the home pose ``T0`` of the end point,
* chain rule: for every joint a fixed offset from the parent joint frame, a
  joint-local screw axis, and a final tool transform.

Either one can be given; the other is derived so that both forward
kinematics paths describe the same robot.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidScrew, MissingMassData, SingularJacobian
from .screw import SCREW_TOL, se3_exp
from .se3 import adjoint, check_transform, transform_compose, transform_inverse

REVOLUTE = "revolute"
PRISMATIC = "prismatic"
JOINT_KINDS = (REVOLUTE, PRISMATIC)
COND_LIMIT = 1e12


def _validate_joint(kind: str, s: np.ndarray, k: int) -> None:
    if kind not in JOINT_KINDS:
        raise InvalidScrew(f"joint {k}: unknown joint type {kind!r}")
    nw, nv = np.linalg.norm(s[:3]), np.linalg.norm(s[3:])
    if kind == REVOLUTE and abs(nw - 1.0) > SCREW_TOL:
        raise InvalidScrew(f"joint {k}: revolute screw needs |w| = 1, got {nw!r}")
    if kind == PRISMATIC and (nw > SCREW_TOL or abs(nv - 1.0) > SCREW_TOL):
        raise InvalidScrew(f"joint {k}: prismatic screw needs w = 0 and |v| = 1")


@dataclass(frozen=True, eq=False)
class KinematicChain:
    """Immutable serial chain.

    Attributes:
        screws: (n, 6) world-frame screw axes at q = 0.
        home_pose: end-point pose at q = 0.
        kinds: joint types, ``"revolute"`` or ``"prismatic"``.
        local_screws: (n, 6) screw axes in each joint's own frame.
        offsets: (n, 4, 4) parent-frame to joint-frame transforms at q = 0.
        tool: last joint frame to end point.
        masses: optional (n,) point masses, one per link.
        mass_points: optional (n, 3) world positions of the point masses at
            q = 0. Each point rides on the link that follows its joint.
        lengths: optional (n,) nominal link lengths (informational).
        gravity: gravity acceleration vector.
    """

    screws: np.ndarray
    home_pose: np.ndarray
    kinds: tuple
    local_screws: np.ndarray
    offsets: np.ndarray
    tool: np.ndarray
    masses: np.ndarray | None = None
    mass_points: np.ndarray | None = None
    lengths: np.ndarray | None = None
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    name: str = ""

    def __post_init__(self):
        for arr in (self.screws, self.home_pose, self.local_screws, self.offsets, self.tool, self.gravity):
            arr.setflags(write=False)
        for arr in (self.masses, self.mass_points, self.lengths):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def n(self) -> int:
        return self.screws.shape[0]

    @property
    def has_mass_data(self) -> bool:
        return self.masses is not None

    @classmethod
    def from_screws(cls, screws, home_pose, kinds=None, masses=None, mass_points=None,
                    lengths=None, gravity=(0.0, 0.0, -9.81), name=""):
        """Build from world-frame screw axes and the home pose.

        Joint frames for the chain-rule form are placed at the axis point
        closest to the origin with world orientation. Default mass points sit
        at the next joint frame origin, and at the end point for the last
        link.
        """
        S = np.array(screws, dtype=float).reshape(-1, 6)
        n = S.shape[0]
        if n < 1:
            raise DimensionMismatch("a chain needs at least one joint")
        M = check_transform(np.array(home_pose, dtype=float))
        kinds = _kinds(kinds, S)
        for k in range(n):
            _validate_joint(kinds[k], S[k], k)
        local = np.zeros((n, 6))
        offsets = np.zeros((n, 4, 4))
        prev = np.zeros(3)
        origins = np.zeros((n, 3))
        for k in range(n):
            w, v = S[k, :3], S[k, 3:]
            if kinds[k] == REVOLUTE:
                c = np.cross(w, v)
                local[k] = np.concatenate([w, (w @ v) * w])
            else:
                c = prev
                local[k] = S[k]
            T = np.eye(4)
            T[:3, 3] = c - prev
            offsets[k] = T
            origins[k] = c
            prev = c
        tool = M.copy()
        tool[:3, 3] = M[:3, 3] - prev
        if masses is not None and mass_points is None:
            mass_points = np.vstack([origins[1:], M[:3, 3][None, :]])
        return cls._finish(S, M, kinds, local, offsets, tool, masses, mass_points, lengths, gravity, name)

    @classmethod
    def from_local(cls, axes, offsets, tool=None, home_pose=None, kinds=None, masses=None,
                   mass_points=None, lengths=None, gravity=(0.0, 0.0, -9.81), name=""):
        """Build from joint-local axes and parent offsets.

        Args:
            axes: (n, 3) unit axis of each joint in its own frame.
            offsets: (n, 4, 4) transform from the parent joint frame (the world
                for joint 0) to this joint frame at q = 0.
            tool: last joint frame to end point. Mutually exclusive with
                ``home_pose``, which gives the end-point pose at q = 0 instead.
                Identity if neither is given.
        """
        A = np.array(axes, dtype=float).reshape(-1, 3)
        n = A.shape[0]
        if n < 1:
            raise DimensionMismatch("a chain needs at least one joint")
        O = np.array(offsets, dtype=float).reshape(n, 4, 4)
        kinds = tuple(kinds) if kinds is not None else (REVOLUTE,) * n
        if len(kinds) != n:
            raise DimensionMismatch("kinds and axes differ in length")
        local = np.zeros((n, 6))
        for k in range(n):
            check_transform(O[k])
            local[k] = np.concatenate([A[k], np.zeros(3)]) if kinds[k] == REVOLUTE else np.concatenate([np.zeros(3), A[k]])
            _validate_joint(kinds[k], local[k], k)
        frames = _cumulative(O)
        S = np.array([adjoint(frames[k]) @ local[k] for k in range(n)])
        if tool is not None and home_pose is not None:
            raise DimensionMismatch("give either tool or home_pose, not both")
        if home_pose is not None:
            M = check_transform(np.array(home_pose, dtype=float))
            tool = transform_compose(transform_inverse(frames[-1]), M)
        else:
            tool = check_transform(np.eye(4) if tool is None else np.array(tool, dtype=float))
            M = transform_compose(frames[-1], tool)
        if masses is not None and mass_points is None:
            mass_points = np.vstack([frames[1:, :3, 3], M[:3, 3][None, :]])
        return cls._finish(S, M, kinds, local, O, tool, masses, mass_points, lengths, gravity, name)

    @classmethod
    def _finish(cls, S, M, kinds, local, offsets, tool, masses, mass_points, lengths, gravity, name):
        n = S.shape[0]
        if masses is not None:
            masses = np.array(masses, dtype=float).reshape(-1)
            if masses.shape != (n,):
                raise DimensionMismatch("need one mass per link")
            mass_points = np.array(mass_points, dtype=float).reshape(n, 3)
        elif mass_points is not None:
            mass_points = np.array(mass_points, dtype=float).reshape(n, 3)
        if lengths is not None:
            lengths = np.array(lengths, dtype=float).reshape(-1)
        return cls(S, M, tuple(kinds), local, offsets, tool, masses, mass_points, lengths,
                   np.array(gravity, dtype=float).reshape(3), name)


def _kinds(kinds, S):
    if kinds is None:
        return tuple(REVOLUTE if np.linalg.norm(s[:3]) > 0.5 else PRISMATIC for s in S)
    kinds = tuple(kinds)
    if len(kinds) != S.shape[0]:
        raise DimensionMismatch("kinds and screws differ in length")
    return kinds


def _cumulative(offsets):
    frames = np.empty_like(offsets)
    T = np.eye(4)
    for k in range(offsets.shape[0]):
        T = transform_compose(T, offsets[k])
        frames[k] = T
    return frames


def _q(chain: KinematicChain, q) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.shape[0] != chain.n:
        raise DimensionMismatch(f"chain has {chain.n} joints, got {q.shape[0]} values")
    return q


def fk_chain_rule(chain: KinematicChain, q) -> np.ndarray:
    """End-point pose by composing offset and joint motion link by link."""
    q = _q(chain, q)
    T = np.eye(4)
    for k in range(chain.n):
        T = transform_compose(T, chain.offsets[k])
        T = transform_compose(T, se3_exp(chain.local_screws[k], q[k]))
    return transform_compose(T, chain.tool)


def joint_exponentials(chain: KinematicChain, q) -> np.ndarray:
    """Prefix products ``P[k] = exp(s_0 q_0) ... exp(s_k q_k)``."""
    q = _q(chain, q)
    out = np.empty((chain.n, 4, 4))
    T = np.eye(4)
    for k in range(chain.n):
        T = transform_compose(T, se3_exp(chain.screws[k], q[k]))
        out[k] = T
    return out


def fk_poe(chain: KinematicChain, q) -> np.ndarray:
    """End-point pose ``exp(s_1 q_1) ... exp(s_n q_n) T0``."""
    return transform_compose(joint_exponentials(chain, q)[-1], chain.home_pose)


fk = fk_poe


def space_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """6 x n world-frame Jacobian; column i is joint i's current screw axis."""
    P = joint_exponentials(chain, q)
    J = np.empty((6, chain.n))
    J[:, 0] = chain.screws[0]
    for k in range(1, chain.n):
        J[:, k] = adjoint(P[k - 1]) @ chain.screws[k]
    return J


def body_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """6 x n end-effector-frame Jacobian.

    Uses body-frame screws ``B_i = Ad(T0^-1) s_i`` and accumulates
    ``exp(-B_n q_n) ... exp(-B_{i+1} q_{i+1})`` from the tip backwards.
    """
    q = _q(chain, q)
    AdMinv = adjoint(transform_inverse(chain.home_pose))
    B = np.array([AdMinv @ s for s in chain.screws])
    J = np.empty((6, chain.n))
    J[:, -1] = B[-1]
    T = np.eye(4)
    for k in range(chain.n - 1, -1, -1):
        if k < chain.n - 1:
            J[:, k] = adjoint(T) @ B[k]
        T = transform_compose(T, se3_exp(B[k], -q[k]))
    return J


def endpoint_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """6 x n Jacobian of the end-point velocity, world orientation.

    The angular rows match the space Jacobian, the linear rows are the
    velocity of the end point itself: ``v + w x p_e``.
    """
    Js = space_jacobian(chain, q)
    p = fk_poe(chain, q)[:3, 3]
    Je = Js.copy()
    Je[3:] = Js[3:] + np.cross(Js[:3].T, p).T
    return Je


def positional_jacobian(chain: KinematicChain, q) -> np.ndarray:
    """3 x n derivative of the end-point position."""
    return endpoint_jacobian(chain, q)[3:]


def mass_point_positions(chain: KinematicChain, q) -> np.ndarray:
    """Current world positions (n, 3) of the link point masses."""
    if chain.mass_points is None:
        raise MissingMassData("chain has no link mass data")
    P = joint_exponentials(chain, q)
    return np.einsum("kij,kj->ki", P[:, :3, :3], chain.mass_points) + P[:, :3, 3]


def mass_point_jacobians(chain: KinematicChain, q) -> np.ndarray:
    """(n, 3, n) linear Jacobians of each link point mass."""
    Js = space_jacobian(chain, q)
    pts = mass_point_positions(chain, q)
    n = chain.n
    out = np.zeros((n, 3, n))
    for i in range(n):
        cols = Js[:, : i + 1]
        out[i, :, : i + 1] = cols[3:] + np.cross(cols[:3].T, pts[i]).T
    return out


def static_torque(J, f) -> np.ndarray:
    """Joint torques ``J^T f`` that balance an end-point wrench or force."""
    J = np.asarray(J, dtype=float)
    f = np.asarray(f, dtype=float).reshape(-1)
    if J.ndim != 2 or J.shape[0] != f.shape[0]:
        raise DimensionMismatch(f"J has shape {J.shape}, force has {f.shape[0]} entries")
    return J.T @ f


def static_force(J, tau) -> np.ndarray:
    """End-point force balanced by joint torques: solves ``J^T f = tau``.

    Raises:
        SingularJacobian: J not square or condition number >= 1e12.
    """
    J = np.asarray(J, dtype=float)
    tau = np.asarray(tau, dtype=float).reshape(-1)
    if J.ndim != 2 or J.shape[0] != J.shape[1]:
        raise SingularJacobian(f"static force needs a square Jacobian, got {J.shape}")
    if J.shape[1] != tau.shape[0]:
        raise DimensionMismatch(f"J has shape {J.shape}, tau has {tau.shape[0]} entries")
    if not np.isfinite(np.linalg.cond(J)) or np.linalg.cond(J) >= COND_LIMIT:
        raise SingularJacobian("Jacobian is singular or ill-conditioned")
    return np.linalg.solve(J.T, tau)

