"""Inverse kinematics: pose-goal Newton-Raphson, velocity IK, damped least
squares, the analytic planar 2-link solver and singularity scans.

The stacked error used by the Newton-Raphson update is ``(dw, dp)``, in the
same angular-first order as twists, and is paired with
:func:`robokin.kinematics.endpoint_jacobian`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._jit import use_numba
from .errors import DegenerateTarget, DimensionMismatch, NonPositiveDamping, SingularJacobian, Unreachable
from .kinematics import COND_LIMIT, KinematicChain, _q, endpoint_jacobian, fk_poe
from .se3 import hat3, rot_exp_batch, rot_log_vec, rot_x, rot_y

SINGULAR_RATIO = 1e-6
REACH_TOL = 1e-12


@dataclass(frozen=True)
class IkSettings:
    """Solver settings.

    Attributes:
        step_scale: fraction of the Newton step applied per iteration, in (0, 1].
        tol: convergence threshold on the loss.
        max_iters: iteration budget.
        dls_damping: damping used by the damped least-squares inverse.
        use_dls: damped inverse when True, plain inverse / least squares otherwise.
        adaptive: raise the damping near singularities to
            ``w0 * (1 - sigma_min / sigma0)**2`` when that exceeds ``dls_damping``.
    """

    step_scale: float = 0.5
    tol: float = 1e-6
    max_iters: int = 200
    dls_damping: float = 1e-4
    use_dls: bool = True
    adaptive: bool = False
    adaptive_w0: float = 1e-2
    adaptive_sigma0: float = 1e-1

    def __post_init__(self):
        if not 0.0 < self.step_scale <= 1.0:
            raise ValueError("step_scale must lie in (0, 1]")
        if not self.tol > 0.0:
            raise ValueError("tol must be positive")
        if self.max_iters < 0:
            raise ValueError("max_iters must be nonnegative")
        if self.dls_damping < 0.0:
            raise NonPositiveDamping("dls_damping must be nonnegative")


@dataclass
class IkResult:
    q: np.ndarray
    converged: bool
    iters: int
    final_loss: float
    loss_trace: list = field(default_factory=list)


@dataclass(frozen=True)
class SingularityReport:
    config: np.ndarray
    det: float | None
    sigma_min: float
    condition: float
    flagged: bool


def pose_error(current, target) -> tuple[np.ndarray, np.ndarray, float]:
    """Position error, rotation-vector error and loss ``|dp|^2 + |dw|^2``.

    ``dw`` is the log of ``R_target R^T``, i.e. the world-frame rotation that
    carries the current orientation onto the target.
    """
    current = np.asarray(current, dtype=float)
    target = np.asarray(target, dtype=float)
    dp = target[:3, 3] - current[:3, 3]
    dw = rot_log_vec(target[:3, :3] @ current[:3, :3].T)
    return dp, dw, float(dp @ dp + dw @ dw)


def dls_inverse(J, lam: float) -> np.ndarray:
    """Damped least-squares inverse ``(J^T J + lam I)^-1 J^T``.

    Raises:
        NonPositiveDamping: ``lam < 0``, or ``lam == 0`` with ``J^T J`` singular.
    """
    J = np.asarray(J, dtype=float)
    if J.ndim != 2:
        raise DimensionMismatch("J must be a matrix")
    if lam < 0.0:
        raise NonPositiveDamping(f"damping must be nonnegative, got {lam!r}")
    A = J.T @ J + lam * np.eye(J.shape[1])
    if lam == 0.0 and not np.linalg.cond(A) < COND_LIMIT:
        raise NonPositiveDamping("J^T J is singular; a positive damping is required")
    return np.linalg.solve(A, J.T)


def _damping(J, settings: IkSettings) -> float:
    lam = settings.dls_damping
    if settings.adaptive:
        smin = np.linalg.svd(J, compute_uv=False)[-1] if min(J.shape) else 0.0
        if smin < settings.adaptive_sigma0:
            lam = max(lam, settings.adaptive_w0 * (1.0 - smin / settings.adaptive_sigma0) ** 2)
    return lam


def _plain_solve(J, rhs) -> np.ndarray:
    m, n = J.shape
    if m == n:
        if not np.linalg.cond(J) < COND_LIMIT:
            raise SingularJacobian("Jacobian is singular; enable damped least squares")
        return np.linalg.solve(J, rhs)
    sol, _, rank, _ = np.linalg.lstsq(J, rhs, rcond=None)
    if rank < min(m, n):
        raise SingularJacobian("Jacobian is rank-deficient; enable damped least squares")
    return sol


def velocity_ik(J, nu, settings: IkSettings = IkSettings()) -> np.ndarray:
    """Joint rates producing the twist ``nu`` through ``J``.

    With ``use_dls`` off, a square J is inverted directly and a non-square J
    is solved in the least-squares sense (raising on rank deficiency).
    """
    J = np.asarray(J, dtype=float)
    nu = np.asarray(nu, dtype=float).reshape(-1)
    if J.ndim != 2 or J.shape[0] != nu.shape[0]:
        raise DimensionMismatch(f"J has shape {J.shape}, twist has {nu.shape[0]} entries")
    if settings.use_dls:
        return dls_inverse(J, _damping(J, settings)) @ nu
    return _plain_solve(J, nu)


def _newton_update(chain, q, dp, dw, settings):
    err = np.concatenate([dw, dp])
    dq = velocity_ik(endpoint_jacobian(chain, q), err, settings)
    return q + settings.step_scale * dq


def nr_step(chain: KinematicChain, q, goal, settings: IkSettings = IkSettings()):
    """One damped Newton-Raphson update.

    Returns:
        ``(q_next, loss)`` where ``loss`` is evaluated at the input ``q``.
    """
    q = _q(chain, q)
    dp, dw, loss = pose_error(fk_poe(chain, q), goal)
    if loss == 0.0:
        return q.copy(), 0.0
    return _newton_update(chain, q, dp, dw, settings), loss


def solve_ik(chain: KinematicChain, q0, goal, settings: IkSettings = IkSettings()) -> IkResult:
    """Iterate Newton-Raphson updates until the loss drops to ``settings.tol``.

    The loss is not guaranteed to decrease monotonically. The solution found
    depends on the basin ``q0`` lies in; there is no branch selection.
    """
    q = _q(chain, q0).copy()
    trace = []
    it = 0
    while True:
        dp, dw, loss = pose_error(fk_poe(chain, q), goal)
        trace.append(loss)
        if loss <= settings.tol or it == settings.max_iters:
            return IkResult(q, loss <= settings.tol, it, loss, trace)
        q = _newton_update(chain, q, dp, dw, settings)
        it += 1


def analytic_2link(l1: float, l2: float, y: float, z: float):
    """Closed-form IK of a planar 2-link arm by the law of cosines.

    The arm end point is ``(l1 cos t + l2 cos(t + f), l1 sin t + l2 sin(t + f))``
    in the (y, z) plane, with t measured from the y axis.

    Returns:
        ``((theta, phi), (theta_m, phi_m))``: the solution with
        ``theta = atan2(z, y) - alpha`` and ``phi = pi - beta`` first, then the
        mirrored elbow.

    Raises:
        Unreachable: target outside the annulus ``|l1 - l2| <= r <= l1 + l2``.
        DegenerateTarget: target at the origin with ``l1 == l2``.
    """
    r2 = y * y + z * z
    r = np.sqrt(r2)
    if r <= REACH_TOL:
        if l1 == l2:
            raise DegenerateTarget("target at the base: every shoulder angle works")
        raise Unreachable("target at the base is unreachable for unequal links")
    if r > l1 + l2 + REACH_TOL or r < abs(l1 - l2) - REACH_TOL:
        raise Unreachable(f"target distance {r!r} outside [{abs(l1 - l2)!r}, {l1 + l2!r}]")
    cb = np.clip((l1 * l1 + l2 * l2 - r2) / (2.0 * l1 * l2), -1.0, 1.0)
    ca = np.clip((l1 * l1 + r2 - l2 * l2) / (2.0 * l1 * r), -1.0, 1.0)
    beta, alpha = np.arccos(cb), np.arccos(ca)
    base = np.arctan2(z, y)
    return (float(base - alpha), float(np.pi - beta)), (float(base + alpha), float(beta - np.pi))


def euler_xyz_jacobian(a: float, b: float, c: float) -> np.ndarray:
    """World angular velocity Jacobian of ``R_x(a) R_y(b) R_z(c)``.

    Columns are ``e_x``, ``R_x(a) e_y`` and ``R_x(a) R_y(b) e_z``. At
    ``b = pi/2`` the first and last columns coincide.
    """
    Rx = rot_x(a)
    return np.column_stack([[1.0, 0.0, 0.0], Rx[:, 1], (Rx @ rot_y(b))[:, 2]])


def space_jacobian_batch(chain: KinematicChain, Q, backend=None) -> np.ndarray:
    """Space Jacobians (N, 6, n) for a stack of configurations (N, n)."""
    Q = np.ascontiguousarray(Q, dtype=float).reshape(-1, chain.n)
    S = np.ascontiguousarray(chain.screws)
    if use_numba(backend):
        return kernels.space_jacobian_batch(S, Q)
    N = Q.shape[0]
    R = np.broadcast_to(np.eye(3), (N, 3, 3)).copy()
    p = np.zeros((N, 3))
    out = np.empty((N, 6, chain.n))
    for k in range(chain.n):
        w, v = S[k, :3], S[k, 3:]
        wc = R @ w
        out[:, :3, k] = wc
        out[:, 3:, k] = R @ v + np.cross(p, wc)
        q = Q[:, k]
        if np.linalg.norm(w) < 1e-9:
            Re = np.broadcast_to(np.eye(3), (N, 3, 3))
            pe = q[:, None] * v
        else:
            W = hat3(w)
            Re = rot_exp_batch(q[:, None] * w, backend="numpy")
            pe = (q[:, None] * v + (1.0 - np.cos(q))[:, None] * (W @ v)
                  + (q - np.sin(q))[:, None] * (W @ W @ v))
        p = p + np.einsum("nij,nj->ni", R, pe)
        R = R @ Re
    return out


def singularity_scan(chain: KinematicChain, configs, threshold: float = SINGULAR_RATIO,
                     backend=None) -> list[SingularityReport]:
    """Singular values of the space Jacobian over a set of configurations.

    A configuration is flagged when ``sigma_min < threshold * sigma_max``.
    The determinant is reported for square Jacobians only.
    """
    Q = np.asarray(configs, dtype=float).reshape(-1, chain.n)
    J = space_jacobian_batch(chain, Q, backend)
    sv = np.linalg.svd(J, compute_uv=False)
    smax, smin = sv[:, 0], sv[:, -1]
    dets = np.linalg.det(J) if J.shape[1] == J.shape[2] else None
    reports = []
    for i in range(Q.shape[0]):
        cond = float(smax[i] / smin[i]) if smin[i] > 0.0 else float("inf")
        reports.append(SingularityReport(
            config=Q[i].copy(),
            det=None if dets is None else float(dets[i]),
            sigma_min=float(smin[i]),
            condition=cond,
            flagged=bool(smin[i] < threshold * smax[i]),
        ))
    return reports


def config_grid(lows, highs, counts) -> np.ndarray:
    """Cartesian grid of configurations, last joint varying fastest."""
    axes = [np.linspace(lo, hi, int(c)) for lo, hi, c in zip(lows, highs, counts)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)


def random_configs(n_joints: int, samples: int, seed: int = 0, low: float = -np.pi,
                   high: float = np.pi) -> np.ndarray:
    """Uniform random configurations from a seeded generator."""
    rng = np.random.default_rng(seed)
    return rng.uniform(low, high, size=(samples, n_joints))
