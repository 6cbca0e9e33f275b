"""SO(3) and SE(3) primitives.

Rotations are 3x3 ndarrays, transforms are 4x4 homogeneous ndarrays. A
transform written ``T_ab`` maps coordinates expressed in frame a to
coordinates expressed in frame b. All angles are radians.
"""
from __future__ import annotations

import numpy as np

from . import kernels
from ._jit import use_numba
from .errors import BadStructure, InvalidRotation, NotSkewSymmetric

SKEW_TOL = 1e-9
ROTATION_TOL = 1e-9
SMALL_ANGLE = 1e-8
# Above this angle the axis is read from the symmetric part of R.
NEAR_PI_SWITCH = 2.5

_BOTTOM = np.array([0.0, 0.0, 0.0, 1.0])


def hat3(w) -> np.ndarray:
    """Skew-symmetric matrix with ``hat3(w) @ u == cross(w, u)``."""
    x, y, z = np.asarray(w, dtype=float).reshape(3)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee3(m) -> np.ndarray:
    """Inverse of :func:`hat3`.

    Raises:
        NotSkewSymmetric: if ``max|m + m^T| > 1e-9``.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise BadStructure(f"expected a 3x3 matrix, got shape {m.shape}")
    if np.max(np.abs(m + m.T)) > SKEW_TOL:
        raise NotSkewSymmetric("matrix is not skew-symmetric")
    # averaging the mirrored entries is exact for a true hat3 image
    return np.array(
        [(m[2, 1] - m[1, 2]) / 2.0, (m[0, 2] - m[2, 0]) / 2.0, (m[1, 0] - m[0, 1]) / 2.0]
    )


def rot_exp(w, t: float = 1.0) -> np.ndarray:
    """Rodrigues exponential ``exp(hat(w) t)``."""
    wt = np.asarray(w, dtype=float).reshape(3) * t
    theta = float(np.linalg.norm(wt))
    W = hat3(wt)
    if theta < SMALL_ANGLE:
        a = 1.0 - theta * theta / 6.0
        b = 0.5 - theta * theta / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * W + b * (W @ W)


def rot_log(R) -> tuple[np.ndarray, float]:
    """Axis-angle logarithm of a rotation.

    Returns:
        ``(axis, angle)`` with ``angle`` in ``[0, pi]``. For the identity the
        axis is ``(0, 0, 1)``.

    Near ``angle = pi`` the skew part of R carries almost no information, so
    the axis magnitudes come from the symmetric part and only the sign is
    taken from the skew part.
    """
    R = np.asarray(R, dtype=float)
    s = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    sn = float(np.linalg.norm(s))
    angle = float(np.arctan2(sn, np.trace(R) - 1.0))
    if angle == 0.0 or (sn == 0.0 and angle < NEAR_PI_SWITCH):
        return np.array([0.0, 0.0, 1.0]), 0.0
    if angle < NEAR_PI_SWITCH:
        return s / sn, angle
    c = np.cos(angle)
    B = ((R + R.T) / 2.0 - c * np.eye(3)) / (1.0 - c)  # = a a^T
    k = int(np.argmax(np.diag(B)))
    axis = B[:, k] / np.sqrt(B[k, k])
    axis /= np.linalg.norm(axis)
    if sn > 1e-12:
        if axis @ s < 0.0:
            axis = -axis
    elif axis[int(np.argmax(np.abs(axis)))] < 0.0:
        axis = -axis
    return axis, angle


def rot_log_vec(R) -> np.ndarray:
    """Rotation vector ``axis * angle``."""
    axis, angle = rot_log(R)
    return axis * angle


def rot_x(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(t: float) -> np.ndarray:
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def is_rotation(R, tol: float = ROTATION_TOL) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return bool(
        np.max(np.abs(R.T @ R - np.eye(3))) <= tol and abs(np.linalg.det(R) - 1.0) <= tol
    )


def check_rotation(R, tol: float = ROTATION_TOL) -> np.ndarray:
    """Return R as a float array or raise :class:`InvalidRotation`."""
    R = np.asarray(R, dtype=float)
    if not is_rotation(R, tol):
        raise InvalidRotation("matrix is not a proper rotation")
    return R


def make_transform(R=None, p=None) -> np.ndarray:
    """Assemble a validated 4x4 transform from a rotation and translation."""
    T = np.eye(4)
    if R is not None:
        T[:3, :3] = check_rotation(R)
    if p is not None:
        T[:3, 3] = np.asarray(p, dtype=float).reshape(3)
    return T


def check_transform(T, tol: float = ROTATION_TOL) -> np.ndarray:
    """Return T as a float array or raise.

    Raises:
        BadStructure: wrong shape or bottom row not exactly (0, 0, 0, 1).
        InvalidRotation: rotation block not in SO(3).
    """
    T = np.asarray(T, dtype=float)
    if T.shape != (4, 4):
        raise BadStructure(f"expected a 4x4 matrix, got shape {T.shape}")
    if not np.array_equal(T[3], _BOTTOM):
        raise BadStructure("bottom row of a transform must be (0, 0, 0, 1)")
    if not np.all(np.isfinite(T[:3, 3])):
        raise BadStructure("translation is not finite")
    check_rotation(T[:3, :3], tol)
    return T


def transform_compose(a, b) -> np.ndarray:
    """``a @ b`` with the bottom row written exactly."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    T = np.empty((4, 4))
    T[:3, :3] = a[:3, :3] @ b[:3, :3]
    T[:3, 3] = a[:3, :3] @ b[:3, 3] + a[:3, 3]
    T[3] = _BOTTOM
    return T


def transform_inverse(T) -> np.ndarray:
    T = np.asarray(T, dtype=float)
    Rt = T[:3, :3].T
    out = np.empty((4, 4))
    out[:3, :3] = Rt
    out[:3, 3] = -Rt @ T[:3, 3]
    out[3] = _BOTTOM
    return out


def adjoint(T) -> np.ndarray:
    """6x6 adjoint ``[[R, 0], [hat(p) R, R]]`` for (w, v) ordered twists."""
    T = np.asarray(T, dtype=float)
    R = T[:3, :3]
    out = np.zeros((6, 6))
    out[:3, :3] = R
    out[3:, 3:] = R
    out[3:, :3] = hat3(T[:3, 3]) @ R
    return out


def renormalize(R, tol: float = 1e-14, max_iter: int = 50) -> np.ndarray:
    """Project a drifted near-rotation back onto SO(3).

    Iterates ``X <- (X + X^-T) / 2``, which converges to the orthogonal polar
    factor. Nothing else in the package calls this implicitly.
    """
    X = np.asarray(R, dtype=float).copy()
    for _ in range(max_iter):
        Xn = 0.5 * (X + np.linalg.inv(X).T)
        if np.max(np.abs(Xn - X)) < tol:
            return Xn
        X = Xn
    return X


def rot_exp_batch(W, backend=None) -> np.ndarray:
    """Rodrigues exponential of each row of an (N, 3) array of rotation vectors."""
    W = np.ascontiguousarray(W, dtype=float).reshape(-1, 3)
    if use_numba(backend):
        return kernels.rot_exp_batch(W)
    th2 = np.einsum("ij,ij->i", W, W)
    th = np.sqrt(th2)
    small = th < SMALL_ANGLE
    safe = np.where(small, 1.0, th)
    a = np.where(small, 1.0 - th2 / 6.0, np.sin(safe) / safe)
    b = np.where(small, 0.5 - th2 / 24.0, (1.0 - np.cos(safe)) / (safe * safe))
    K = np.zeros((W.shape[0], 3, 3))
    K[:, 0, 1], K[:, 0, 2], K[:, 1, 2] = -W[:, 2], W[:, 1], -W[:, 0]
    K[:, 1, 0], K[:, 2, 0], K[:, 2, 1] = W[:, 2], -W[:, 1], W[:, 0]
    return np.eye(3) + a[:, None, None] * K + b[:, None, None] * (K @ K)


def rot_log_batch(R, backend=None) -> np.ndarray:
    """Rotation vectors (N, 3) of a stack of rotations (N, 3, 3)."""
    R = np.ascontiguousarray(R, dtype=float).reshape(-1, 3, 3)
    if use_numba(backend):
        return kernels.rot_log_batch(R)
    s = np.stack([R[:, 2, 1] - R[:, 1, 2], R[:, 0, 2] - R[:, 2, 0], R[:, 1, 0] - R[:, 0, 1]], axis=1)
    sn = np.linalg.norm(s, axis=1)
    angle = np.arctan2(sn, np.trace(R, axis1=1, axis2=2) - 1.0)
    regular = (angle < NEAR_PI_SWITCH) & (sn > 0.0)
    out = np.zeros((R.shape[0], 3))
    out[regular] = s[regular] * (angle[regular] / sn[regular])[:, None]
    for i in np.flatnonzero(angle >= NEAR_PI_SWITCH):
        out[i] = rot_log_vec(R[i])
    return out
