"""Twists, screw axes and wrenches.

Six-vectors are ordered angular-first: twists are ``(w, v)`` and wrenches are
``(tau, f)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadStructure, InvalidScrew, NearPiRotation, NotPlanar, PureTranslation, ZeroTwist
from .se3 import (
    SKEW_TOL,
    adjoint,
    check_transform,
    hat3,
    rot_exp,
    rot_log,
    transform_inverse,
)

SCREW_TOL = 1e-9
NEAR_PI_MARGIN = 1e-6
LOG_SERIES_SWITCH = 1e-4
IDENTITY_ANGLE = 1e-12


@dataclass(frozen=True)
class ScrewGeometry:
    """Axis direction, closest axis point to the origin, pitch and rate.

    ``infinite_pitch`` is set for pure translations, in which case ``pitch``
    holds ``inf`` and ``point`` is the origin.
    """

    axis_dir: np.ndarray
    point: np.ndarray
    pitch: float
    rate: float
    infinite_pitch: bool = False


def _vec6(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape != (6,):
        raise BadStructure(f"expected a 6-vector, got {x.shape[0]} entries")
    return x


def twist_hat(nu) -> np.ndarray:
    """4x4 matrix ``[[hat(w), v], [0, 0]]``."""
    nu = _vec6(nu)
    m = np.zeros((4, 4))
    m[:3, :3] = hat3(nu[:3])
    m[:3, 3] = nu[3:]
    return m


def twist_vee(m) -> np.ndarray:
    """Inverse of :func:`twist_hat`.

    Raises:
        BadStructure: if the bottom row is nonzero or the rotation block is
            not skew-symmetric (tolerance 1e-9).
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (4, 4):
        raise BadStructure(f"expected a 4x4 matrix, got shape {m.shape}")
    if np.max(np.abs(m[3])) > SKEW_TOL:
        raise BadStructure("bottom row of a twist matrix must be zero")
    W = m[:3, :3]
    if np.max(np.abs(W + W.T)) > SKEW_TOL:
        raise BadStructure("rotation block of a twist matrix must be skew-symmetric")
    w = np.array([(W[2, 1] - W[1, 2]) / 2.0, (W[0, 2] - W[2, 0]) / 2.0, (W[1, 0] - W[0, 1]) / 2.0])
    return np.concatenate([w, m[:3, 3]])


def _check_tdot(Tdot) -> np.ndarray:
    Tdot = np.asarray(Tdot, dtype=float)
    if Tdot.shape != (4, 4):
        raise BadStructure(f"expected a 4x4 derivative, got shape {Tdot.shape}")
    if np.max(np.abs(Tdot[3])) > SKEW_TOL:
        raise BadStructure("bottom row of a transform derivative must be zero")
    return Tdot


def twist_world(T, Tdot) -> np.ndarray:
    """World-frame twist ``vee(Tdot T^-1)``; its v equals ``pdot - w x p``."""
    T = check_transform(T)
    return twist_vee(_check_tdot(Tdot) @ transform_inverse(T))


def twist_body(T, Tdot) -> np.ndarray:
    """Body-frame twist ``vee(T^-1 Tdot)``."""
    T = check_transform(T)
    return twist_vee(transform_inverse(T) @ _check_tdot(Tdot))


def twist_change_frame(ad, nu) -> np.ndarray:
    """Apply a 6x6 adjoint to a twist."""
    return np.asarray(ad, dtype=float) @ _vec6(nu)


def is_screw_axis(s, tol: float = SCREW_TOL) -> bool:
    s = np.asarray(s, dtype=float)
    nw = np.linalg.norm(s[:3])
    if abs(nw - 1.0) <= tol:
        return True
    return bool(nw <= tol and abs(np.linalg.norm(s[3:]) - 1.0) <= tol)


def check_screw_axis(s, tol: float = SCREW_TOL) -> np.ndarray:
    s = _vec6(s)
    if not is_screw_axis(s, tol):
        raise InvalidScrew("screw axis needs |w| = 1, or w = 0 and |v| = 1")
    return s


def screw_normalize(nu) -> tuple[np.ndarray, float]:
    """Split a twist into a unit screw axis and a nonnegative rate.

    Raises:
        ZeroTwist: for the zero twist.
    """
    nu = _vec6(nu)
    nw = float(np.linalg.norm(nu[:3]))
    if nw > 0.0:
        return nu / nw, nw
    nv = float(np.linalg.norm(nu[3:]))
    if nv == 0.0:
        raise ZeroTwist("cannot normalize the zero twist")
    return nu / nv, nv


def screw_geometry(nu) -> ScrewGeometry:
    """Geometric screw parameters of a twist.

    The returned point is the axis point closest to the origin, so it is
    orthogonal to the axis direction.
    """
    nu = _vec6(nu)
    w, v = nu[:3], nu[3:]
    nw = float(np.linalg.norm(w))
    if nw == 0.0:
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            raise ZeroTwist("zero twist has no screw axis")
        return ScrewGeometry(v / nv, np.zeros(3), float("inf"), nv, True)
    e = w / nw
    return ScrewGeometry(e, np.cross(e, v) / nw, float(e @ v) / nw, nw, False)


def twist_from_geometry(geom: ScrewGeometry) -> np.ndarray:
    """Rebuild a twist from its screw parameters: ``v = -qd e x p + h e qd``."""
    e, p, qd = geom.axis_dir, geom.point, geom.rate
    if geom.infinite_pitch:
        return np.concatenate([np.zeros(3), e * qd])
    return np.concatenate([e * qd, -qd * np.cross(e, p) + geom.pitch * e * qd])


def se3_exp(s, q: float) -> np.ndarray:
    """Closed-form exponential ``exp(hat(s) q)`` of a unit screw axis."""
    s = check_screw_axis(s)
    w, v = s[:3], s[3:]
    T = np.eye(4)
    if np.linalg.norm(w) <= SCREW_TOL:
        T[:3, 3] = v * q
        return T
    W = hat3(w)
    W2 = W @ W
    T[:3, :3] = rot_exp(w, q)
    T[:3, 3] = (np.eye(3) * q + (1.0 - np.cos(q)) * W + (q - np.sin(q)) * W2) @ v
    return T


def twist_exp(nu, t: float = 1.0) -> np.ndarray:
    """Exponential of an arbitrary twist scaled by ``t``."""
    nu = _vec6(nu) * t
    if not np.any(nu):
        return np.eye(4)
    s, rate = screw_normalize(nu)
    return se3_exp(s, rate)


def se3_log(T) -> tuple[np.ndarray, float]:
    """Logarithm of a transform as ``(screw_axis, q)`` with ``q >= 0``.

    Raises:
        NearPiRotation: rotation angle within 1e-6 of pi, where the screw
            axis is ill-conditioned.
    """
    T = np.asarray(T, dtype=float)
    R, p = T[:3, :3], T[:3, 3]
    axis, angle = rot_log(R)
    if angle < IDENTITY_ANGLE:
        d = float(np.linalg.norm(p))
        if d == 0.0:
            return np.array([0.0, 0.0, 1.0, 0.0, 0.0, 0.0]), 0.0
        return np.concatenate([np.zeros(3), p / d]), d
    if angle > np.pi - NEAR_PI_MARGIN:
        raise NearPiRotation(f"rotation angle {angle!r} is too close to pi")
    W = hat3(axis)
    q = angle
    if q < LOG_SERIES_SWITCH:
        k = q / 12.0 + q**3 / 720.0
    else:
        k = 1.0 / q - 0.5 / np.tan(q / 2.0)
    Ginv = np.eye(3) / q - 0.5 * W + k * (W @ W)
    return np.concatenate([axis, Ginv @ p]), q


def planar_fixed_point(T) -> np.ndarray:
    """Fixed point of a planar (about z) rigid motion.

    Raises:
        NotPlanar: if T is not a rotation about z with xy translation.
        PureTranslation: if the rotation angle is below 1e-9.
    """
    T = np.asarray(T, dtype=float)
    R, p = T[:3, :3], T[:3, 3]
    off = max(abs(R[2, 0]), abs(R[2, 1]), abs(R[0, 2]), abs(R[1, 2]), abs(R[2, 2] - 1.0), abs(p[2]))
    if off > SCREW_TOL:
        raise NotPlanar("transform is not a planar motion about z")
    angle = np.arctan2(R[1, 0], R[0, 0])
    if abs(angle) < 1e-9:
        raise PureTranslation("planar motion has no finite fixed point")
    xy = np.linalg.solve(np.eye(2) - R[:2, :2], p[:2])
    return np.array([xy[0], xy[1], 0.0])


def wrench_change_frame(T_ab, w_b) -> np.ndarray:
    """Express a wrench given in frame b in frame a: ``Ad(T_ab)^T w_b``.

    ``T_ab`` maps frame-a coordinates to frame-b coordinates, so twists obey
    ``nu_b = Ad(T_ab) nu_a`` and the pairing ``nu . w`` is unchanged.
    """
    return adjoint(T_ab).T @ _vec6(w_b)


def power(nu, w) -> float:
    """Full pairing ``tau . w + f . v``."""
    return float(_vec6(nu) @ _vec6(w))


def twist_ad(nu) -> np.ndarray:
    """Lie-bracket matrix ``[[hat(w), 0], [hat(v), hat(w)]]`` of a twist."""
    nu = _vec6(nu)
    out = np.zeros((6, 6))
    W = hat3(nu[:3])
    out[:3, :3] = W
    out[3:, 3:] = W
    out[3:, :3] = hat3(nu[3:])
    return out
