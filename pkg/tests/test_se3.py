import math

import numpy as np
import pytest
from conftest import random_rotation, random_transform
from hypothesis import given, settings
from hypothesis import strategies as st

from robokin.errors import BadStructure, InvalidRotation, NotSkewSymmetric
from robokin.se3 import (
    adjoint,
    check_rotation,
    check_transform,
    hat3,
    is_rotation,
    make_transform,
    renormalize,
    rot_exp,
    rot_exp_batch,
    rot_log,
    rot_log_batch,
    rot_log_vec,
    rot_z,
    transform_compose,
    transform_inverse,
    vee3,
)

finite = st.floats(-10.0, 10.0, allow_nan=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


def _series_exp(A, terms=30):
    out, term = np.eye(A.shape[0]), np.eye(A.shape[0])
    for k in range(1, terms + 1):
        term = term @ A / k
        out = out + term
    return out


def test_hat3_zero_and_pattern():
    assert np.array_equal(hat3([0, 0, 0]), np.zeros((3, 3)))
    assert np.array_equal(hat3([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])


def test_hat3_matches_cross(rng):
    a, b = rng.normal(size=(2, 1000, 3))
    got = np.einsum("nij,nj->ni", np.array([hat3(x) for x in a]), b)
    assert np.max(np.abs(got - np.cross(a, b))) < 1e-14


def test_vee3():
    assert np.array_equal(vee3(np.zeros((3, 3))), np.zeros(3))
    assert np.array_equal(vee3([[0, -3, 2], [3, 0, -1], [-2, 1, 0]]), [1, 2, 3])
    with pytest.raises(NotSkewSymmetric):
        vee3(np.eye(3))


@given(vec3)
def test_vee_hat_exact(w):
    assert np.array_equal(vee3(hat3(w)), w)


def test_rot_exp_identity_and_30_degrees():
    assert np.array_equal(rot_exp([0, 0, 0]), np.eye(3))
    R = rot_exp([0, 0, 1], math.radians(30))
    assert np.allclose(R[:, 0], [math.cos(math.pi / 6), math.sin(math.pi / 6), 0], atol=1e-15)


def test_rot_exp_series_oracle(rng):
    for _ in range(200):
        w = rng.normal(size=3)
        w *= rng.uniform(0, math.pi) / np.linalg.norm(w)
        assert np.max(np.abs(rot_exp(w) - _series_exp(hat3(w)))) < 1e-12


def test_rot_exp_small_angle_branch():
    w = np.array([3e-9, -1e-9, 2e-9])
    assert np.max(np.abs(rot_exp(w) - _series_exp(hat3(w), 4))) < 1e-16


@given(vec3, st.floats(-3.0, 3.0))
def test_rot_exp_scaling_and_invariants(w, t):
    R = rot_exp(w, t)
    assert np.allclose(R, rot_exp(w * t), atol=1e-12)
    if np.linalg.norm(w * t) <= 4 * math.pi:
        assert is_rotation(R, 1e-9)


def test_rot_log_identity_and_z():
    axis, angle = rot_log(np.eye(3))
    assert angle == 0.0 and np.array_equal(axis, [0, 0, 1])
    axis, angle = rot_log(rot_z(math.pi / 6))
    assert np.allclose(axis, [0, 0, 1], atol=1e-15) and abs(angle - math.pi / 6) < 1e-15


def test_rot_log_near_pi(rng):
    for _ in range(200):
        a = rng.normal(size=3)
        a /= np.linalg.norm(a)
        for angle in (math.pi - 1e-3, math.pi - 1e-7, math.pi):
            R = rot_exp(a, angle)
            ax, ang = rot_log(R)
            assert 0.0 <= ang <= math.pi
            assert np.max(np.abs(rot_exp(ax, ang) - R)) < 1e-7


def test_rot_log_round_trip(rng):
    for _ in range(2000):
        R = random_rotation(rng)
        if rot_log(R)[1] > math.pi - 1e-6:
            continue
        assert np.max(np.abs(rot_exp(rot_log_vec(R)) - R)) < 1e-9


def test_check_rotation_rejects():
    with pytest.raises(InvalidRotation):
        check_rotation(np.diag([1.0, 1.0, -1.0]))
    with pytest.raises(InvalidRotation):
        check_rotation(np.eye(3) * 1.01)


def test_check_transform_bottom_row():
    T = np.eye(4)
    T[3, 3] = 0.0
    with pytest.raises(BadStructure):
        check_transform(T)


def test_compose_and_inverse(rng):
    T = random_transform(rng)
    assert np.array_equal(transform_compose(T, np.eye(4)), T)
    a, b, c = (random_transform(rng) for _ in range(3))
    lhs = transform_compose(transform_compose(a, b), c)
    rhs = transform_compose(a, transform_compose(b, c))
    assert np.max(np.abs(lhs - rhs)) < 1e-12
    assert np.max(np.abs(transform_compose(a, b) - a @ b)) < 1e-15
    assert np.array_equal(transform_inverse(np.eye(4)), np.eye(4))
    inv = transform_inverse(make_transform(p=[1, 2, 3]))
    assert np.array_equal(inv[:3, 3], [-1, -2, -3])
    for _ in range(100):
        T = random_transform(rng)
        assert np.max(np.abs(T @ transform_inverse(T) - np.eye(4))) < 1e-12


def test_adjoint(rng):
    assert np.array_equal(adjoint(np.eye(4)), np.eye(6))
    R = random_rotation(rng)
    A = adjoint(make_transform(R))
    assert np.array_equal(A[:3, :3], R) and np.array_equal(A[3:, 3:], R)
    assert not A[3:, :3].any() and not A[:3, 3:].any()
    for _ in range(100):
        a, b = random_transform(rng), random_transform(rng)
        assert np.max(np.abs(adjoint(a @ b) - adjoint(a) @ adjoint(b))) < 1e-12


def test_renormalize_repairs_drift(rng):
    R = random_rotation(rng) + 1e-6 * rng.normal(size=(3, 3))
    assert not is_rotation(R, 1e-9)
    assert is_rotation(renormalize(R), 1e-12)


@pytest.mark.parametrize("backend", ["numpy", "numba"])
def test_batch_matches_scalar(rng, backend):
    W = rng.normal(size=(300, 3)) * 2.0
    W[0] = 0.0
    W[1] = [0.0, 0.0, math.pi]
    R = rot_exp_batch(W, backend=backend)
    for w, r in zip(W, R):
        assert np.max(np.abs(r - rot_exp(w))) < 1e-14
    V = rot_log_batch(R, backend=backend)
    for r, v in zip(R, V):
        assert np.max(np.abs(rot_exp(v) - r)) < 1e-9


@settings(max_examples=50)
@given(st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_gimbal_collapse_property(tx, tz):
    from robokin.se3 import rot_x, rot_y
    lhs = rot_x(tx) @ rot_y(math.pi / 2) @ rot_z(tz)
    assert np.max(np.abs(lhs - rot_x(tx + tz) @ rot_y(math.pi / 2))) < 1e-12
