"""Loop-style kernels compiled with numba.

Each kernel here has a numpy counterpart in the module that owns the math
(``se3``, ``ik``, ``dynamics``, ``actuator``). Public functions there take a
``backend`` argument and dispatch to these kernels when numba is enabled.
With ``ROBOKIN_DISABLE_NUMBA=1`` the functions below stay plain Python and
remain callable, only slowly.
"""
import math

import numpy as np

from ._jit import njit


@njit
def _rodrigues(wx, wy, wz, out):
    th2 = wx * wx + wy * wy + wz * wz
    th = math.sqrt(th2)
    if th < 1e-8:
        a = 1.0 - th2 / 6.0
        b = 0.5 - th2 / 24.0
    else:
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
    out[0, 0] = 1.0 - b * (wy * wy + wz * wz)
    out[1, 1] = 1.0 - b * (wx * wx + wz * wz)
    out[2, 2] = 1.0 - b * (wx * wx + wy * wy)
    out[0, 1] = -a * wz + b * wx * wy
    out[1, 0] = a * wz + b * wx * wy
    out[0, 2] = a * wy + b * wx * wz
    out[2, 0] = -a * wy + b * wx * wz
    out[1, 2] = -a * wx + b * wy * wz
    out[2, 1] = a * wx + b * wy * wz


@njit
def rot_exp_batch(W):
    n = W.shape[0]
    out = np.empty((n, 3, 3))
    for i in range(n):
        _rodrigues(W[i, 0], W[i, 1], W[i, 2], out[i])
    return out


@njit
def rot_log_batch(R):
    n = R.shape[0]
    out = np.empty((n, 3))
    for i in range(n):
        r = R[i]
        sx = r[2, 1] - r[1, 2]
        sy = r[0, 2] - r[2, 0]
        sz = r[1, 0] - r[0, 1]
        sn = math.sqrt(sx * sx + sy * sy + sz * sz)
        angle = math.atan2(sn, r[0, 0] + r[1, 1] + r[2, 2] - 1.0)
        if angle == 0.0 or (sn == 0.0 and angle < 2.5):
            out[i, 0] = 0.0
            out[i, 1] = 0.0
            out[i, 2] = 0.0
            continue
        if angle < 2.5:
            f = angle / sn
            out[i, 0] = sx * f
            out[i, 1] = sy * f
            out[i, 2] = sz * f
            continue
        c = math.cos(angle)
        k = 0
        for j in range(1, 3):
            if r[j, j] > r[k, k]:
                k = j
        col = np.empty(3)
        for j in range(3):
            bjk = 0.5 * (r[j, k] + r[k, j])
            if j == k:
                bjk -= c
            col[j] = bjk / (1.0 - c)
        nrm = math.sqrt(col[0] * col[0] + col[1] * col[1] + col[2] * col[2])
        for j in range(3):
            col[j] /= nrm
        dot = col[0] * sx + col[1] * sy + col[2] * sz
        if sn > 1e-12:
            flip = dot < 0.0
        else:
            m = 0
            for j in range(1, 3):
                if abs(col[j]) > abs(col[m]):
                    m = j
            flip = col[m] < 0.0
        sgn = -1.0 if flip else 1.0
        for j in range(3):
            out[i, j] = sgn * col[j] * angle
    return out


@njit
def _screw_exp_into(s, q, out):
    wx, wy, wz = s[0], s[1], s[2]
    vx, vy, vz = s[3], s[4], s[5]
    for a in range(4):
        for b in range(4):
            out[a, b] = 0.0
    out[3, 3] = 1.0
    if wx * wx + wy * wy + wz * wz < 1e-18:
        out[0, 0] = 1.0
        out[1, 1] = 1.0
        out[2, 2] = 1.0
        out[0, 3] = vx * q
        out[1, 3] = vy * q
        out[2, 3] = vz * q
        return
    _rodrigues(wx * q, wy * q, wz * q, out[:3, :3])
    c1 = 1.0 - math.cos(q)
    c2 = q - math.sin(q)
    # w x v and w x (w x v)
    ax = wy * vz - wz * vy
    ay = wz * vx - wx * vz
    az = wx * vy - wy * vx
    bx = wy * az - wz * ay
    by = wz * ax - wx * az
    bz = wx * ay - wy * ax
    out[0, 3] = q * vx + c1 * ax + c2 * bx
    out[1, 3] = q * vy + c1 * ay + c2 * by
    out[2, 3] = q * vz + c1 * az + c2 * bz


@njit
def _adjoint_apply(T, s, out):
    # out = Ad(T) s
    for a in range(3):
        w = 0.0
        v = 0.0
        for b in range(3):
            w += T[a, b] * s[b]
            v += T[a, b] * s[3 + b]
        out[a] = w
        out[3 + a] = v
    px, py, pz = T[0, 3], T[1, 3], T[2, 3]
    wx, wy, wz = out[0], out[1], out[2]
    out[3] += py * wz - pz * wy
    out[4] += pz * wx - px * wz
    out[5] += px * wy - py * wx


@njit
def space_jacobian_batch(screws, Q):
    N = Q.shape[0]
    n = screws.shape[0]
    out = np.empty((N, 6, n))
    T = np.empty((4, 4))
    E = np.empty((4, 4))
    tmp = np.empty((4, 4))
    col = np.empty(6)
    for i in range(N):
        for a in range(4):
            for b in range(4):
                T[a, b] = 1.0 if a == b else 0.0
        for k in range(n):
            _adjoint_apply(T, screws[k], col)
            for a in range(6):
                out[i, a, k] = col[a]
            _screw_exp_into(screws[k], Q[i, k], E)
            for a in range(4):
                for b in range(4):
                    acc = 0.0
                    for c in range(4):
                        acc += T[a, c] * E[c, b]
                    tmp[a, b] = acc
            for a in range(4):
                for b in range(4):
                    T[a, b] = tmp[a, b]
    return out


@njit
def _two_link_accel(x, tau, L1, L2, m1, m2, g):
    t1, t2, d1, d2 = x[0], x[1], x[2], x[3]
    c2 = math.cos(t2)
    s2 = math.sin(t2)
    m11 = m1 * L1 * L1 + m2 * (L1 * L1 + 2.0 * L1 * L2 * c2 + L2 * L2)
    m12 = m2 * (L1 * L2 * c2 + L2 * L2)
    m22 = m2 * L2 * L2
    h = m2 * L1 * L2 * s2
    cc1 = -h * (2.0 * d1 * d2 + d2 * d2)
    cc2 = h * d1 * d1
    g12 = m2 * g * L2 * math.cos(t1 + t2)
    g1 = (m1 + m2) * L1 * g * math.cos(t1) + g12
    r1 = tau[0] - cc1 - g1
    r2 = tau[1] - cc2 - g12
    det = m11 * m22 - m12 * m12
    a1 = (m22 * r1 - m12 * r2) / det
    a2 = (m11 * r2 - m12 * r1) / det
    return d1, d2, a1, a2


@njit
def two_link_rollout(x0, tau, L1, L2, m1, m2, g, h, steps):
    out = np.empty((steps + 1, 4))
    out[0] = x0
    x = x0.copy()
    xs = np.empty(4)
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    for s in range(steps):
        k1[0], k1[1], k1[2], k1[3] = _two_link_accel(x, tau, L1, L2, m1, m2, g)
        for j in range(4):
            xs[j] = x[j] + 0.5 * h * k1[j]
        k2[0], k2[1], k2[2], k2[3] = _two_link_accel(xs, tau, L1, L2, m1, m2, g)
        for j in range(4):
            xs[j] = x[j] + 0.5 * h * k2[j]
        k3[0], k3[1], k3[2], k3[3] = _two_link_accel(xs, tau, L1, L2, m1, m2, g)
        for j in range(4):
            xs[j] = x[j] + h * k3[j]
        k4[0], k4[1], k4[2], k4[3] = _two_link_accel(xs, tau, L1, L2, m1, m2, g)
        for j in range(4):
            x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        out[s + 1] = x
    return out


@njit
def _matvec3(A, x, out):
    for a in range(3):
        out[a] = A[a, 0] * x[0] + A[a, 1] * x[1] + A[a, 2] * x[2]


@njit
def _euler_rate(I, Iinv, tau, w, out):
    # w_dot = I^-1 (tau - w x I w)
    L = np.empty(3)
    _matvec3(I, w, L)
    r = np.empty(3)
    r[0] = tau[0] - (w[1] * L[2] - w[2] * L[1])
    r[1] = tau[1] - (w[2] * L[0] - w[0] * L[2])
    r[2] = tau[2] - (w[0] * L[1] - w[1] * L[0])
    _matvec3(Iinv, r, out)


@njit
def spin_rollout(I, Iinv, w0, tau, h, steps):
    out = np.empty((steps + 1, 3))
    out[0] = w0
    w = w0.copy()
    ws = np.empty(3)
    k1 = np.empty(3)
    k2 = np.empty(3)
    k3 = np.empty(3)
    k4 = np.empty(3)
    for s in range(steps):
        _euler_rate(I, Iinv, tau, w, k1)
        for j in range(3):
            ws[j] = w[j] + 0.5 * h * k1[j]
        _euler_rate(I, Iinv, tau, ws, k2)
        for j in range(3):
            ws[j] = w[j] + 0.5 * h * k2[j]
        _euler_rate(I, Iinv, tau, ws, k3)
        for j in range(3):
            ws[j] = w[j] + h * k3[j]
        _euler_rate(I, Iinv, tau, ws, k4)
        for j in range(3):
            w[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j])
        out[s + 1] = w
    return out


# motor parameter vector layout
KA, KM, BM, TCP, TCM, IM, IMAX, GR, BL, TCL, IL = range(11)


@njit
def motor_accel(prm, u, omega, sign, tau_d):
    """Shaft acceleration with the Coulomb direction fixed to ``sign``.

    ``sign = 0`` means the shaft is in the stiction band: it stays put unless
    the net drive torque exceeds the Coulomb level.
    """
    G = prm[GR]
    i = prm[KA] * u
    if i > prm[IMAX]:
        i = prm[IMAX]
    elif i < -prm[IMAX]:
        i = -prm[IMAX]
    b_eff = prm[BM] + prm[BL] / (G * G)
    inertia = prm[IM] + prm[IL] / (G * G)
    drive = prm[KM] * i - tau_d / G - b_eff * omega
    if sign > 0:
        coulomb = prm[TCP] + prm[TCL] / G
    elif sign < 0:
        coulomb = prm[TCM] - prm[TCL] / G
    else:
        up = prm[TCP] + prm[TCL] / G
        down = prm[TCM] - prm[TCL] / G
        if drive > up:
            coulomb = up
        elif drive < down:
            coulomb = down
        else:
            return 0.0
    return (drive - coulomb) / inertia


@njit
def motor_sign(prm, u, omega, tau_d, band):
    if omega > band:
        return 1
    if omega < -band:
        return -1
    a = motor_accel(prm, u, 0.0, 0, tau_d)
    if a > 0.0:
        return 1
    if a < 0.0:
        return -1
    return 0


@njit
def zoh(times, values, t):
    # last sample with time <= t; before the first sample hold the first value
    k = np.searchsorted(times, t, side="right") - 1
    if k < 0:
        k = 0
    return values[k]


@njit
def motor_rollout(prm, times, volts, theta0, omega0, t0, tau_d, dt, steps, band):
    out = np.empty((steps + 1, 4))
    th = theta0
    om = omega0
    t = t0
    out[0, 0] = t
    out[0, 1] = th
    out[0, 2] = om
    out[0, 3] = zoh(times, volts, t)
    for s in range(steps):
        u = zoh(times, volts, t)
        sg = motor_sign(prm, u, om, tau_d, band)
        if sg == 0:
            om = 0.0
        else:
            a1 = motor_accel(prm, u, om, sg, tau_d)
            o2 = om + 0.5 * dt * a1
            a2 = motor_accel(prm, u, o2, sg, tau_d)
            o3 = om + 0.5 * dt * a2
            a3 = motor_accel(prm, u, o3, sg, tau_d)
            o4 = om + dt * a3
            a4 = motor_accel(prm, u, o4, sg, tau_d)
            th += dt / 6.0 * (om + 2.0 * o2 + 2.0 * o3 + o4)
            om += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            # no sign reversal inside one step: Coulomb would have caught it
            if om * sg < 0.0:
                om = 0.0
        t = t0 + (s + 1) * dt
        out[s + 1, 0] = t
        out[s + 1, 1] = th
        out[s + 1, 2] = om
        out[s + 1, 3] = zoh(times, volts, t)
    return out
