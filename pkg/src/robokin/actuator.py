"""DC motor joint: driver, torque constant, friction, gearbox, shaft balance.

The shaft balance, on the motor side, is::

    km ka u - (b_m + b_l / G^2) w - (tau_c + tau_c_l / G) - tau_d / G
        = (I_m + I_l / G^2) w_dot

``tau_d`` is the load-side disturbance torque (for example the torque an arm
link demands from its joint).
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._jit import use_numba

STICTION_BAND = 1e-9


@dataclass(frozen=True)
class MotorParams:
    """Motor-side constants.

    Attributes:
        ka: driver gain, A/V.
        km: torque constant, N m/A.
        b_m: viscous coefficient, N m s/rad.
        tau_c_plus: Coulomb level for positive speed (>= 0).
        tau_c_minus: Coulomb level for negative speed (<= 0).
        inertia_m: rotor inertia, kg m^2.
        i_max: optional current clamp, A.
    """

    ka: float
    km: float
    b_m: float
    inertia_m: float
    tau_c_plus: float = 0.0
    tau_c_minus: float = 0.0
    i_max: float | None = None

    def __post_init__(self):
        if min(self.ka, self.km, self.b_m, self.inertia_m) <= 0.0:
            raise ValueError("ka, km, b_m and inertia_m must be positive")
        if self.tau_c_plus < 0.0 or self.tau_c_minus > 0.0:
            raise ValueError("need tau_c_plus >= 0 and tau_c_minus <= 0")
        if self.i_max is not None and self.i_max <= 0.0:
            raise ValueError("i_max must be positive")


@dataclass(frozen=True)
class GearboxParams:
    """Reduction ratio and load-side constants (zero load by default).

    ``tau_c_l`` is a symmetric Coulomb level: the load friction is
    ``tau_c_l * sign(w)``.
    """

    ratio: float = 1.0
    b_l: float = 0.0
    tau_c_l: float = 0.0
    inertia_l: float = 0.0

    def __post_init__(self):
        if self.ratio <= 0.0:
            raise ValueError("gear ratio must be positive")
        if min(self.b_l, self.tau_c_l, self.inertia_l) < 0.0:
            raise ValueError("load-side constants must be nonnegative")


@dataclass(frozen=True)
class MotorState:
    omega: float = 0.0
    theta: float = 0.0
    t: float = 0.0


@dataclass(frozen=True)
class ReflectedLoad:
    """Load quantities scaled to the motor side."""

    omega: float
    tau: float
    b: float
    tau_c: float
    inertia: float


@dataclass(frozen=True)
class MotorTrajectory:
    t: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    u: np.ndarray

    def __len__(self):
        return self.t.shape[0]

    def state(self, k: int) -> MotorState:
        return MotorState(float(self.omega[k]), float(self.theta[k]), float(self.t[k]))


def driver_current(p: MotorParams, u: float) -> float:
    """``ka u``, clamped to ``+-i_max`` when a clamp is configured."""
    i = p.ka * u
    if p.i_max is not None:
        i = min(max(i, -p.i_max), p.i_max)
    return i


def motor_torque(p: MotorParams, i: float) -> float:
    return p.km * i


def coulomb_torque(p: MotorParams, omega: float) -> float:
    if omega > 0.0:
        return p.tau_c_plus
    if omega < 0.0:
        return p.tau_c_minus
    return 0.0


def friction_torque(p: MotorParams, omega: float) -> float:
    """Viscous plus direction-dependent Coulomb friction; zero at rest."""
    return p.b_m * omega + coulomb_torque(p, omega)


def reflect_load(g: GearboxParams, omega_l: float = 0.0, tau_l: float = 0.0) -> ReflectedLoad:
    """Scale load-side quantities through the gearbox.

    ``w' = w / G``, ``tau' = tau G``, ``b' = b G^2``, ``I' = I G^2`` and
    ``tau_c' = tau_c G``. Power ``tau' w'`` equals ``tau w``.
    """
    G = g.ratio
    return ReflectedLoad(
        omega=omega_l / G,
        tau=tau_l * G,
        b=g.b_l * G * G,
        tau_c=g.tau_c_l * G,
        inertia=g.inertia_l * G * G,
    )


def effective_inertia(p: MotorParams, g: GearboxParams) -> float:
    return p.inertia_m + g.inertia_l / g.ratio**2


def effective_damping(p: MotorParams, g: GearboxParams) -> float:
    return p.b_m + g.b_l / g.ratio**2


def _param_vector(p: MotorParams, g: GearboxParams) -> np.ndarray:
    return np.array([
        p.ka, p.km, p.b_m, p.tau_c_plus, p.tau_c_minus, p.inertia_m,
        math.inf if p.i_max is None else p.i_max,
        g.ratio, g.b_l, g.tau_c_l, g.inertia_l,
    ])


def shaft_acceleration(p: MotorParams, g: GearboxParams, u: float, omega: float,
                       tau_d: float = 0.0) -> float:
    """Motor-side acceleration from the shaft torque balance.

    Inside the stiction band ``|w| < 1e-9`` the shaft is treated as at rest:
    Coulomb friction holds it until the net drive torque exceeds the Coulomb
    level in that direction.
    """
    prm = _param_vector(p, g)
    if abs(omega) < STICTION_BAND:
        return _accel_py(prm, u, 0.0, 0, tau_d)
    return _accel_py(prm, u, omega, 1 if omega > 0.0 else -1, tau_d)


def _accel_py(prm, u, omega, sign, tau_d):
    fn = getattr(kernels.motor_accel, "py_func", kernels.motor_accel)
    return fn(prm, u, omega, sign, tau_d)


class VoltageProfile:
    """Sampled input voltage with zero-order hold.

    Before the first sample the first value is held.
    """

    def __init__(self, times, volts):
        self.times = np.ascontiguousarray(times, dtype=float).reshape(-1)
        self.volts = np.ascontiguousarray(volts, dtype=float).reshape(-1)
        if self.times.shape != self.volts.shape or self.times.size == 0:
            raise ValueError("profile needs matching, nonempty time and volt columns")
        if np.any(np.diff(self.times) < 0.0):
            raise ValueError("profile times must be nondecreasing")

    @classmethod
    def constant(cls, u: float) -> "VoltageProfile":
        return cls([0.0], [u])

    @classmethod
    def from_csv(cls, path) -> "VoltageProfile":
        """Read a two-column ``time,volts`` CSV; a header row is optional."""
        times, volts = [], []
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and "".join(r).strip()]
        for k, row in enumerate(rows):
            try:
                t, v = float(row[0]), float(row[1])
            except (ValueError, IndexError):
                if k == 0:
                    continue  # header
                raise ValueError(f"bad profile row {k + 1}: {row!r}") from None
            times.append(t)
            volts.append(v)
        return cls(times, volts)

    def __call__(self, t: float) -> float:
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        return float(self.volts[max(k, 0)])


def simulate_motor(p: MotorParams, g: GearboxParams, u_of_t, state0: MotorState = MotorState(),
                   dt: float = 1e-3, steps: int = 1000, tau_d: float = 0.0,
                   backend=None) -> MotorTrajectory:
    """Fixed-step RK4 of the shaft balance.

    The input is sampled at the start of each step and held. The Coulomb
    direction is frozen per step; a step that would reverse the speed stops
    the shaft instead.

    Args:
        u_of_t: a :class:`VoltageProfile`, a constant, or a callable of time.
            Callables are sampled on the step grid.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    if isinstance(u_of_t, VoltageProfile):
        prof = u_of_t
    elif callable(u_of_t):
        ts = state0.t + dt * np.arange(steps + 1)
        prof = VoltageProfile(ts, [u_of_t(t) for t in ts])
    else:
        prof = VoltageProfile.constant(float(u_of_t))
    prm = _param_vector(p, g)
    args = (prm, prof.times, prof.volts, float(state0.theta), float(state0.omega), float(state0.t),
            float(tau_d), float(dt), int(steps), STICTION_BAND)
    if use_numba(backend):
        out = kernels.motor_rollout(*args)
    else:
        out = _motor_rollout_py(*args)
    return MotorTrajectory(out[:, 0], out[:, 1], out[:, 2], out[:, 3])


def _motor_rollout_py(prm, times, volts, theta0, omega0, t0, tau_d, dt, steps, band):
    accel = _accel_py

    def sign_at(u, om):
        if om > band:
            return 1
        if om < -band:
            return -1
        a = accel(prm, u, 0.0, 0, tau_d)
        return 1 if a > 0.0 else (-1 if a < 0.0 else 0)

    def hold(t):
        k = int(np.searchsorted(times, t, side="right")) - 1
        return volts[max(k, 0)]

    out = np.empty((steps + 1, 4))
    th, om = theta0, omega0
    out[0] = (t0, th, om, hold(t0))
    for s in range(steps):
        u = hold(t0 + s * dt)
        sg = sign_at(u, om)
        if sg == 0:
            om = 0.0
        else:
            a1 = accel(prm, u, om, sg, tau_d)
            o2 = om + 0.5 * dt * a1
            a2 = accel(prm, u, o2, sg, tau_d)
            o3 = om + 0.5 * dt * a2
            a3 = accel(prm, u, o3, sg, tau_d)
            o4 = om + dt * a3
            a4 = accel(prm, u, o4, sg, tau_d)
            th += dt / 6.0 * (om + 2.0 * o2 + 2.0 * o3 + o4)
            om += dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
            if om * sg < 0.0:
                om = 0.0
        t = t0 + (s + 1) * dt
        out[s + 1] = (t, th, om, hold(t))
    return out


def steady_state_speed(p: MotorParams, g: GearboxParams, u: float) -> float:
    """Motor speed of the linear (no Coulomb, no disturbance) model at rest input ``u``."""
    return p.km * driver_current(p, u) / effective_damping(p, g)


def time_constant(p: MotorParams, g: GearboxParams) -> float:
    return effective_inertia(p, g) / effective_damping(p, g)
