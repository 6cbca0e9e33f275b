"""Time the numba kernels against their pure-numpy counterparts.

Usage::

    python benchmarks/bench_kernels.py [--size N] [--repeat R]

Each case runs once untimed per backend to exclude compilation, then
reports the best of ``--repeat`` runs and the max abs difference between the
two backends' outputs.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from robokin import _jit, models
from robokin.actuator import GearboxParams, MotorParams, VoltageProfile, simulate_motor
from robokin.dynamics import TwoLinkParams, spin_rollout, two_link_rollout
from robokin.ik import space_jacobian_batch
from robokin.se3 import rot_exp_batch, rot_log_batch


def cases(size: int):
    rng = np.random.default_rng(0)
    W = rng.normal(size=(size, 3)) * 1.5
    R = rot_exp_batch(W, backend="numpy")
    leg = models.leg6()
    Q = rng.uniform(-np.pi, np.pi, (size, 6))
    arm = TwoLinkParams(L1=1.0, L2=0.8, m1=1.0, m2=0.5)
    I = np.diag([1.0, 2.0, 3.0])
    steps = max(size // 10, 10)
    motor = MotorParams(ka=2.0, km=0.05, b_m=1e-4, inertia_m=2e-5, tau_c_plus=0.01, tau_c_minus=-0.01)
    gear = GearboxParams(ratio=10.0, b_l=0.01, inertia_l=2e-3)
    prof = VoltageProfile([0.0, 0.01, 0.05], [0.0, 12.0, -6.0])
    return [
        (f"rot_exp_batch ({size})", lambda b: rot_exp_batch(W, backend=b)),
        (f"rot_log_batch ({size})", lambda b: rot_log_batch(R, backend=b)),
        (f"space_jacobian_batch leg6 ({size})", lambda b: space_jacobian_batch(leg, Q, backend=b)),
        (f"two_link_rollout ({steps} steps)",
         lambda b: two_link_rollout(arm, [0.3, -0.4], [1.0, -0.5], 1e-4, steps, backend=b)),
        (f"spin_rollout ({steps} steps)", lambda b: spin_rollout(I, [0.4, 1.0, -0.3], 1e-3, steps, backend=b)),
        (f"simulate_motor ({steps} steps)",
         lambda b: simulate_motor(motor, gear, prof, dt=1e-4, steps=steps, backend=b).omega),
    ]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=20000, help="batch size; rollouts use size/10 steps")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if not _jit.NUMBA_AVAILABLE:
        raise SystemExit("numba is disabled or missing; unset ROBOKIN_DISABLE_NUMBA to compare backends")

    print(f"{'case':<40} {'numpy [ms]':>12} {'numba [ms]':>12} {'speedup':>9} {'max diff':>10}")
    for name, fn in cases(args.size):
        ref, fast = fn("numpy"), fn("numba")
        diff = float(np.max(np.abs(np.asarray(ref) - np.asarray(fast))))
        t_np = min(timeit.repeat(lambda: fn("numpy"), number=1, repeat=args.repeat))
        t_nb = min(timeit.repeat(lambda: fn("numba"), number=1, repeat=args.repeat))
        print(f"{name:<40} {1e3 * t_np:>12.3f} {1e3 * t_nb:>12.3f} {t_np / t_nb:>8.1f}x {diff:>10.1e}")


if __name__ == "__main__":
    main()
