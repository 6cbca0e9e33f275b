"""Command-line front end.

Exit codes: 0 success, 2 input or validation error, 3 numerical failure,
4 IK non-convergence under ``--strict``.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .actuator import VoltageProfile, simulate_motor
from .dynamics import ArmState, euler_lagrange_torque, forward_dynamics, gravity_torque, mass_matrix_general
from .errors import InputError, NumericalError
from .ik import (
    SINGULAR_RATIO,
    IkSettings,
    config_grid,
    random_configs,
    singularity_scan,
    solve_ik,
)
from .kinematics import (
    REVOLUTE,
    body_jacobian,
    endpoint_jacobian,
    fk_chain_rule,
    fk_poe,
    positional_jacobian,
    space_jacobian,
)
from .robot_io import dumps, load_motor, load_robot
from .se3 import check_transform

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_NOT_CONVERGED = 0, 2, 3, 4


class CliInputError(InputError):
    pass


def _fmt(x) -> str:
    return repr(float(x))


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, float) and not math.isfinite(x):
        return repr(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _digest(args, files) -> str:
    h = hashlib.sha256()
    for f in files:
        h.update(Path(f).read_bytes())
    skip = {"func", "out", "format"}
    payload = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    h.update(json.dumps(payload, sort_keys=True, default=str).encode())
    return h.hexdigest()


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _result(command, args, files, outputs, diagnostics) -> dict:
    return {
        "command": command,
        "inputs_digest": _digest(args, files),
        "outputs": _jsonable(outputs),
        "diagnostics": _jsonable(diagnostics),
    }


def _emit_json(result, out) -> None:
    _emit(dumps(result), out)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else _fmt(v) for v in r])
    return buf.getvalue()


def _angles(chain, values, degrees, name):
    q = np.asarray(values if values is not None else np.zeros(chain.n), dtype=float)
    if q.shape != (chain.n,):
        raise CliInputError(f"--{name} needs {chain.n} values, got {q.shape[0]}")
    if degrees:
        rev = np.array([k == REVOLUTE for k in chain.kinds])
        q = np.where(rev, np.deg2rad(q), q)
    return q


def _range_warnings(chain, q):
    return [f"joint {k}: |q| = {abs(v)!r} exceeds 2*pi" for k, v in enumerate(q)
            if chain.kinds[k] == REVOLUTE and abs(v) > 2.0 * math.pi]


def cmd_fk(args) -> int:
    chain = load_robot(args.robot)
    q = _angles(chain, args.q, args.degrees, "q")
    T_poe, T_chain = fk_poe(chain, q), fk_chain_rule(chain, q)
    T = T_poe if args.method == "poe" else T_chain
    outputs = {"pose": T, "position": T[:3, 3]}
    diag = {"method": args.method, "method_disagreement": float(np.max(np.abs(T_poe - T_chain))),
            "warnings": _range_warnings(chain, q)}
    _emit_json(_result("fk", args, [args.robot], outputs, diag), args.out)
    return EXIT_OK


def cmd_jacobian(args) -> int:
    chain = load_robot(args.robot)
    q = _angles(chain, args.q, args.degrees, "q")
    fn = {"world": space_jacobian, "body": body_jacobian, "endpoint": endpoint_jacobian,
          "position": positional_jacobian}[args.frame]
    J = fn(chain, q)
    sv = np.linalg.svd(J, compute_uv=False)
    # singularity is judged on the full space Jacobian in every frame
    report = singularity_scan(chain, q[None, :])[0]
    outputs = {"jacobian": J, "singular_values": sv}
    diag = {"frame": args.frame, "sigma_min": report.sigma_min, "condition": report.condition,
            "singular": report.flagged, "warnings": _range_warnings(chain, q)}
    if report.det is not None:
        diag["det"] = report.det
    _emit_json(_result("jacobian", args, [args.robot], outputs, diag), args.out)
    return EXIT_OK


def _goal(args, chain):
    if args.goal is not None:
        if len(args.goal) != 16:
            raise CliInputError("--goal needs 16 numbers (row-major 4x4)")
        try:
            return check_transform(np.array(args.goal, dtype=float).reshape(4, 4))
        except InputError as exc:
            raise CliInputError(f"--goal: {exc}") from exc
    if args.goal_q is not None:
        return fk_poe(chain, _angles(chain, args.goal_q, args.degrees, "goal-q"))
    raise CliInputError("give --goal or --goal-q")


def cmd_ik(args) -> int:
    chain = load_robot(args.robot)
    goal = _goal(args, chain)
    q0 = _angles(chain, args.q0, args.degrees, "q0")
    try:
        settings = IkSettings(step_scale=args.lambda_step, tol=args.tol, max_iters=args.max_iters,
                              dls_damping=args.lambda_dls, use_dls=not args.no_dls)
    except ValueError as exc:
        raise CliInputError(str(exc)) from exc
    res = solve_ik(chain, q0, goal, settings)
    outputs = {"q": res.q, "converged": res.converged, "pose": fk_poe(chain, res.q)}
    diag = {"iterations": res.iters, "final_loss": res.final_loss, "loss_trace": res.loss_trace,
            "warnings": _range_warnings(chain, res.q)}
    _emit_json(_result("ik", args, [args.robot], outputs, diag), args.out)
    if args.strict and not res.converged:
        print(f"error: IK did not converge (final loss {res.final_loss!r})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def parse_grid(text: str, n: int, degrees: bool):
    """``lo:hi:count`` for every joint, or one such triple per joint separated by commas."""
    parts = [p for p in text.split(",") if p.strip()]
    if len(parts) == 1:
        parts = parts * n
    if len(parts) != n:
        raise CliInputError(f"--grid needs 1 or {n} ranges, got {len(parts)}")
    lows, highs, counts = [], [], []
    for p in parts:
        try:
            lo, hi, c = p.split(":")
            lo, hi, c = float(lo), float(hi), int(c)
        except ValueError as exc:
            raise CliInputError(f"bad grid range {p!r}; expected lo:hi:count") from exc
        if c < 1:
            raise CliInputError(f"grid count must be positive in {p!r}")
        if degrees:
            lo, hi = math.radians(lo), math.radians(hi)
        lows.append(lo)
        highs.append(hi)
        counts.append(c)
    return config_grid(lows, highs, counts)


def cmd_scan(args) -> int:
    chain = load_robot(args.robot)
    if (args.grid is None) == (args.samples is None):
        raise CliInputError("give exactly one of --grid or --samples")
    if args.grid is not None:
        Q = parse_grid(args.grid, chain.n, args.degrees)
    else:
        if args.samples < 1:
            raise CliInputError("--samples must be positive")
        Q = random_configs(chain.n, args.samples, args.seed)
    reports = singularity_scan(chain, Q, threshold=args.threshold, backend=args.backend)
    header = ["index"] + [f"q{k}" for k in range(chain.n)] + ["det", "sigma_min", "condition", "flagged"]
    rows = []
    for i, r in enumerate(reports):
        rows.append([str(i)] + list(r.config) + [
            "" if r.det is None else r.det, r.sigma_min, r.condition, "1" if r.flagged else "0"])
    if args.format == "csv":
        _emit(_csv_text(header, rows), args.out)
    else:
        outputs = {"columns": header, "rows": rows}
        diag = {"configs": len(reports), "flagged": sum(r.flagged for r in reports)}
        _emit_json(_result("singular-scan", args, [args.robot], outputs, diag), args.out)
    return EXIT_OK


def cmd_dynamics(args) -> int:
    chain = load_robot(args.robot)
    th = _angles(chain, args.theta, args.degrees, "theta")
    td = _angles(chain, args.theta_dot, args.degrees, "theta-dot")
    M = mass_matrix_general(chain, th)
    g = gravity_torque(chain, th)
    if args.direction == "inverse":
        tdd = _angles(chain, args.theta_ddot, args.degrees, "theta-ddot")
        tau = euler_lagrange_torque(chain, ArmState(th, td, tdd))
        outputs = {"tau": tau}
    else:
        if args.tau is None:
            raise CliInputError("--direction forward needs --tau")
        tau = np.asarray(args.tau, dtype=float)
        if tau.shape != (chain.n,):
            raise CliInputError(f"--tau needs {chain.n} values")
        tdd = forward_dynamics(chain, th, td, tau)
        if args.degrees:
            rev = np.array([k == REVOLUTE for k in chain.kinds])
            tdd = np.where(rev, np.rad2deg(tdd), tdd)
        outputs = {"theta_ddot": tdd}
    outputs.update({"mass_matrix": M, "gravity_torque": g})
    diag = {"direction": args.direction, "warnings": _range_warnings(chain, th)}
    _emit_json(_result("dynamics", args, [args.robot], outputs, diag), args.out)
    return EXIT_OK


def cmd_motor(args) -> int:
    motor, gear, state, tau_d = load_motor(args.params)
    try:
        profile = VoltageProfile.from_csv(args.profile)
    except OSError as exc:
        raise CliInputError(f"cannot read {args.profile}: {exc.strerror or exc}") from exc
    except ValueError as exc:
        raise CliInputError(f"{args.profile}: {exc}") from exc
    if not args.dt > 0.0 or args.steps < 0:
        raise CliInputError("need --dt > 0 and --steps >= 0")
    tr = simulate_motor(motor, gear, profile, state, args.dt, args.steps, tau_d, backend=args.backend)
    header = ["t", "theta", "omega", "u"]
    rows = np.column_stack([tr.t, tr.theta, tr.omega, tr.u])
    if args.format == "csv":
        _emit(_csv_text(header, rows), args.out)
    else:
        outputs = {"columns": header, "rows": rows}
        diag = {"steps": args.steps, "final_omega": float(tr.omega[-1])}
        _emit_json(_result("motor", args, [args.params, args.profile], outputs, diag), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="robokin", description="Robot kinematics and dynamics toolkit.")
    ap.add_argument("--version", action="version", version=f"robokin {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, angles=True):
        p.add_argument("--out", help="write output to this file instead of stdout")
        if angles:
            p.add_argument("--degrees", action="store_true", help="angles given in degrees")

    p = sub.add_parser("fk", help="forward kinematics")
    p.add_argument("robot")
    p.add_argument("--q", type=float, nargs="+", help="joint values (default all zero)")
    p.add_argument("--method", choices=["poe", "chain"], default="poe")
    common(p)
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("jacobian", help="Jacobian and singular values")
    p.add_argument("robot")
    p.add_argument("--q", type=float, nargs="+")
    p.add_argument("--frame", choices=["world", "body", "endpoint", "position"], default="world")
    common(p)
    p.set_defaults(func=cmd_jacobian)

    p = sub.add_parser("ik", help="pose-goal inverse kinematics")
    p.add_argument("robot")
    p.add_argument("--goal", type=float, nargs="+", help="goal pose, 16 numbers row-major")
    p.add_argument("--goal-q", type=float, nargs="+", help="take the goal as the pose of this configuration")
    p.add_argument("--q0", type=float, nargs="+", help="initial configuration (default all zero)")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=200)
    p.add_argument("--lambda-step", type=float, default=0.5)
    p.add_argument("--lambda-dls", type=float, default=1e-4)
    p.add_argument("--no-dls", action="store_true", help="plain inverse instead of damped least squares")
    p.add_argument("--strict", action="store_true", help="exit with code 4 when not converged")
    common(p)
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("singular-scan", aliases=["scan"], help="singular values over a grid or random samples")
    p.add_argument("robot")
    p.add_argument("--grid", help="lo:hi:count, once for all joints or comma-separated per joint")
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=SINGULAR_RATIO, help="flag when sigma_min < threshold * sigma_max")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--backend", choices=["numba", "numpy"])
    common(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("dynamics", help="inverse or forward dynamics")
    p.add_argument("robot")
    p.add_argument("--theta", type=float, nargs="+")
    p.add_argument("--theta-dot", type=float, nargs="+")
    p.add_argument("--theta-ddot", type=float, nargs="+")
    p.add_argument("--tau", type=float, nargs="+")
    p.add_argument("--direction", choices=["inverse", "forward"], default="inverse")
    common(p)
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("motor", help="simulate the DC motor model")
    p.add_argument("params", help="motor parameter file (JSON)")
    p.add_argument("profile", help="input profile CSV with time,volts columns")
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--backend", choices=["numba", "numpy"])
    common(p, angles=False)
    p.set_defaults(func=cmd_motor)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
