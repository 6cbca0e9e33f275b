"""Robot and motor description files (JSON, ``"format_version": 1``).

Robot file::

    {
      "format_version": 1,
      "name": "planar-3",
      "joints": [{"type": "revolute", "screw": [wx, wy, wz, vx, vy, vz]}, ...],
      "home_pose": [16 numbers, row-major],
      "links": [{"length": 1.0, "mass": 2.0, "com": [x, y, z]}, ...],
      "gravity": [0, 0, -9.81]
    }

Joints use either ``screw`` (world frame at q = 0) or ``axis`` plus
``offset`` (joint-local axis and the 4x4 row-major transform from the
parent joint frame). All joints of a file use the same form. ``com`` is the
world position of the link point mass at q = 0 and defaults to the link end.

Errors name the offending field, e.g. ``joints[2].screw``.
"""
from __future__ import annotations

import json
import math
import re
from pathlib import Path

import jsonschema
import numpy as np

from .actuator import GearboxParams, MotorParams, MotorState
from .errors import InvalidRotation, InvariantViolation, ParseError, RobokinError, SchemaError
from .kinematics import PRISMATIC, REVOLUTE, KinematicChain
from .screw import SCREW_TOL
from .se3 import ROTATION_TOL, is_rotation

FORMAT_VERSION = 1


def _num_array(n):
    return {"type": "array", "items": {"type": "number"}, "minItems": n, "maxItems": n}


ROBOT_SCHEMA = {
    "type": "object",
    "required": ["format_version", "joints", "home_pose"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "name": {"type": "string"},
        "joints": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "type": {"enum": [REVOLUTE, PRISMATIC]},
                    "screw": _num_array(6),
                    "axis": _num_array(3),
                    "offset": _num_array(16),
                },
            },
        },
        "home_pose": _num_array(16),
        "links": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["mass"],
                "properties": {
                    "length": {"type": "number"},
                    "mass": {"type": "number"},
                    "com": _num_array(3),
                },
            },
        },
        "gravity": _num_array(3),
    },
}

MOTOR_SCHEMA = {
    "type": "object",
    "required": ["format_version", "motor"],
    "additionalProperties": False,
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "motor": {
            "type": "object",
            "required": ["ka", "km", "b_m", "inertia_m"],
            "additionalProperties": False,
            "properties": {k: {"type": "number"} for k in
                           ("ka", "km", "b_m", "inertia_m", "tau_c_plus", "tau_c_minus", "i_max")},
        },
        "gearbox": {
            "type": "object",
            "additionalProperties": False,
            "properties": {k: {"type": "number"} for k in ("ratio", "b_l", "tau_c_l", "inertia_l")},
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"omega": {"type": "number"}, "theta": {"type": "number"}, "t": {"type": "number"}},
        },
        "tau_d": {"type": "number"},
    },
}


def format_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def _reject_constant(name):
    raise ValueError(f"non-finite number {name} is not allowed")


def _read_json(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from exc
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _validate(doc, schema):
    validator = jsonschema.Draft202012Validator(schema)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        e = errors[0]
        raise SchemaError(format_path(e.absolute_path), e.message)


def _matrix(values, path) -> np.ndarray:
    T = np.array(values, dtype=float).reshape(4, 4)
    if not np.array_equal(T[3], [0.0, 0.0, 0.0, 1.0]):
        raise InvariantViolation(path, "bottom row must be 0, 0, 0, 1")
    if not is_rotation(T[:3, :3], ROTATION_TOL):
        raise InvariantViolation(path, "rotation block is not orthonormal with det +1")
    return T


def chain_from_dict(doc) -> KinematicChain:
    """Validate a parsed robot document and build the chain."""
    _validate(doc, ROBOT_SCHEMA)
    joints = doc["joints"]
    modes = []
    for k, j in enumerate(joints):
        has_screw = "screw" in j
        has_local = "axis" in j or "offset" in j
        if has_screw and has_local:
            raise SchemaError(f"joints[{k}]", "ambiguous mode: give either screw or axis/offset, not both")
        if not has_screw and not ("axis" in j and "offset" in j):
            raise SchemaError(f"joints[{k}]", "needs a screw, or both axis and offset")
        modes.append("poe" if has_screw else "chain")
    if len(set(modes)) > 1:
        raise SchemaError("joints", "all joints must use the same form (screw or axis/offset)")
    kinds = [j.get("type", REVOLUTE) for j in joints]
    home = _matrix(doc["home_pose"], "home_pose")
    n = len(joints)

    masses = mass_points = lengths = None
    links = doc.get("links")
    if links is not None:
        if len(links) != n:
            raise InvariantViolation("links", f"expected {n} entries (one per joint), got {len(links)}")
        masses = np.array([lk["mass"] for lk in links], dtype=float)
        for k, m in enumerate(masses):
            if not m > 0.0:
                raise InvariantViolation(f"links[{k}].mass", "mass must be positive")
        if any("length" in lk for lk in links):
            lengths = np.array([lk.get("length", math.nan) for lk in links], dtype=float)
            for k, lk in enumerate(links):
                if "length" in lk and not lk["length"] > 0.0:
                    raise InvariantViolation(f"links[{k}].length", "length must be positive")
        has_com = ["com" in lk for lk in links]
        if any(has_com):
            if not all(has_com):
                raise InvariantViolation("links", "give com for every link or for none")
            mass_points = np.array([lk["com"] for lk in links], dtype=float)
    gravity = doc.get("gravity", [0.0, 0.0, -9.81])
    name = doc.get("name", "")
    common = dict(kinds=kinds, masses=masses, mass_points=mass_points, lengths=lengths,
                  gravity=gravity, name=name)

    if modes[0] == "poe":
        screws = np.array([j["screw"] for j in joints], dtype=float)
        for k, (kind, s) in enumerate(zip(kinds, screws)):
            nw, nv = np.linalg.norm(s[:3]), np.linalg.norm(s[3:])
            if kind == REVOLUTE and abs(nw - 1.0) > SCREW_TOL:
                raise InvariantViolation(f"joints[{k}].screw", f"revolute screw needs |w| = 1, got {nw!r}")
            if kind == PRISMATIC and (nw > SCREW_TOL or abs(nv - 1.0) > SCREW_TOL):
                raise InvariantViolation(f"joints[{k}].screw", "prismatic screw needs w = 0 and |v| = 1")
        return KinematicChain.from_screws(screws, home, **common)

    axes = np.array([j["axis"] for j in joints], dtype=float)
    offsets = []
    for k, j in enumerate(joints):
        if abs(np.linalg.norm(axes[k]) - 1.0) > SCREW_TOL:
            raise InvariantViolation(f"joints[{k}].axis", "axis must be a unit vector")
        offsets.append(_matrix(j["offset"], f"joints[{k}].offset"))
    return KinematicChain.from_local(axes, offsets, home_pose=home, **common)


def load_robot(path) -> KinematicChain:
    """Load and validate a robot file.

    Raises:
        ParseError: unreadable file or invalid JSON.
        SchemaError: structural problem, including mixing joint forms.
        InvariantViolation: values that break chain invariants.
    """
    doc = _read_json(path)
    try:
        return chain_from_dict(doc)
    except (SchemaError, InvariantViolation):
        raise
    except (RobokinError, InvalidRotation) as exc:
        raise InvariantViolation("", str(exc)) from exc


def chain_to_dict(chain: KinematicChain) -> dict:
    """Serialize a chain in screw form."""
    doc = {
        "format_version": FORMAT_VERSION,
        "name": chain.name,
        "joints": [{"type": k, "screw": s.tolist()} for k, s in zip(chain.kinds, chain.screws)],
        "home_pose": chain.home_pose.reshape(-1).tolist(),
        "gravity": chain.gravity.tolist(),
    }
    if chain.masses is not None:
        links = []
        for k in range(chain.n):
            lk = {"mass": float(chain.masses[k]), "com": chain.mass_points[k].tolist()}
            if chain.lengths is not None and np.isfinite(chain.lengths[k]):
                lk["length"] = float(chain.lengths[k])
            links.append(lk)
        doc["links"] = links
    return doc


_NUM_LIST = re.compile(r"\[\s*((?:[-+0-9.eE]+|\"(?:inf|-inf|nan)\"|true|false)(?:,\s*(?:[-+0-9.eE]+|\"(?:inf|-inf|nan)\"|true|false))*)\s*\]")


def dumps(doc) -> str:
    """Indented JSON with flat lists of scalars kept on one line."""
    text = json.dumps(doc, indent=2)
    return _NUM_LIST.sub(lambda m: "[" + re.sub(r",\s+", ", ", m.group(1)) + "]", text) + "\n"


def save_robot(chain: KinematicChain, path) -> None:
    Path(path).write_text(dumps(chain_to_dict(chain)))


def motor_from_dict(doc):
    """Validate a motor document.

    Returns:
        ``(MotorParams, GearboxParams, MotorState, tau_d)``
    """
    _validate(doc, MOTOR_SCHEMA)
    try:
        motor = MotorParams(**doc["motor"])
    except ValueError as exc:
        raise InvariantViolation("motor", str(exc)) from exc
    try:
        gear = GearboxParams(**doc.get("gearbox", {}))
    except ValueError as exc:
        raise InvariantViolation("gearbox", str(exc)) from exc
    state = MotorState(**doc.get("initial", {}))
    return motor, gear, state, float(doc.get("tau_d", 0.0))


def load_motor(path):
    return motor_from_dict(_read_json(path))
