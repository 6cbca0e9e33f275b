import json
from pathlib import Path

import numpy as np
import pytest

import robokin
from robokin import models
from robokin.dynamics import TwoLinkParams, mass_matrix_general
from robokin.errors import InvariantViolation, ParseError, SchemaError
from robokin.kinematics import fk_chain_rule, fk_poe
from robokin.robot_io import chain_from_dict, chain_to_dict, dumps, load_motor, load_robot, save_robot

DATA = Path(robokin.__file__).parent / "data"


def test_bundled_files_load():
    arm = load_robot(DATA / "planar3.json")
    assert arm.n == 3
    q = [0.3, -0.2, 0.9]
    assert np.max(np.abs(fk_poe(arm, q) - fk_poe(models.planar_arm(), q))) < 1e-12
    assert load_robot(DATA / "leg6.json").n == 6
    two = load_robot(DATA / "two_link.json")
    p = TwoLinkParams(L1=1.0, L2=0.8, m1=2.0, m2=1.0)
    th = [0.4, 1.2]
    assert np.max(np.abs(mass_matrix_general(two, th) - mass_matrix_general(models.two_link_arm(p), th))) < 1e-12
    motor, gear, state, tau_d = load_motor(DATA / "motor.json")
    assert gear.ratio == 10.0 and state.omega == 0.0 and tau_d == 0.0


def test_save_load_round_trip(tmp_path, rng):
    for with_mass in (False, True):
        chain = models.random_chain(rng, n=5, prismatic_prob=0.4, with_mass=with_mass)
        f = tmp_path / "c.json"
        save_robot(chain, f)
        back = load_robot(f)
        assert np.array_equal(back.screws, chain.screws) and np.array_equal(back.home_pose, chain.home_pose)
        assert back.kinds == chain.kinds
        if with_mass:
            assert np.array_equal(back.masses, chain.masses)
            assert np.array_equal(back.mass_points, chain.mass_points)
        q = rng.normal(size=5)
        assert np.max(np.abs(fk_chain_rule(back, q) - fk_poe(chain, q))) < 1e-10


def test_dumps_layout():
    text = dumps({"a": [1.0, -2.5e-07, 3], "b": {"c": [[1, 2], [3, 4]]}, "s": ["x", "y"]})
    assert '"a": [1.0, -2.5e-07, 3]' in text
    assert "[1, 2]" in text and "[3, 4]" in text
    assert json.loads(text) == {"a": [1.0, -2.5e-07, 3], "b": {"c": [[1, 2], [3, 4]]}, "s": ["x", "y"]}
    x = 0.1 + 0.2
    assert json.loads(dumps({"v": [x]}))["v"][0] == x


def test_nonfinite_rejected(tmp_path):
    doc = chain_to_dict(models.planar_arm())
    f = tmp_path / "nan.json"
    f.write_text(json.dumps(doc).replace("-1.0", "NaN", 1))
    with pytest.raises(ParseError):
        load_robot(f)


def test_field_paths():
    doc = chain_to_dict(models.planar_arm())
    doc["joints"][2]["screw"] = [0, 0, 0, 0, 0, 2.0]
    with pytest.raises(InvariantViolation) as exc:
        chain_from_dict(doc)
    assert exc.value.path == "joints[2].screw"
    doc = chain_to_dict(models.planar_arm())
    doc["joints"][0]["type"] = "helical"
    with pytest.raises(SchemaError) as exc:
        chain_from_dict(doc)
    assert "joints" in exc.value.path
    doc = chain_to_dict(models.planar_arm())
    doc["home_pose"][15] = 2.0
    with pytest.raises(InvariantViolation) as exc:
        chain_from_dict(doc)
    assert exc.value.path == "home_pose"


def test_mixed_joint_forms():
    doc = chain_to_dict(models.planar_arm())
    doc["joints"][1] = {"type": "revolute", "axis": [1, 0, 0], "offset": np.eye(4).reshape(-1).tolist()}
    with pytest.raises(SchemaError):
        chain_from_dict(doc)
    doc["joints"][1] = {"type": "revolute"}
    with pytest.raises(SchemaError):
        chain_from_dict(doc)


def test_link_validation():
    p = TwoLinkParams(L1=1.0, L2=0.8, m1=2.0, m2=1.0)
    doc = chain_to_dict(models.two_link_arm(p))
    doc["links"][0]["mass"] = 0.0
    with pytest.raises(InvariantViolation) as exc:
        chain_from_dict(doc)
    assert exc.value.path == "links[0].mass"
    doc = chain_to_dict(models.two_link_arm(p))
    doc["links"] = doc["links"][:1]
    with pytest.raises(InvariantViolation):
        chain_from_dict(doc)
