"""Ready-made chains used in examples, tests and the bundled robot files."""
from __future__ import annotations

import numpy as np

from .dynamics import TwoLinkParams
from .kinematics import PRISMATIC, REVOLUTE, KinematicChain
from .se3 import rot_exp


def _trans(x=0.0, y=0.0, z=0.0) -> np.ndarray:
    T = np.eye(4)
    T[:3, 3] = (x, y, z)
    return T


def planar_arm(lengths=(1.0, 1.0, 1.0, 1.0), masses=None) -> KinematicChain:
    """Three revolute joints in the y-z plane on top of a fixed base link.

    The base link ``l1`` stands along +z; joints rotate about -x so the end
    point is ``y = l2 sin(t) + l3 sin(t + f) + l4 sin(t + f + s)`` and
    ``z = l1 + l2 cos(t) + l3 cos(t + f) + l4 cos(t + f + s)``.
    """
    l1, l2, l3, l4 = lengths
    axes = np.tile([-1.0, 0.0, 0.0], (3, 1))
    offsets = [_trans(z=l1), _trans(z=l2), _trans(z=l3)]
    return KinematicChain.from_local(axes, offsets, tool=_trans(z=l4), masses=masses,
                                     lengths=[l2, l3, l4], name="planar-3")


def two_link_arm(p: TwoLinkParams) -> KinematicChain:
    """The planar 2-link arm in the x-y plane, joints about +z, gravity -y."""
    screws = [[0, 0, 1, 0, 0, 0], [0, 0, 1, 0, -p.L1, 0]]
    return KinematicChain.from_screws(screws, _trans(x=p.L1 + p.L2), masses=[p.m1, p.m2],
                                      lengths=[p.L1, p.L2], gravity=[0.0, -p.g, 0.0], name="two-link")


def planar_2link_yz(l1: float, l2: float) -> KinematicChain:
    """2-link arm in the y-z plane with angles measured from +y (joints about +x)."""
    screws = [[1, 0, 0, 0, 0, 0], [1, 0, 0, 0, 0, -l1]]
    return KinematicChain.from_screws(screws, _trans(y=l1 + l2), name="planar-2-yz")


def leg6(thigh: float = 0.3, shank: float = 0.3) -> KinematicChain:
    """Six-joint leg hanging along -z.

    Joint order: hip yaw (z), hip roll (x), hip pitch (y), knee pitch (y),
    ankle pitch (y), ankle roll (x). The end point is the ankle.
    """
    ez, ex, ey = [0, 0, 1.0], [1.0, 0, 0], [0, 1.0, 0]
    axes = [ez, ex, ey, ey, ey, ex]
    offsets = [np.eye(4), np.eye(4), np.eye(4), _trans(z=-thigh), _trans(z=-shank), np.eye(4)]
    return KinematicChain.from_local(axes, offsets, name="leg-6")


def random_chain(rng: np.random.Generator, n: int = 6, prismatic_prob: float = 0.2,
                 with_mass: bool = False) -> KinematicChain:
    """Random serial chain with random local axes, offsets and tool."""
    kinds, axes, offsets = [], [], []
    for _ in range(n):
        a = rng.normal(size=3)
        axes.append(a / np.linalg.norm(a))
        kinds.append(PRISMATIC if rng.random() < prismatic_prob else REVOLUTE)
        T = np.eye(4)
        T[:3, :3] = rot_exp(rng.normal(size=3))
        T[:3, 3] = rng.uniform(-0.5, 0.5, size=3)
        offsets.append(T)
    tool = np.eye(4)
    tool[:3, :3] = rot_exp(rng.normal(size=3))
    tool[:3, 3] = rng.uniform(-0.5, 0.5, size=3)
    masses = rng.uniform(0.5, 2.0, size=n) if with_mass else None
    return KinematicChain.from_local(axes, offsets, tool=tool, kinds=kinds, masses=masses)
