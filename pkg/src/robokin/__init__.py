"""Rigid-body robot kinematics and dynamics.

Modules:
    se3: rotations, transforms, exp/log maps and the adjoint.
    screw: twists, screw axes, wrenches and the SE(3) exp/log.
    kinematics: serial chains, forward kinematics and Jacobians.
    ik: Newton-Raphson IK, damped least squares, singularity scans.
    dynamics: Lagrangian and Newton-Euler dynamics.
    actuator: DC motor, friction and gearbox model.
    robot_io: robot and motor description files.
"""
__version__ = "0.1.0"

from . import actuator, dynamics, ik, kinematics, models, robot_io, screw, se3  # noqa: E402,F401
from ._jit import USE_NUMBA  # noqa: E402,F401
from .kinematics import KinematicChain  # noqa: E402,F401
