"""Exception hierarchy.

Every error derives from :class:`RobokinError`. The CLI maps the two
subfamilies :class:`InputError` and :class:`NumericalError` to distinct exit
codes.
"""


class RobokinError(Exception):
    """Base class for all package errors."""


class InputError(RobokinError, ValueError):
    """Invalid input data (bad structure, bad file, violated precondition)."""


class NumericalError(RobokinError, ArithmeticError):
    """A numerically ill-posed request (singular matrix, degenerate geometry)."""


# se3 / screw
class NotSkewSymmetric(InputError):
    pass


class BadStructure(InputError):
    pass


class InvalidRotation(InputError):
    pass


class InvalidScrew(InputError):
    pass


class ZeroTwist(InputError):
    pass


class NotPlanar(InputError):
    pass


class NearPiRotation(NumericalError):
    pass


class PureTranslation(NumericalError):
    pass


# kinematics / ik
class DimensionMismatch(InputError):
    pass


class SingularJacobian(NumericalError):
    pass


class Unreachable(NumericalError):
    pass


class DegenerateTarget(NumericalError):
    pass


class NonPositiveDamping(NumericalError):
    pass


# dynamics
class MissingMassData(InputError):
    pass


class NotCentered(InputError):
    pass


# file loading
class ParseError(InputError):
    pass


class FieldError(InputError):
    """An error tied to a location inside a loaded document."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class SchemaError(FieldError):
    pass


class InvariantViolation(FieldError):
    pass
