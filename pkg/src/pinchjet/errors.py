"""Exception types raised by pinchjet.

Input problems derive from :class:`JetInputError` (CLI exit code 2);
numerical breakdowns derive from :class:`NumericalFailure` (exit code 3).
"""


class PinchJetError(Exception):
    pass


class JetInputError(PinchJetError, ValueError):
    pass


class NumericalFailure(PinchJetError, ArithmeticError):
    pass


class ShapeMismatch(JetInputError):
    pass


class SymmetryViolation(JetInputError):
    pass


class NotPositiveDefinite(JetInputError):
    pass


class DimensionMismatch(JetInputError):
    pass


class DimensionTooSmall(JetInputError):
    pass


class LengthMismatch(JetInputError):
    pass


class NormalFormRequired(JetInputError):
    pass


class DegeneratePlane(JetInputError):
    pass


class GridInvalid(JetInputError):
    pass


class SingularJet(NumericalFailure):
    pass


class GeneratorFailure(NumericalFailure):
    pass


class LeftPositivityDomain(NumericalFailure):
    """The Taylor metric stopped being positive definite along a geodesic."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"Taylor metric lost positive definiteness at step {step}")
