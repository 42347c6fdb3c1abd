"""Exception hierarchy shared by all erdim modules."""


class ErdimError(Exception):
    """Base class for every error raised by erdim."""


class ValidationError(ErdimError, ValueError):
    """Input violates a documented invariant (non-Hermitian H, negative rate, ...)."""


class ShapeError(ErdimError, ValueError):
    """Array shapes are inconsistent with the requested operation."""


class SizeError(ErdimError, ValueError):
    """Problem size exceeds a hard memory or dimension budget."""


class DomainError(ErdimError, ValueError):
    """A scalar argument lies outside its admissible domain."""


class RangeError(ErdimError, IndexError):
    """Index (e.g. a cut position) outside the valid range."""


class StepError(ErdimError, ValueError):
    """Time step too large for the requested accuracy regime."""


class NumericalError(ErdimError, ArithmeticError):
    """Non-finite values, overflow or an iteration cap hit."""


class ObjectiveError(NumericalError):
    """Objective function returned a non-finite value.

    The offending point is kept on ``point`` for diagnostics.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point
