"""Exception and warning types.

Two families matter to callers (and to the CLI exit codes):
:class:`PreconditionError` for inputs that violate an operation's
contract, and :class:`NumericalFailure` for computations that ran but did
not converge to a trustworthy answer.
"""


class TwoSpinError(Exception):
    """Base class for all package errors."""


class PreconditionError(TwoSpinError, ValueError):
    """Input violates the operation's preconditions."""


class InvalidArgument(PreconditionError):
    pass


class UnsupportedVariant(PreconditionError):
    pass


class ResolutionError(PreconditionError):
    """Grid too coarse for the requested level."""


class CapacityError(PreconditionError):
    """Requested level index does not fit on the grid."""


class GridMismatch(PreconditionError):
    pass


class SelectionRuleError(PreconditionError):
    pass


class IncompatibleLevels(PreconditionError):
    pass


class NoResonance(PreconditionError):
    """The resonance condition has no root for these parameters."""


class NumericalFailure(TwoSpinError, RuntimeError):
    """A numerical procedure failed to produce a certified result."""


class NoConvergence(NumericalFailure):
    pass


class TooManyEigenvalues(NumericalFailure):
    pass


class QuantizationFailure(NumericalFailure):
    pass


class TrackingError(NumericalFailure):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class BracketError(NumericalFailure):
    pass


class PoleError(NumericalFailure):
    pass


class OffResonanceWarning(UserWarning):
    pass


class MultiphotonRegimeWarning(UserWarning):
    pass


class WkbAccuracyWarning(UserWarning):
    pass
