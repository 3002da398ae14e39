"""Exception hierarchy shared by all modules."""


class FracDeltaError(Exception):
    """Base class for errors raised by this package."""


class DomainError(FracDeltaError, ValueError):
    """An argument lies outside the domain of the operation."""


class GridMismatchError(FracDeltaError, ValueError):
    """Two objects that must live on the same grid do not."""


class TerminalPointError(DomainError):
    """A forward quantity was requested at the right edge of a grid."""


class UnsupportedScaleError(FracDeltaError, ValueError):
    """The requested order is not available on this kind of time scale."""


class InsufficientGridError(FracDeltaError, ValueError):
    """The grid has too few points for the requested operation."""


class HypothesisError(FracDeltaError, ValueError):
    """Input data violates the hypothesis of a bound."""


class TruncationError(FracDeltaError, ArithmeticError):
    """A series did not reach its tolerance within the allowed terms.

    The partially summed report is available as ``report``.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class RHSEvaluationError(FracDeltaError, ArithmeticError):
    """The right-hand side returned a non-finite value."""


class NonConvergenceError(FracDeltaError, ArithmeticError):
    """Picard iteration stopped before reaching the requested tolerance.

    The last iterate and its diagnostics are available as ``result``.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
