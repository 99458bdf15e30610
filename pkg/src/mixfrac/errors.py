"""Exception hierarchy shared by all mixfrac modules."""


class MixfracError(Exception):
    """Base class for every error raised by this package."""


class HypothesisViolation(MixfracError):
    """The measure fails the structural conditions on its positive/negative split.

    The offending :class:`~mixfrac.measure.HypothesisReport` is attached as
    ``report`` so callers that deliberately proceed can still inspect it.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IndefiniteForm(MixfracError):
    """The mixed quadratic form is not positive definite on the grid."""


class ConvergenceFailure(MixfracError):
    """An iterative solver exhausted its iteration budget."""


class NonConvergence(MixfracError):
    """Adaptive quadrature exhausted its evaluation budget before reaching tol."""


class GridMismatch(MixfracError):
    pass


class SingularSystem(MixfracError):
    pass


class DomainError(MixfracError, ValueError):
    """Argument outside the range where a closed form is valid."""


class NotFound(MixfracError):
    pass


class PreconditionError(MixfracError):
    """A harness was invoked on inputs it is not defined for."""
