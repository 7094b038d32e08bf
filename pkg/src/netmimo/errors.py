"""Exception types raised across the package."""


class ParameterError(ValueError):
    """A numeric argument falls outside its admissible range."""


class OutOfRegionError(ValueError):
    """A point lies outside the tessellated region."""


class DomainError(ValueError):
    """A special function was called with an unsupported parameter pattern."""


class DegenerateChannelError(ArithmeticError):
    """Channel matrix is (numerically) rank deficient; resample the realization."""


class NumericalFailure(RuntimeError):
    """A quadrature did not reach its requested tolerance.

    ``diagnostics`` carries whatever the evaluator knew at the time of failure
    (error estimate, tolerance, node counts).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
