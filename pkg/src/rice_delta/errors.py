"""Exception hierarchy shared by the numerical modules and the CLI."""


class RiceDeltaError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RiceDeltaError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class QuadratureError(RiceDeltaError, ArithmeticError):
    """A quadrature failed to converge at its maximum order.

    ``index`` locates the worst cell when the failing call was vectorised.
    """

    def __init__(self, message: str, index: tuple = ()):
        super().__init__(message)
        self.index = index


class DegeneracyError(RiceDeltaError, ValueError):
    """Moments describe a non-degenerate pair, or are inconsistent."""
