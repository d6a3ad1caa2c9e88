"""Exception types raised by the library."""


class HarmonicAtomError(Exception):
    """Base class for all library errors."""


class DomainError(HarmonicAtomError, ValueError):
    """An argument lies outside the domain of the operation."""


class PoleError(DomainError):
    """Evaluation hit a pole of an undamped response function."""


class UnphysicalCovarianceError(DomainError):
    """A covariance violates positivity or the uncertainty relation."""


class UsageError(HarmonicAtomError, ValueError):
    """Inputs are individually valid but inconsistent with each other."""


class QuadratureError(HarmonicAtomError, RuntimeError):
    """An adaptive quadrature failed to reach its tolerance.

    Attributes
    ----------
    estimate : float
        Best available value of the integral.
    error : float
        Estimated absolute error of ``estimate``.
    n_panels : int
        Number of panels in use when the iteration stopped.
    """

    def __init__(self, message, estimate=float("nan"), error=float("inf"), n_panels=0):
        super().__init__(message)
        self.estimate = estimate
        self.error = error
        self.n_panels = n_panels
