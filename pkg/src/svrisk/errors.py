"""Exception types. The CLI maps each family to its own exit code."""


class SvRiskError(Exception):
    """Base class for all package errors."""


class DataError(SvRiskError, ValueError):
    """Input data is missing, malformed or violates a series invariant."""


class NumericalError(SvRiskError, RuntimeError):
    """An estimator or filter failed numerically (divergence, non-convergence)."""


class BoundaryError(NumericalError):
    """GARCH optimum on the covariance-stationarity boundary.

    The offending fit is attached as ``fit``.
    """

    def __init__(self, message, fit=None):
        super().__init__(message)
        self.fit = fit
