"""Exception hierarchy.

Numerical failures (exit code 2 in the CLI) derive from :class:`NumericalError`;
bad input (exit code 1) derives from :class:`ValidationError`.
"""


class ApproxError(Exception):
    """Base class for all package errors."""


class ValidationError(ApproxError, ValueError):
    """Malformed manifest or invalid arguments."""


class DegenerateFit(ValidationError):
    """Too few or non-positive data points for a log-log fit."""


class NumericalError(ApproxError, ArithmeticError):
    """Base class for failures detected during a computation."""


class NonPositiveCurvature(NumericalError):
    pass


class QuadratureUnderresolved(NumericalError):
    pass


class GramNotPositiveDefinite(NumericalError):
    pass


class NonPositiveDensity(NumericalError):
    pass


class NonFiniteIntegrand(NumericalError):
    pass


class EquivarianceViolation(NumericalError):
    pass
