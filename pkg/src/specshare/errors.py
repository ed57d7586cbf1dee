"""Exception types shared across the package."""


class SpecShareError(Exception):
    """Base class for all package errors."""


class DomainError(SpecShareError, ValueError):
    """Scalar argument outside the mathematical domain of a function."""


class ValidationError(SpecShareError, ValueError):
    """Structured input violates a documented precondition."""


class NotPSDError(ValidationError):
    """Matrix has a negative eigenvalue beyond tolerance."""


class SingularMatrixError(ValidationError):
    """Matrix is singular where an inverse (square root) is required."""


class EigenvalueSpacingError(ValidationError):
    """Eigenvalues coincide within tolerance where distinctness is required."""


class DegenerateChannelError(ValidationError):
    """Channel vector is zero where a direction is required."""


class InfeasibleScenarioError(SpecShareError):
    """The QoS threshold cannot be met even in the best case."""
