"""Exception types raised by qrkit operations."""


class QrkitError(Exception):
    """Base class for all qrkit errors."""


class DimensionMismatch(QrkitError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class PositionOutOfRange(QrkitError, IndexError):
    """A row/column position lies outside its valid 1-based range."""


class DuplicatePosition(QrkitError, ValueError):
    """A position list contains repeated or non-increasing entries."""


class WouldUnderdetermine(QrkitError, ValueError):
    """Row deletion would leave fewer rows than columns."""


class RankDeficient(QrkitError, ArithmeticError):
    """A diagonal pivot fell below the rank tolerance."""


class SingularTriangular(QrkitError, ZeroDivisionError):
    """Triangular solve hit a zero diagonal entry."""


class DowndateBreakdown(QrkitError, ArithmeticError):
    """Row downdate is inconsistent with the factor (negative pivot)."""


class NearDependentColumn(QrkitError, ArithmeticError):
    """Appended column is numerically in the span of the existing ones."""


class SingularUpdate(QrkitError, ArithmeticError):
    """Gram-inverse update denominator is numerically zero."""


class InvalidQuery(QrkitError, ValueError):
    """Cost query parameters violate the validity range of the formula."""


class InfeasibleThetaPrior(QrkitError, ValueError):
    """Beta moment matching failed for the inclusion-probability prior."""


class NumericalBreakdown(QrkitError, ArithmeticError):
    """A log-marginal evaluation produced a non-positive scale term."""


class TooManyCovariates(QrkitError, ValueError):
    """Exact enumeration requested for more covariates than tractable."""


class EmptyFold(QrkitError, ValueError):
    """Cross-validation fold assignment produced an empty fold."""
