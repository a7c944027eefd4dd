"""Exception hierarchy shared across the toolkit.

Everything raised on purpose derives from :class:`RfbltError`, split into
two broad families so callers (notably the CLI) can distinguish bad inputs
from failures that occur mid-computation.
"""


class RfbltError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(RfbltError):
    """Bad inputs: shapes, ranges, file formats, configuration."""


class ComputationError(RfbltError):
    """Failures arising during an otherwise well-posed computation."""


# -- validation family -------------------------------------------------------

class InsufficientDataError(ValidationError):
    """Series too short for the requested operation."""


class InvalidWindowError(ValidationError):
    """Smoothing window outside [1, len(x)]."""


class EmbeddingTooLargeError(ValidationError):
    """Delay-embedding dimension m >= series length."""


class DegenerateScaleError(ValidationError):
    """Min-max scaler fitted on a constant window (max == min)."""


class InvalidDistributionError(ValidationError):
    """Distribution family unknown or parameters invalid for the family."""


class ShapeError(ValidationError):
    """Array dimensions inconsistent with the operation's contract."""


class InvalidVarianceError(ValidationError):
    """Non-positive variance where a positive one is required."""


class EmptyPlanError(ValidationError):
    """Expanding-window plan with zero evaluation windows."""


class InvalidIntervalError(ValidationError):
    """Interval with lower bound above upper bound."""


class UndefinedMetricError(ValidationError):
    """Metric denominator identically zero (e.g. all-zero actuals)."""


class CsvFormatError(ValidationError):
    """Malformed series CSV: wrong header, bad numbers, unsorted times."""


class ConfigError(ValidationError):
    """Malformed or incomplete run configuration."""


# -- computation family ------------------------------------------------------

class NumericalError(ComputationError):
    """Non-finite values encountered where finite ones are required."""


class SingularPrecisionError(ComputationError):
    """Precision matrix not positive definite after jitter escalation."""


class IntegrationError(ComputationError):
    """ODE integration produced an inadmissible state."""


class EvaluationError(ComputationError):
    """Forecast callback failed inside the expanding-window driver."""
