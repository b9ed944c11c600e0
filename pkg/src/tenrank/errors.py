"""Exception hierarchy shared by all modules.

Every failure mode has its own class so callers (and the CLI exit-code
mapping) can distinguish parse errors, resource guards, field-size
problems and verification failures.
"""


class TenrankError(Exception):
    """Base class for all library errors."""


class MixedFieldsError(TenrankError):
    """Operands live over different fields."""


class DivisionByZeroError(TenrankError, ZeroDivisionError):
    """Division by the zero element of a field."""


class InfiniteFieldError(TenrankError):
    """An enumeration or exhaustive search was requested over the rationals."""


class FieldTooSmallError(TenrankError):
    """The field does not satisfy a size precondition such as |F| > n."""


class ShapeMismatchError(TenrankError):
    """Matrix or tensor dimensions are incompatible."""


class IndexOutOfRangeError(TenrankError, IndexError):
    """A row, column, slice or direction index is out of range."""


class ResourceGuardError(TenrankError):
    """An operation would exceed a configured resource cap.

    The message names the guard and its bound; guards never truncate
    silently.
    """


class ZeroTensorError(TenrankError):
    """Operation undefined on the zero tensor."""


class ZeroSpanError(TenrankError):
    """Operation undefined on the zero matrix subspace."""


class ZeroMatrixError(TenrankError):
    """Operation undefined on the zero matrix (e.g. pivot of 0)."""


class NotConciseError(TenrankError):
    """A concise tensor was required."""


class NotCubicalError(TenrankError):
    """An n x n x n tensor was required."""


class DegenerateSpanError(TenrankError):
    """A slice span has too small a dimension for the requested operation."""


class NotPivotMatchedError(TenrankError):
    """The pivot-matched condition failed in the given basis."""


class BadParamsError(TenrankError, ValueError):
    """Invalid parameters to a catalog constructor or formula."""


class BadDimsError(TenrankError):
    """Tensor dimensions violate an operation's precondition."""


class PreconditionFailedError(TenrankError):
    """A numeric precondition (e.g. a min-rank threshold) does not hold."""


class VerificationFailedError(TenrankError):
    """A constructed certificate failed its own verification.

    This always indicates a bug, never an expected runtime condition.
    """


class WitnessInvalidError(TenrankError):
    """A caller-supplied witness failed validation."""


class BelowThresholdError(TenrankError):
    """Dimensions are below the threshold the narrow-tensor pipeline needs."""


class ParseError(TenrankError):
    """A tensor, certificate or report file failed to parse."""


class RetryBudgetError(TenrankError):
    """A randomized-with-retry procedure exhausted its retry cap."""
