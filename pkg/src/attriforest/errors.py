"""Exception hierarchy shared across the toolkit.

ConfigError and DataError map to distinct CLI exit codes; everything else
surfaces as a runtime failure.
"""


class AttriforestError(Exception):
    """Base class for all toolkit errors."""


class ConfigError(AttriforestError):
    """Invalid configuration or parameters (CLI exit code 2)."""


class DataError(AttriforestError):
    """Problem with input data (CLI exit code 3)."""


class SchemaError(DataError):
    """Header/schema mismatch or malformed schema document."""


class ParseError(DataError):
    """Unparseable cell; message carries row/column coordinates."""


class ValidationError(DataError):
    """Cell value violates the declared schema."""


class UnfittableColumnError(DataError):
    """A statistic cannot be fitted (e.g. all-missing column)."""


class CoverageError(AttriforestError):
    """Fitted state does not cover a column present at apply time."""


class UnseenCategoryError(AttriforestError):
    """Category at apply time was absent from the fitted encoding map."""


class WrongKindError(AttriforestError):
    """Operation applied to a column of the wrong kind."""


class UndefinedCorrelationError(AttriforestError):
    """Pearson correlation undefined (zero variance)."""
