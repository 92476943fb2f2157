"""Exception hierarchy.

Every error raised by the package derives from :class:`HDIError`, which is a
``ValueError`` so callers that already guard numeric code keep working.  The
CLI maps the three broad categories (parse, validation, estimation) to exit
codes.
"""


class HDIError(ValueError):
    """Base class for all package errors."""

    category = "estimation"


# --- input validation -------------------------------------------------------


class ValidationError(HDIError):
    category = "validation"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionMismatch(ValidationError):
    pass


class InvalidParameter(ValidationError):
    pass


class ParseError(HDIError):
    category = "parse"

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(ParseError):
    pass


# --- numerical / estimation -------------------------------------------------


class ZeroMassGroup(HDIError):
    """A zero mass makes a power or logarithm in the requested branch undefined."""


class ZeroMeanGroup(ZeroMassGroup):
    """A group mean of zero enters a logarithm or a negative power."""


class NonFinite(HDIError):
    pass


class EmptyGroup(HDIError):
    pass


class SingletonStratum(HDIError):
    pass


class NotTwoPsuDesign(HDIError):
    pass


class HadamardUnavailable(HDIError):
    pass


class NonBinaryOutcome(HDIError):
    pass


class ZeroBaseline(HDIError):
    pass
