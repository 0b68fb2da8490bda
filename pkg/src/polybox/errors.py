"""Exception hierarchy.

Subclasses of :class:`ValidationError` signal bad input (CLI exit code 2);
everything else derived from :class:`PolyboxError` is a runtime failure
(CLI exit code 1).
"""


class PolyboxError(Exception):
    pass


class ValidationError(PolyboxError, ValueError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NegativePower(ValidationError):
    pass


class NonFiniteCoef(ValidationError):
    pass


class EmptyPolynomial(ValidationError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class SchemaViolation(ValidationError):
    """Malformed document; ``path`` locates the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class BadGrid(ValidationError):
    pass


class InvalidBox(ValidationError):
    pass


class BadOptions(ValidationError):
    pass


class ConfigInvalid(ValidationError):
    pass


class UnknownSolver(ValidationError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class MissingVariant(ValidationError):
    pass


class EmptyInput(ValidationError):
    pass


class AllNonFinite(PolyboxError, ArithmeticError):
    """Every enumerated value along a coordinate was inf/nan."""
