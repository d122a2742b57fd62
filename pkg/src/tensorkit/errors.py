"""Exception hierarchy shared by all tensorkit modules."""


class TensorkitError(Exception):
    """Base class for every error raised by tensorkit."""


class ParseError(TensorkitError, ValueError):
    """Malformed index-notation text.

    ``offset`` is the byte offset (UTF-8) of the offending character.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class ShapeError(TensorkitError, ValueError):
    """Dimension, rank, variance or weight mismatch between operands."""


class ValidationError(TensorkitError, ValueError):
    """An expression broke the index rules and cannot be evaluated."""

    def __init__(self, message, report=None):
        self.report = report
        super().__init__(message)


class DomainError(TensorkitError, ArithmeticError):
    """Singular matrix, singular jacobian, or a chart singularity."""
