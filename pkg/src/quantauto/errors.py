"""Exception hierarchy shared by all quantauto modules."""

from __future__ import annotations


class QuantAutoError(Exception):
    """Base class for all library errors."""


class StructureError(QuantAutoError):
    """Structurally invalid input: mismatched variable lists, bad indices,
    unsupported expression node kinds."""


class UsageError(QuantAutoError):
    """An operation was called with arguments outside its contract."""


class ValidationError(QuantAutoError):
    """A declared property failed a data-level validation check."""


class UnsupportedShapeError(QuantAutoError):
    """A constraint or machine shape the operation deliberately rejects."""


class ResourceError(QuantAutoError):
    """A combinatorial budget (run count, region count, search space) was
    exceeded.  Distinct from a negative answer."""


class AccuracyError(QuantAutoError):
    """Numeric quadrature could not reach the requested tolerance within the
    evaluation budget.  Carries the best (value, bound) pair achieved."""

    def __init__(self, message: str, value=None, bound=None):
        super().__init__(message)
        self.value = value
        self.bound = bound


class ParseError(QuantAutoError):
    """Malformed machine/run file.  Carries line/column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column
