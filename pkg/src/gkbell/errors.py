"""Exception hierarchy shared by every backend and the command line."""

from __future__ import annotations


class GKError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class DimensionError(GKError, ValueError):
    """Qubit counts or indices that do not fit together."""


class CapacityError(GKError):
    """A size cap was exceeded (dense qubit limit, closure size)."""

    exit_code = 4


class UnsupportedGateError(GKError):
    """A gate outside the Gottesman-Knill set reached the tableau engine."""

    exit_code = 3


class InvalidObservableError(GKError, ValueError):
    """A non-Hermitian Pauli string was used where an observable is needed."""


class UnsupportedObservableError(GKError):
    """A measurement direction that is not a signed Pauli axis."""

    exit_code = 3


class DomainError(GKError, ValueError):
    """An argument outside the mathematical domain of a function."""


class NormalizationError(GKError, ValueError):
    """A direction vector that is not of unit length."""


class ConsistencyError(GKError, AssertionError):
    """An internal invariant was violated. Never expected to fire."""


class ParseError(GKError):
    """Malformed label or circuit text, with a position for the user."""

    exit_code = 2

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)
