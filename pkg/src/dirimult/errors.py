"""Exception hierarchy.

Everything raised for bad user input derives from :class:`DirimultError`,
so the CLI can map it to exit code 1 and treat anything else as an
internal failure (exit code 2).
"""

from __future__ import annotations


class DirimultError(ValueError):
    """Base class for invalid inputs: bad data, bad dimensions, bad files."""


class ValidationError(DirimultError):
    """A value violates a documented precondition or invariant."""


class CsvFormatError(DirimultError):
    """A CSV corpus could not be parsed; carries file position context."""

    def __init__(self, message: str, line: int | None = None, column: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.column = column


class ModelFormatError(DirimultError):
    """A model file is malformed, corrupted, or has an unsupported version."""
