"""Exception hierarchy shared by every cstarkit module."""

from typing import Optional


class CstarError(Exception):
    """Base class for all cstarkit errors."""


class GraphParseError(CstarError, ValueError):
    """Malformed graph text. `line` is 1-based, or None for whole-input problems."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ScopeError(CstarError):
    """Input is valid but lies outside what can be decided or enumerated."""


class PreconditionError(CstarError, ValueError):
    """An operation was called with arguments violating its precondition."""


class ExactnessError(CstarError, AssertionError):
    """An internal verification failed. Always a bug or an unflagged scope violation."""
