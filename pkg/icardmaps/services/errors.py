"""
Exception hierarchy shared by services, routers and the CLI.
"""
from typing import Optional, Sequence


class IcardError(Exception):
    """Base class for every error raised by icardmaps services."""

    exit_code = 2
    http_status = 400


class OrdinalDomainError(IcardError):
    """An operation was applied outside its domain (e.g. left_subtract with a > b)."""


class ParseError(IcardError):
    """Syntax error in an ordinal, formula or interval expression."""

    def __init__(
        self,
        message: str,
        text: str = "",
        line: Optional[int] = None,
        column: Optional[int] = None,
        expected: Sequence[str] = (),
    ):
        self.text = text
        self.line = line
        self.column = column
        self.expected = sorted(expected)
        location = f" at line {line}, column {column}" if column is not None and column > 0 else ""
        super().__init__(f"{message}{location}")


class InputError(IcardError):
    """Malformed input file, unknown node, bad path or unknown stream."""


class InconsistentInputError(IcardError):
    """A formula set refuted by GL."""

    def __init__(self, message: str, refuted: Optional[str] = None):
        self.refuted = refuted
        super().__init__(message)


class BudgetExceededError(IcardError):
    """A search ran out of its configured budget before reaching a verdict."""

    http_status = 422


class IntegrityError(IcardError):
    """A bouquet violates its declared rank or cofinality claim."""


class InternalConsistencyError(IcardError):
    """A self-verified post-condition failed. Always indicates a bug."""

    exit_code = 3
    http_status = 500


def http_status_for(exc: Exception) -> int:
    """HTTP status used by the routers for a service exception."""
    if isinstance(exc, IcardError):
        return exc.http_status
    return 500


def exit_code_for(exc: Exception) -> int:
    """Process exit code used by the CLI for a service exception."""
    if isinstance(exc, IcardError):
        return exc.exit_code
    return 3
