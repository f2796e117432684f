"""Exception hierarchy with CLI exit codes attached."""

from __future__ import annotations


class InterlaceError(Exception):
    """Base class; ``exit_code`` is what the CLI returns for it."""

    exit_code = 3
    code = "error"


class InvalidInputError(InterlaceError, ValueError):
    exit_code = 2
    code = "invalid_input"


class ParseError(InvalidInputError):
    code = "parse_error"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TooLargeError(InvalidInputError):
    code = "too_large"


class NotApplicableError(InvalidInputError):
    code = "not_applicable"


class RankDeficiencyError(InvalidInputError):
    code = "rank_deficiency"


class DegenerateDirectionError(InterlaceError):
    code = "degenerate_direction"


class ConditioningError(InterlaceError, ArithmeticError):
    code = "conditioning"


class DivisibilityError(ConditioningError):
    code = "divisibility"
