"""TSQL error types. Parse-time errors carry a 1-based line/column."""
from __future__ import annotations


class TsqlError(Exception):
    pass


class TsqlSyntaxError(TsqlError):
    def __init__(self, message: str, line: int, column: int, expected: tuple[str, ...] = ()):
        suffix = f" (expected {', '.join(expected)})" if expected else ""
        super().__init__(f"{message} at {line}:{column}{suffix}")
        self.line = line
        self.column = column
        self.expected = expected


class TsqlTypeError(TsqlError):
    """An operator applied to operands of the wrong temporal kind."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at {line}:{column}")
        self.line = line
        self.column = column


class TsqlEvalError(TsqlError):
    """Evaluation failure: unknown table/attribute or a value-type mismatch."""
