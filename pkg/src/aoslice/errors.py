"""Exception hierarchy shared by every stage of the pipeline."""

from __future__ import annotations


class MiniAJError(Exception):
    """Base class for all user-facing errors."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(self._format())

    def _format(self) -> str:
        if self.line is None:
            return self.message
        if self.column is None:
            return f"{self.line}: {self.message}"
        return f"{self.line}:{self.column}: {self.message}"


class LexError(MiniAJError):
    pass


class ParseError(MiniAJError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 expected: frozenset[str] = frozenset()):
        self.expected = expected
        if expected:
            message = f"{message} (expected one of: {', '.join(sorted(expected))})"
        super().__init__(message, line, column)


class SemanticError(MiniAJError):
    """Name resolution, typing, arity and weaving errors."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None,
                 stmt: int | None = None):
        self.stmt = stmt
        if stmt is not None:
            message = f"{message} [statement {stmt}]"
        super().__init__(message, line, column)


class ExecutionError(MiniAJError):
    """Raised by the interpreter; carries the statement that failed, if any."""

    def __init__(self, message: str, stmt: int | None = None):
        self.stmt = stmt
        if stmt is not None:
            message = f"{message} [statement {stmt}]"
        super().__init__(message)


class DivisionByZero(ExecutionError):
    pass


class InputError(ExecutionError):
    pass


class StepBudgetExceeded(ExecutionError):
    pass


class CallDepthExceeded(ExecutionError):
    pass


class CriterionError(MiniAJError):
    """The slicing criterion names an unknown statement or variable."""


class NotExecuted(MiniAJError):
    """The criterion statement never executed; distinct from an empty slice."""


class InvariantViolation(RuntimeError):
    """Internal consistency failure. Never caused by user input."""
