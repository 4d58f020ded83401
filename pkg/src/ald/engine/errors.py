"""Engine error hierarchy. Each class carries a stable ``kind`` tag."""

from __future__ import annotations


class EngineError(Exception):
    kind = "engine_error"


class ReadError(EngineError):
    kind = "syntax_error"

    def __init__(self, message: str, line: int):
        super().__init__(f"syntax error at line {line}: {message}")
        self.line = line
        self.detail = message


class InstantiationError(EngineError):
    """A builtin needed a bound argument and got a variable."""

    kind = "instantiation_error"


class EvalTypeError(EngineError):
    """A non-numeric operand reached arithmetic, or a goal is not callable."""

    kind = "type_error"


class BudgetExhausted(EngineError):
    """The search was truncated by the budget before any answer was found."""

    kind = "budget_exhausted"


class Cancelled(EngineError):
    kind = "cancelled"
