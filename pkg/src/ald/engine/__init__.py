"""A small Horn-clause evaluator with fair and depth-first search."""

from .errors import (
    BudgetExhausted,
    Cancelled,
    EngineError,
    EvalTypeError,
    InstantiationError,
    ReadError,
)
from .terms import Atom, Compound, Integer, Term, Var, deref, format_term, mklist
from .reader import (
    Clause,
    ModuleDirective,
    Program,
    TestDirective,
    parse_program,
    parse_query,
    parse_term,
)
from .solve import (
    Answer,
    Budget,
    SolveResult,
    TestResult,
    format_transcript,
    run_tests,
    solve,
)

__all__ = [
    "Answer",
    "Atom",
    "Budget",
    "BudgetExhausted",
    "Cancelled",
    "Clause",
    "Compound",
    "EngineError",
    "EvalTypeError",
    "InstantiationError",
    "Integer",
    "ModuleDirective",
    "Program",
    "ReadError",
    "SolveResult",
    "Term",
    "TestDirective",
    "TestResult",
    "Var",
    "deref",
    "format_term",
    "format_transcript",
    "mklist",
    "parse_program",
    "parse_query",
    "parse_term",
    "run_tests",
    "solve",
]
