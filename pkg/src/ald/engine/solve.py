"""SLD resolution over Horn clauses with two answer-enumeration modes.

Goals are selected left to right and clauses in source order. A goal's
depth is its nesting level in the proof tree (the root query goals sit
at depth 1, a clause body one deeper than its head), and an answer's
``proof_depth`` is the maximum depth of any goal resolved in its
derivation.

Programs flagged ``fair_search`` are run by iterative deepening on
proof depth: depth bounds 1, 2, ... up to ``Budget.max_depth``, ties
broken by clause order, duplicate bindings suppressed. The observable
contract is fairness; every answer with a finite-depth proof is
eventually enumerated even when the leftmost branch diverges. Plain
depth-first search is used otherwise, guarded by the same step and
depth budget.

Bindings live in mutable variable cells with a trail for backtracking;
clause variables are renamed before head unification, and the query is
renamed on entry so concurrent evaluations never share cells. The
occurs check is skipped; cyclic results are rejected when answers are
extracted.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field, replace
from typing import Callable, Iterator, Mapping

from .errors import (
    BudgetExhausted,
    Cancelled,
    EngineError,
    EvalTypeError,
    InstantiationError,
)
from .reader import PreparedClause, Program, TestDirective
from .terms import NIL, Atom, Compound, Integer, Term, Var, deref, format_term

# Pending-goal generators nest with proof depth; desk-scale proofs stay
# far below this, but the default 1000 is too tight.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass(frozen=True)
class Budget:
    max_depth: int = 64
    max_steps: int = 1_000_000
    max_answers: int = 1

    def __post_init__(self):
        for name in ("max_depth", "max_steps", "max_answers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Answer:
    bindings: Mapping[str, Term]
    proof_depth: int


@dataclass(frozen=True)
class SolveResult:
    answers: tuple[Answer, ...]
    more: bool


class _StepLimit(Exception):
    pass


class _CyclicAnswer(Exception):
    pass


class _Search:
    __slots__ = ("program", "trail", "steps", "max_steps", "pruned", "stop")

    def __init__(self, program: Program, max_steps: int, stop):
        self.program = program
        self.trail: list[Var] = []
        self.steps = 0
        self.max_steps = max_steps
        self.pruned = False
        self.stop = stop

    def step(self) -> None:
        self.steps += 1
        if self.steps > self.max_steps:
            raise _StepLimit
        if self.stop is not None and self.stop():
            raise Cancelled("evaluation cancelled")


def _undo(trail: list[Var], mark: int) -> None:
    while len(trail) > mark:
        trail.pop().ref = None


def _unify(a: Term, b: Term, trail: list[Var]) -> bool:
    a = deref(a)
    b = deref(b)
    if a is b:
        return True
    if isinstance(a, Var):
        a.ref = b
        trail.append(a)
        return True
    if isinstance(b, Var):
        b.ref = a
        trail.append(b)
        return True
    if isinstance(a, Atom):
        return isinstance(b, Atom) and a.name == b.name
    if isinstance(a, Integer):
        return isinstance(b, Integer) and a.value == b.value
    if isinstance(b, Compound) and a.functor == b.functor and len(a.args) == len(b.args):
        for x, y in zip(a.args, b.args):
            if not _unify(x, y, trail):
                return False
        return True
    return False


def _rename(term: Term, mapping: dict[int, Var], ground_ids: frozenset[int]) -> Term:
    if id(term) in ground_ids:
        return term
    if isinstance(term, Var):
        term = deref(term)
        if not isinstance(term, Var):
            return _rename(term, mapping, ground_ids)
        fresh = mapping.get(id(term))
        if fresh is None:
            fresh = Var(term.name)
            mapping[id(term)] = fresh
        return fresh
    if isinstance(term, Compound):
        return Compound(term.functor, tuple(_rename(a, mapping, ground_ids) for a in term.args))
    return term


_EMPTY_GROUND: frozenset[int] = frozenset()


def _flatten(goal: Term) -> tuple[Term, ...]:
    goal = deref(goal)
    if isinstance(goal, Compound) and goal.functor == "," and len(goal.args) == 2:
        return _flatten(goal.args[0]) + _flatten(goal.args[1])
    return (goal,)


# --- arithmetic -------------------------------------------------------------


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise EvalTypeError("arithmetic error: zero divisor")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def eval_arith(term: Term) -> int:
    """Evaluate a ground arithmetic expression over the integers."""
    t = deref(term)
    if isinstance(t, Integer):
        return t.value
    if isinstance(t, Var):
        raise InstantiationError("arithmetic argument is not bound")
    if isinstance(t, Compound) and len(t.args) == 2:
        if t.functor == "+":
            return eval_arith(t.args[0]) + eval_arith(t.args[1])
        if t.functor == "-":
            return eval_arith(t.args[0]) - eval_arith(t.args[1])
        if t.functor == "*":
            return eval_arith(t.args[0]) * eval_arith(t.args[1])
        if t.functor == "//":
            return _int_div(eval_arith(t.args[0]), eval_arith(t.args[1]))
    if isinstance(t, Compound) and len(t.args) == 1 and t.functor == "-":
        return -eval_arith(t.args[0])
    raise EvalTypeError(f"not an arithmetic expression: {format_term(t)}")


# --- builtins ----------------------------------------------------------------


def _bi_unify(args, search):
    mark = len(search.trail)
    if _unify(args[0], args[1], search.trail):
        yield 1
    _undo(search.trail, mark)


def _bi_is(args, search):
    value = Integer(eval_arith(args[1]))
    mark = len(search.trail)
    if _unify(args[0], value, search.trail):
        yield 1
    _undo(search.trail, mark)


def _compare(op: str) -> Callable:
    table = {
        "<": lambda a, b: a < b,
        ">": lambda a, b: a > b,
        "=<": lambda a, b: a <= b,
        ">=": lambda a, b: a >= b,
        "=:=": lambda a, b: a == b,
        "=\\=": lambda a, b: a != b,
    }
    test = table[op]

    def builtin(args, search):
        if test(eval_arith(args[0]), eval_arith(args[1])):
            yield 1

    return builtin


def _bi_true(args, search):
    yield 1


def _bi_var(args, search):
    if isinstance(deref(args[0]), Var):
        yield 1


def _bi_nonvar(args, search):
    if not isinstance(deref(args[0]), Var):
        yield 1


def _bi_list(args, search):
    node = deref(args[0])
    while isinstance(node, Compound) and node.functor == "." and len(node.args) == 2:
        node = deref(node.args[1])
    if node == NIL:
        yield 1


_BUILTINS = {
    ("=", 2): _bi_unify,
    ("is", 2): _bi_is,
    ("<", 2): _compare("<"),
    (">", 2): _compare(">"),
    ("=<", 2): _compare("=<"),
    (">=", 2): _compare(">="),
    ("=:=", 2): _compare("=:="),
    ("=\\=", 2): _compare("=\\="),
    ("true", 0): _bi_true,
    ("var", 1): _bi_var,
    ("nonvar", 1): _bi_nonvar,
    ("list", 1): _bi_list,
}


def is_builtin(name: str, arity: int) -> bool:
    return (name, arity) in _BUILTINS


# --- resolution ---------------------------------------------------------------


def _solve(goal: Term, bound: int, search: _Search) -> Iterator[int]:
    """Yield the proof-tree depth of each solution of ``goal``."""
    goal = deref(goal)
    if isinstance(goal, Var):
        raise InstantiationError("goal is not bound")
    if isinstance(goal, Integer):
        raise EvalTypeError("an integer is not a callable goal")
    if isinstance(goal, Atom):
        name, args = goal.name, ()
    else:
        name, args = goal.functor, goal.args

    if name == "," and len(args) == 2:
        yield from _solve_seq(_flatten(goal), bound, search)
        return

    builtin = _BUILTINS.get((name, len(args)))
    if builtin is not None:
        if bound < 1:
            search.pruned = True
            return
        search.step()
        yield from builtin(args, search)
        return

    clauses = search.program.index.get((name, len(args)))
    if not clauses:
        return  # unknown predicates fail silently
    if bound < 1:
        search.pruned = True
        return

    trail = search.trail
    for clause in clauses:
        search.step()
        mark = len(trail)
        mapping: dict[int, Var] = {}
        head = _rename(clause.head, mapping, clause.ground_ids)
        if _unify(goal, head, trail):
            if clause.body:
                body = tuple(
                    _rename(g, mapping, clause.ground_ids) for g in clause.body
                )
                for depth in _solve_seq(body, bound - 1, search):
                    yield depth + 1
            else:
                yield 1
        _undo(trail, mark)


def _solve_seq(goals: tuple[Term, ...], bound: int, search: _Search) -> Iterator[int]:
    if not goals:
        yield 0
        return
    first, rest = goals[0], goals[1:]
    if not rest:
        yield from _solve(first, bound, search)
        return
    for d1 in _solve(first, bound, search):
        for d2 in _solve_seq(rest, bound, search):
            yield d1 if d1 >= d2 else d2


# --- answers -------------------------------------------------------------------


def _collect_query_vars(term: Term) -> list[Var]:
    seen: dict[int, Var] = {}
    order: list[Var] = []

    def walk(t: Term) -> None:
        t = deref(t)
        if isinstance(t, Var):
            if t.name != "_" and id(t) not in seen:
                seen[id(t)] = t
                order.append(t)
        elif isinstance(t, Compound):
            for a in t.args:
                walk(a)

    walk(term)
    return order


def _resolve(term: Term, path: set[int], fresh: dict[int, Var], counter: list[int]) -> Term:
    t = deref(term)
    if isinstance(t, Var):
        named = fresh.get(id(t))
        if named is None:
            label = counter[0]
            counter[0] += 1
            named = Var("_" + _excel_name(label))
            fresh[id(t)] = named
        return named
    if isinstance(t, Compound):
        if id(t) in path:
            raise _CyclicAnswer
        path.add(id(t))
        try:
            return Compound(t.functor, tuple(_resolve(a, path, fresh, counter) for a in t.args))
        finally:
            path.discard(id(t))
    return t


def _excel_name(n: int) -> str:
    letters = ""
    n += 1
    while n > 0:
        n, rem = divmod(n - 1, 26)
        letters = chr(ord("A") + rem) + letters
    return letters


def _extract(qvars: list[Var], depth: int) -> tuple[Answer, str] | None:
    fresh: dict[int, Var] = {}
    counter = [0]
    bindings: dict[str, Term] = {}
    parts: list[str] = []
    try:
        for var in qvars:
            value = _resolve(var, set(), fresh, counter)
            bindings[var.name] = value
            parts.append(f"{var.name} = {format_term(value)}")
    except _CyclicAnswer:
        return None
    return Answer(bindings, depth), "\n".join(parts)


def solve(
    program: Program,
    query: Term,
    budget: Budget | None = None,
    stop: Callable[[], bool] | None = None,
) -> SolveResult:
    """Enumerate answers to ``query`` under ``budget``.

    Returns the answers found plus a flag that is true iff enumeration
    stopped at ``max_answers`` with budget to spare. Raises
    ``BudgetExhausted`` when the budget truncated the search before any
    answer appeared, and ``InstantiationError``/``EvalTypeError`` for
    builtin misuse.
    """
    budget = budget or Budget()
    query = deref(query)
    if not isinstance(query, (Atom, Compound)):
        raise EvalTypeError("query must be a callable term")
    query = _rename(query, {}, _EMPTY_GROUND)
    qvars = _collect_query_vars(query)
    goals = _flatten(query)

    search = _Search(program, budget.max_steps, stop)
    answers: list[Answer] = []
    seen: set[str] = set()

    def run(bound: int) -> bool:
        """Explore up to ``bound``; True means max_answers was reached."""
        search.pruned = False
        for depth in _solve_seq(goals, bound, search):
            extracted = _extract(qvars, depth)
            if extracted is None:
                continue
            answer, key = extracted
            if key in seen:
                continue
            seen.add(key)
            answers.append(answer)
            if len(answers) >= budget.max_answers:
                return True
        return False

    try:
        if program.fair_search:
            for bound in range(1, budget.max_depth + 1):
                if run(bound):
                    return SolveResult(tuple(answers), True)
                if not search.pruned:
                    break
        else:
            if run(budget.max_depth):
                return SolveResult(tuple(answers), True)
    except _StepLimit:
        if answers:
            return SolveResult(tuple(answers), False)
        raise BudgetExhausted(
            f"no answer within {budget.max_steps} steps"
        ) from None
    finally:
        _undo(search.trail, 0)

    if not answers and search.pruned:
        raise BudgetExhausted(f"no answer within depth {budget.max_depth}")
    return SolveResult(tuple(answers), False)


# --- embedded test directives ---------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    test: TestDirective
    verdict: str  # "pass" | "fail"
    detail: str


def _substitute(term: Term, bindings: Mapping[str, Term]) -> Term:
    t = deref(term)
    if isinstance(t, Var):
        return bindings.get(t.name, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(_substitute(a, bindings) for a in t.args))
    return t


def run_tests(program: Program, budget: Budget | None = None) -> list[TestResult]:
    """Run every ``:- test`` directive and report pass/fail verdicts.

    ``not_fails`` passes iff the goal has at least one answer, ``fails``
    iff it has none and raises no error; ``=> Post`` requires the
    postcondition to succeed under the first answer's bindings. Engine
    errors never escape; they are recorded as failures.
    """
    budget = budget or Budget()
    results: list[TestResult] = []
    for test in program.tests():
        goal_text = format_term(test.goal)
        try:
            outcome = solve(program, test.goal, replace(budget, max_answers=1))
        except EngineError as err:
            results.append(TestResult(test, "fail", f"{goal_text}: error: {err}"))
            continue
        problems: list[str] = []
        n = len(outcome.answers)
        if "not_fails" in test.props and n == 0:
            problems.append("expected at least one answer, got none")
        if "fails" in test.props and n > 0:
            first = outcome.answers[0]
            shown = ", ".join(
                f"{name} = {format_term(t)}" for name, t in first.bindings.items()
            )
            problems.append(f"expected failure, got an answer ({shown or 'yes'})")
        if test.post is not None:
            if n == 0:
                problems.append("no answer to check the postcondition against")
            else:
                post_goal = _substitute(test.post, outcome.answers[0].bindings)
                try:
                    post = solve(
                        program,
                        post_goal,
                        Budget(max_depth=budget.max_depth, max_steps=100_000),
                    )
                    if not post.answers:
                        problems.append(
                            f"postcondition {format_term(post_goal)} failed"
                        )
                except EngineError as err:
                    problems.append(f"postcondition error: {err}")
        if problems:
            results.append(TestResult(test, "fail", f"{goal_text}: " + "; ".join(problems)))
        else:
            results.append(TestResult(test, "pass", f"{goal_text}: ok"))
    return results


# --- transcripts -----------------------------------------------------------------


def format_transcript(result: SolveResult) -> str:
    """Render answers the way the engine CLI prints them.

    Each answer is a block of ``Name = Term`` lines; a trailing `` ;``
    marks that another answer follows (or may follow, per the more
    flag). The final line is ``yes`` or ``no``.
    """
    if not result.answers:
        return "no"
    blocks: list[str] = []
    for answer in result.answers:
        lines = [f"{name} = {format_term(t)}" for name, t in answer.bindings.items()]
        blocks.append("\n".join(lines))
    out: list[str] = []
    for i, block in enumerate(blocks):
        last = i == len(blocks) - 1
        if not block:
            continue
        out.append(block + ("" if last and not result.more else " ;"))
    out.append("yes")
    return "\n".join(out)
