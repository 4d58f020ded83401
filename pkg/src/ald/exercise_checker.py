"""Grading of exercise submissions against hidden reference solutions.

Three checkers are available, selected by name in the exercise spec:

``run_tests``
    parse the submission and run its embedded test directives; pass iff
    all of them pass.
``verify_assert``
    run the configured tool on the submission and on the hidden
    solution, project both transcripts through the filter pipeline and
    pass iff the normalized results are equal.
``output_match``
    evaluate a stored query against submission and solution and pass
    iff the formatted answer sets are equal.

Feedback shown to students never contains the solution text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .engine import (
    Budget,
    EngineError,
    ReadError,
    format_term,
    parse_program,
    parse_query,
    run_tests,
    solve,
)
from .filters import FilterRegistry, FilterSpec, apply_transcript, builtin_registry
from .tool_runner import TIMEOUT_EXIT_CODE, ToolError, ToolRunner

PASS = "pass"
FAIL = "fail"
ERROR = "error"

CHECKERS = ("run_tests", "verify_assert", "output_match")

DEFAULT_FILTER = FilterSpec("warn_error", ())

_REDACTED = "feedback withheld: it would reveal the reference solution"


@dataclass(frozen=True)
class ExerciseSpec:
    cell_id: str
    engine_id: str
    skeleton: str
    solution: str
    checker: str
    tool_id: str | None = None
    filter: FilterSpec | None = None
    query: str | None = None


@dataclass(frozen=True)
class Verdict:
    outcome: str  # "pass" | "fail" | "error"
    feedback: str


@dataclass
class CheckerDeps:
    runner: ToolRunner | None = None
    filters: FilterRegistry = field(default_factory=builtin_registry)
    budget: Budget = field(default_factory=Budget)


def normalize_output(text: str) -> str:
    """Trim trailing spaces per line and collapse blank-line runs."""
    lines = [line.rstrip() for line in text.split("\n")]
    out: list[str] = []
    for line in lines:
        if not line and out and not out[-1]:
            continue
        out.append(line)
    while out and not out[0]:
        out.pop(0)
    while out and not out[-1]:
        out.pop()
    return "\n".join(out)


def check(spec: ExerciseSpec, submission: str, deps: CheckerDeps) -> Verdict:
    """Grade ``submission`` against ``spec``; never raises for bad input."""
    try:
        program = parse_program(submission)
    except ReadError as err:
        return _guard(spec, Verdict(ERROR, str(err)))

    if spec.checker == "run_tests":
        verdict = _check_run_tests(program, deps)
    elif spec.checker == "verify_assert":
        verdict = _check_verify_assert(spec, submission, deps)
    elif spec.checker == "output_match":
        verdict = _check_output_match(spec, program, deps)
    else:
        verdict = Verdict(ERROR, f"unknown checker: {spec.checker!r}")
    return _guard(spec, verdict)


def _guard(spec: ExerciseSpec, verdict: Verdict) -> Verdict:
    solution = spec.solution.strip()
    if solution and solution in verdict.feedback:
        return Verdict(verdict.outcome, _REDACTED)
    return verdict


def _check_run_tests(program, deps: CheckerDeps) -> Verdict:
    results = run_tests(program, deps.budget)
    failing = [r for r in results if r.verdict != "pass"]
    if not failing:
        return Verdict(PASS, "")
    return Verdict(FAIL, "\n".join(r.detail for r in failing))


def _check_verify_assert(spec: ExerciseSpec, submission: str, deps: CheckerDeps) -> Verdict:
    if deps.runner is None or spec.tool_id is None:
        return Verdict(ERROR, "no analysis tool configured for this exercise")
    fspec = spec.filter or DEFAULT_FILTER
    try:
        got = deps.runner.run_tool(spec.tool_id, submission)
        want = deps.runner.run_tool(spec.tool_id, spec.solution)
    except ToolError as err:
        return Verdict(ERROR, str(err))
    for transcript, who in ((got, "submission"), (want, "reference")):
        if transcript.exit_code == TIMEOUT_EXIT_CODE:
            return Verdict(ERROR, f"analysis of the {who} timed out")
    if got.exit_code != 0:
        message = apply_transcript(deps.filters, fspec, got) or got.stderr or got.stdout
        return Verdict(ERROR, normalize_output(message))
    if want.exit_code != 0:
        return Verdict(ERROR, "analysis of the reference solution failed")
    got_text = normalize_output(apply_transcript(deps.filters, fspec, got))
    want_text = normalize_output(apply_transcript(deps.filters, fspec, want))
    if got_text == want_text:
        return Verdict(PASS, "")
    feedback = got_text or "the analysis reports nothing where the expected result does"
    return Verdict(FAIL, feedback)


def _check_output_match(spec: ExerciseSpec, program, deps: CheckerDeps) -> Verdict:
    if not spec.query:
        return Verdict(ERROR, "no query stored for this output_match exercise")
    try:
        goal = parse_query(spec.query)
        reference = parse_program(spec.solution)
    except ReadError as err:
        return Verdict(ERROR, f"exercise is misconfigured: {err}")
    try:
        got = _answer_set(program, goal, deps.budget)
    except EngineError as err:
        return Verdict(ERROR, str(err))
    try:
        want = _answer_set(reference, goal, deps.budget)
    except EngineError as err:
        return Verdict(ERROR, f"reference evaluation failed: {err}")
    if got == want:
        return Verdict(PASS, "")
    shown = "\n".join(sorted(got)) if got else "no"
    return Verdict(FAIL, f"your program answers:\n{shown}")


def _answer_set(program, goal, budget: Budget) -> frozenset[str]:
    result = solve(program, goal, budget)
    formatted = []
    for answer in result.answers:
        formatted.append(
            ", ".join(f"{n} = {format_term(t)}" for n, t in answer.bindings.items())
            or "yes"
        )
    return frozenset(formatted)


def feedback_for(verdict: Verdict) -> str:
    """Student-facing text for a verdict."""
    if verdict.outcome == PASS:
        return "Correct!"
    if verdict.outcome == FAIL:
        hint = "Hint: compare your assertion's success properties."
        return f"{verdict.feedback}\n\n{hint}" if verdict.feedback else hint
    return verdict.feedback
