"""Projection of tool transcripts to the fragment a document needs.

Filters are pure functions from text to text, looked up by name in a
registry. Line-selection filters (``warn_error``, ``regex``, ``head``,
``pred_props``) return a subsequence of the input lines and are
idempotent. Filters read stdout by default; the parameter
``stream=stderr`` or ``stream=both`` selects otherwise when applying to
a full transcript.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Sequence

from .tool_runner import Transcript


class FilterError(Exception):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind  # "unknown_filter" | "bad_params"


def _bad_params(message: str) -> FilterError:
    return FilterError("bad_params", message)


@dataclass(frozen=True)
class FilterSpec:
    name: str
    params: tuple[str, ...] = ()


FilterFn = Callable[[str, Sequence[str]], str]


class FilterRegistry:
    def __init__(self):
        self._filters: dict[str, FilterFn] = {}

    def register(self, name: str, fn: FilterFn) -> None:
        """Add or shadow a filter; later registrations win."""
        if not name:
            raise ValueError("filter name must be nonempty")
        self._filters[name] = fn

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._filters))

    def __contains__(self, name: str) -> bool:
        return name in self._filters

    def apply(self, spec: FilterSpec, text: str) -> str:
        fn = self._filters.get(spec.name)
        if fn is None:
            raise FilterError("unknown_filter", f"unknown filter: {spec.name!r}")
        params = tuple(p for p in spec.params if not p.startswith("stream="))
        return fn(text, params)


def apply(registry: FilterRegistry, spec: FilterSpec, text: str) -> str:
    return registry.apply(spec, text)


def register(registry: FilterRegistry, name: str, fn: FilterFn) -> FilterRegistry:
    registry.register(name, fn)
    return registry


def apply_transcript(registry: FilterRegistry, spec: FilterSpec, transcript: Transcript) -> str:
    """Apply a filter to the transcript stream its params select."""
    stream = "stdout"
    for p in spec.params:
        if p.startswith("stream="):
            stream = p[len("stream=") :]
    if stream == "stdout":
        text = transcript.stdout
    elif stream == "stderr":
        text = transcript.stderr
    elif stream == "both":
        parts = [t for t in (transcript.stdout, transcript.stderr) if t]
        text = "\n".join(parts)
    else:
        raise _bad_params(f"unknown stream: {stream!r}")
    return registry.apply(spec, text)


# --- built-ins ---------------------------------------------------------------


_MESSAGE_START = re.compile(r"^(WARNING|ERROR)\b")


def _filter_identity(text: str, params: Sequence[str]) -> str:
    return text


def _filter_warn_error(text: str, params: Sequence[str]) -> str:
    """Keep WARNING/ERROR message blocks.

    A block starts at a line beginning with WARNING or ERROR and
    extends through the directly following indented lines.
    """
    if not text:
        return ""
    lines = text.split("\n")
    starts = [i for i, line in enumerate(lines) if _MESSAGE_START.match(line)]
    selected: list[int] = []
    for start in starts:
        selected.append(start)
        j = start + 1
        while j < len(lines) and lines[j][:1] in (" ", "\t"):
            selected.append(j)
            j += 1
    keep = sorted(set(selected))
    return "\n".join(lines[i] for i in keep)


def _filter_regex(text: str, params: Sequence[str]) -> str:
    if not params:
        raise _bad_params("regex filter needs a pattern parameter")
    try:
        pattern = re.compile(params[0])
    except re.error as err:
        raise _bad_params(f"bad regex {params[0]!r}: {err}") from err
    if not text:
        return ""
    return "\n".join(line for line in text.split("\n") if pattern.search(line))


def _filter_head(text: str, params: Sequence[str]) -> str:
    if not params:
        raise _bad_params("head filter needs a line count parameter")
    try:
        n = int(params[0])
    except ValueError as err:
        raise _bad_params(f"head filter count is not an integer: {params[0]!r}") from err
    if n < 0:
        raise _bad_params("head filter count must be non-negative")
    if not text:
        return ""
    return "\n".join(text.split("\n")[:n])


_ANSWER_LINE = re.compile(r"^\s*[A-Z_][A-Za-z0-9_]* = ")


def _filter_answers(text: str, params: Sequence[str]) -> str:
    """Extract ``Var = Term`` lines from an engine transcript."""
    out: list[str] = []
    for line in text.split("\n"):
        if not _ANSWER_LINE.match(line):
            continue
        line = line.rstrip()
        if line.endswith(" ;"):
            line = line[:-2]
        out.append(line)
    return "\n".join(out)


def _parse_pred_indicator(param: str) -> tuple[str, int]:
    name, slash, arity = param.partition("/")
    if not slash or not name:
        raise _bad_params(f"pred_props wants name/arity, got {param!r}")
    try:
        return name, int(arity)
    except ValueError as err:
        raise _bad_params(f"pred_props arity is not an integer: {param!r}") from err


def _toplevel_arity(line: str, open_paren: int) -> int | None:
    depth = 0
    commas = 0
    for ch in line[open_paren:]:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return commas + 1
        elif ch == "," and depth == 1:
            commas += 1
    return None


def _filter_pred_props(text: str, params: Sequence[str]) -> str:
    """Keep analyzer assertion lines for one predicate indicator."""
    if not params:
        raise _bad_params("pred_props filter needs a name/arity parameter")
    name, arity = _parse_pred_indicator(params[0])
    prefix = f":- true pred {name}("
    out: list[str] = []
    for line in text.split("\n"):
        if not line.startswith(prefix):
            continue
        if _toplevel_arity(line, len(prefix) - 1) == arity:
            out.append(line)
    return "\n".join(out)


def builtin_registry() -> FilterRegistry:
    registry = FilterRegistry()
    registry.register("identity", _filter_identity)
    registry.register("warn_error", _filter_warn_error)
    registry.register("regex", _filter_regex)
    registry.register("head", _filter_head)
    registry.register("answers", _filter_answers)
    registry.register("pred_props", _filter_pred_props)
    return registry
