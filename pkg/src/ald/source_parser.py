"""Parser for the plain-text source format.

The grammar is line-oriented: a line ```` ```<tag> ```` opens a fence
and a bare ```` ``` ```` closes it, ``#``-prefixed lines are headings,
``\\title <text>`` names the document, ``@exfilter{<path>}{<tok>,...}``
on its own line is a filter directive, and everything else is prose.
Inside a runnable fence a single ``solution=<checker>`` line splits the
body into a visible skeleton and a hidden solution.

Parsing is total: every input yields a ``Document`` or raises exactly
one ``ParseError`` carrying an accurate line number.
"""

from __future__ import annotations

import re
from dataclasses import replace
from pathlib import PurePath

from .doc_model import (
    EXERCISE,
    PROGRAM,
    QUERY,
    STATIC,
    Block,
    CodeCell,
    Document,
    FilterDirective,
    Heading,
    Prose,
)

UNCLOSED_FENCE = "unclosed_fence"
BAD_DIRECTIVE = "bad_directive"
BAD_SOLUTION_MARKER = "bad_solution_marker"


class ParseError(Exception):
    def __init__(self, kind: str, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.kind = kind
        self.line = line
        self.message = message


_FENCE = re.compile(r"^```(.*)$")
_HEADING = re.compile(r"^(#{1,6}) (.*)$")
_TITLE = re.compile(r"^\\title\s+(.*)$")
_DIRECTIVE = re.compile(r"^@exfilter\{([^{}]*)\}\{([^{}]*)\}$")
_MARKER = re.compile(r"^solution=(\S+)$")
_RUNNABLE_SUFFIX = "_runnable"


def _trim_blank_edges(lines: list[str]) -> list[str]:
    lo, hi = 0, len(lines)
    while lo < hi and not lines[lo].strip():
        lo += 1
    while hi > lo and not lines[hi - 1].strip():
        hi -= 1
    return lines[lo:hi]


def _first_nonblank(lines: list[str]) -> str:
    for line in lines:
        if line.strip():
            return line.lstrip()
    return ""


def classify_cell(
    fence_tag: str, body: str, *, cell_id: str = "", base_line: int = 1
) -> CodeCell:
    """Build a ``CodeCell`` from a fence tag and body text.

    Tags ending in ``_runnable`` yield runnable cells (query when the
    first nonblank line starts with ``?-``, exercise when a
    ``solution=`` marker is present, program otherwise); a bare tag
    yields a static cell. LaTeX-escaped ``\\_`` in tags is tolerated.
    ``base_line`` is the source line of the first body line and is only
    used for error positions.
    """
    tag = fence_tag.replace("\\_", "_").strip()
    runnable = tag.endswith(_RUNNABLE_SUFFIX)
    engine_id = tag[: -len(_RUNNABLE_SUFFIX)] if runnable else tag

    lines = [line.rstrip() for line in body.split("\n")] if body else []
    markers: list[tuple[int, str]] = []
    for i, line in enumerate(lines):
        if not line.startswith("solution="):
            continue
        m = _MARKER.match(line)
        if not m:
            raise ParseError(
                BAD_SOLUTION_MARKER,
                base_line + i,
                f"malformed solution marker: {line!r}",
            )
        markers.append((i, m.group(1)))

    if markers:
        if not runnable:
            raise ParseError(
                BAD_SOLUTION_MARKER,
                base_line + markers[0][0],
                "solution marker outside a runnable fence",
            )
        if len(markers) > 1:
            raise ParseError(
                BAD_SOLUTION_MARKER,
                base_line + markers[1][0],
                "second solution marker in one fence",
            )
        at, checker = markers[0]
        skeleton = _trim_blank_edges(lines[:at])
        solution = _trim_blank_edges(lines[at + 1 :])
        return CodeCell(
            kind=EXERCISE,
            engine_id=engine_id,
            visible_text="\n".join(skeleton),
            solution_text="\n".join(solution),
            checker=checker,
            cell_id=cell_id,
        )

    visible = "\n".join(lines)
    if runnable:
        kind = QUERY if _first_nonblank(lines).startswith("?-") else PROGRAM
    else:
        kind = STATIC
    return CodeCell(kind=kind, engine_id=engine_id, visible_text=visible, cell_id=cell_id)


def _parse_directive(line: str, lineno: int) -> FilterDirective:
    m = _DIRECTIVE.match(line)
    if not m:
        raise ParseError(BAD_DIRECTIVE, lineno, f"malformed @exfilter directive: {line!r}")
    code_file, raw_opts = m.group(1), m.group(2)
    if not code_file:
        raise ParseError(BAD_DIRECTIVE, lineno, "directive code file is empty")

    tokens = raw_opts.split(",") if raw_opts else []
    filter_name: str | None = None
    tool_id: str | None = None
    rest: list[str] = []
    for tok in tokens:
        tok = tok.strip()
        if not tok or any(ch.isspace() for ch in tok):
            raise ParseError(BAD_DIRECTIVE, lineno, f"bad directive token: {tok!r}")
        if tok.startswith("filter="):
            if filter_name is not None:
                raise ParseError(BAD_DIRECTIVE, lineno, "duplicate filter= token")
            filter_name = tok[len("filter=") :]
        elif tok.startswith("tool="):
            if tool_id is not None:
                raise ParseError(BAD_DIRECTIVE, lineno, "duplicate tool= token")
            tool_id = tok[len("tool=") :]
        else:
            rest.append(tok)
    if not filter_name:
        raise ParseError(BAD_DIRECTIVE, lineno, "directive needs a filter=<name> token")
    if tool_id == "":
        raise ParseError(BAD_DIRECTIVE, lineno, "tool= token names no tool")

    prefix = filter_name + ":"
    tool_options = tuple(t for t in rest if not t.startswith(prefix))
    filter_params = tuple(t[len(prefix) :] for t in rest if t.startswith(prefix))
    return FilterDirective(
        code_file=code_file,
        tool_options=tool_options,
        filter_name=filter_name,
        filter_params=filter_params,
        tool_id=tool_id,
        span=(lineno, lineno),
    )


def parse(source: str, source_path: str) -> Document:
    """Parse ``source`` into a ``Document``; raise ``ParseError`` on bad input."""
    lines = source.split("\n")
    if lines and lines[-1] == "":
        lines.pop()

    blocks: list[Block] = []
    title: str | None = None
    prose_buf: list[str] = []
    prose_start = 0

    def flush_prose(end: int) -> None:
        if prose_buf:
            blocks.append(Prose("\n".join(prose_buf), span=(prose_start, end)))
            prose_buf.clear()

    i = 0
    n = len(lines)
    while i < n:
        raw = lines[i].rstrip()
        lineno = i + 1

        fence = _FENCE.match(raw)
        if fence is not None:
            flush_prose(lineno - 1)
            tag = fence.group(1)
            body: list[str] = []
            j = i + 1
            while j < n and lines[j].rstrip() != "```":
                body.append(lines[j].rstrip())
                j += 1
            if j >= n:
                raise ParseError(UNCLOSED_FENCE, lineno, "fence opened here is never closed")
            cell = classify_cell(tag, "\n".join(body), base_line=lineno + 1)
            blocks.append(replace(cell, span=(lineno, j + 1)))
            i = j + 1
            continue

        if raw.startswith("@exfilter"):
            flush_prose(lineno - 1)
            blocks.append(_parse_directive(raw, lineno))
            i += 1
            continue

        if raw.startswith("solution="):
            raise ParseError(
                BAD_SOLUTION_MARKER, lineno, "solution marker outside a runnable fence"
            )

        heading = _HEADING.match(raw)
        if heading is not None:
            flush_prose(lineno - 1)
            blocks.append(Heading(len(heading.group(1)), heading.group(2), span=(lineno, lineno)))
            i += 1
            continue

        title_m = _TITLE.match(raw)
        if title_m is not None and title is None:
            title = title_m.group(1).strip()
        if not prose_buf:
            prose_start = lineno
        prose_buf.append(raw)
        i += 1

    flush_prose(n)

    if title is None:
        for block in blocks:
            if isinstance(block, Heading) and block.level == 1:
                title = block.text
                break

    stem = PurePath(source_path).stem or "page"
    ordinal = 0
    numbered: list[Block] = []
    for block in blocks:
        if isinstance(block, CodeCell):
            ordinal += 1
            block = replace(block, cell_id=f"{stem}-cell-{ordinal}")
        numbered.append(block)

    return Document(source_path=source_path, title=title, blocks=tuple(numbered))
