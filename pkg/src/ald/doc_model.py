"""Document model shared by the parser, site builder and checker.

A ``Document`` is an ordered sequence of blocks parsed from one source
file: headings, verbatim prose runs, fenced code cells and tool-filter
directives. Every block records the 1-based line span it came from.
Instances are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PROGRAM = "program"
QUERY = "query"
STATIC = "static"
EXERCISE = "exercise"

CELL_KINDS = (PROGRAM, QUERY, STATIC, EXERCISE)

# (first_line, last_line), 1-based, inclusive. (0, 0) means "not from a file".
Span = tuple

_NO_SPAN = (0, 0)


def _has_whitespace(token: str) -> bool:
    return any(ch.isspace() for ch in token)


@dataclass(frozen=True)
class Heading:
    level: int
    text: str
    span: Span = field(default=_NO_SPAN, compare=False)

    def __post_init__(self):
        if not 1 <= self.level <= 6:
            raise ValueError(f"heading level out of range: {self.level}")


@dataclass(frozen=True)
class Prose:
    """A verbatim run of source lines (no inline markup is interpreted)."""

    text: str
    span: Span = field(default=_NO_SPAN, compare=False)


@dataclass(frozen=True)
class CodeCell:
    """One fenced code region.

    ``kind`` is one of ``program``, ``query``, ``static`` or
    ``exercise``. Exercises carry a hidden ``solution_text`` and the
    name of the checker that grades submissions; for every other kind
    both are absent. Query cells are exactly the runnable cells whose
    first nonblank line starts with ``?-`` (static cells may contain
    anything and are never classified by content).
    """

    kind: str
    engine_id: str
    visible_text: str
    solution_text: str | None = None
    checker: str | None = None
    cell_id: str = ""
    span: Span = field(default=_NO_SPAN, compare=False)

    def __post_init__(self):
        if self.kind not in CELL_KINDS:
            raise ValueError(f"unknown cell kind: {self.kind!r}")
        has_solution = self.solution_text is not None and self.checker is not None
        if self.kind == EXERCISE and not has_solution:
            raise ValueError("exercise cell requires solution_text and checker")
        if self.kind != EXERCISE and (
            self.solution_text is not None or self.checker is not None
        ):
            raise ValueError(f"{self.kind} cell must not carry a solution")
        if self.kind in (PROGRAM, QUERY):
            is_query = _first_nonblank(self.visible_text).startswith("?-")
            if is_query != (self.kind == QUERY):
                raise ValueError(
                    "runnable cell kind does not match its leading '?-' marker"
                )


@dataclass(frozen=True)
class FilterDirective:
    """A static-phase request: run a tool on a file, filter, splice.

    ``tool_options`` are passed to the tool verbatim; ``filter_params``
    go to the named filter. ``tool_id`` is None when the directive
    relies on the site-wide default tool.
    """

    code_file: str
    tool_options: tuple[str, ...]
    filter_name: str
    filter_params: tuple[str, ...] = ()
    tool_id: str | None = None
    span: Span = field(default=_NO_SPAN, compare=False)

    def __post_init__(self):
        if not self.code_file:
            raise ValueError("directive code_file must be nonempty")
        if not self.filter_name:
            raise ValueError("directive filter name must be nonempty")
        for tok in (*self.tool_options, *self.filter_params):
            if not tok or _has_whitespace(tok):
                raise ValueError(f"directive token may not contain whitespace: {tok!r}")


Block = Heading | Prose | CodeCell | FilterDirective


@dataclass(frozen=True)
class Document:
    source_path: str
    title: str | None
    blocks: tuple[Block, ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        last_end = 0
        for block in self.blocks:
            lo, hi = block.span
            if (lo, hi) == _NO_SPAN:
                continue
            if lo <= last_end or hi < lo:
                raise ValueError(f"block spans must be disjoint and increasing: {block}")
            last_end = hi
        ids = [b.cell_id for b in self.blocks if isinstance(b, CodeCell) and b.cell_id]
        if len(ids) != len(set(ids)):
            raise ValueError("cell_id values must be unique within a document")

    def code_cells(self) -> tuple[CodeCell, ...]:
        return tuple(b for b in self.blocks if isinstance(b, CodeCell))

    def directives(self) -> tuple[FilterDirective, ...]:
        return tuple(b for b in self.blocks if isinstance(b, FilterDirective))


def _first_nonblank(text: str) -> str:
    for line in text.split("\n"):
        if line.strip():
            return line.lstrip()
    return ""


def fence_tag_for(cell: CodeCell) -> str:
    if cell.kind == STATIC:
        return cell.engine_id
    return cell.engine_id + "_runnable"


def serialize(doc: Document) -> str:
    """Emit the blocks back as source text.

    Re-parsing the result yields a document structurally equal to
    ``doc``. For sources without blank padding around ``solution=``
    markers the text also matches the original modulo trailing
    whitespace per line.
    """
    out: list[str] = []
    for block in doc.blocks:
        if isinstance(block, Heading):
            out.append("#" * block.level + " " + block.text + "\n")
        elif isinstance(block, Prose):
            out.append(block.text + "\n")
        elif isinstance(block, CodeCell):
            out.append("```" + fence_tag_for(block) + "\n")
            if block.visible_text:
                out.append(block.visible_text + "\n")
            if block.kind == EXERCISE:
                out.append("solution=" + (block.checker or "") + "\n")
                if block.solution_text:
                    out.append(block.solution_text + "\n")
            out.append("```\n")
        elif isinstance(block, FilterDirective):
            tokens = list(block.tool_options)
            tokens.append("filter=" + block.filter_name)
            tokens.extend(f"{block.filter_name}:{p}" for p in block.filter_params)
            if block.tool_id is not None:
                tokens.append("tool=" + block.tool_id)
            out.append("@exfilter{%s}{%s}\n" % (block.code_file, ",".join(tokens)))
        else:  # pragma: no cover - the Block union is closed
            raise TypeError(f"unknown block type: {block!r}")
    return "".join(out)
