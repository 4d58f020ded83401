"""Static phase: parse sources, resolve filter directives, emit pages.

Each ``.md`` source becomes one HTML page. Filter directives are
resolved by running the named tool and splicing the filtered transcript
into the page as a preformatted box. Every code cell becomes an editor
placeholder keyed by its cell id, and a JSON cell manifest embedded in
the page describes the cells for the browser runtime. Solutions are
never written into pages; they live in a private sidecar consumed by
the dynamic phase, and every solution is self-checked before anything
is written (a failing self-check aborts the build).

Builds are deterministic: the same sources and tools produce
byte-identical output trees, with or without the transcript cache.
"""

from __future__ import annotations

import html
import json
import logging
import shutil
from dataclasses import dataclass, field
from pathlib import Path

from .doc_model import (
    EXERCISE,
    QUERY,
    CodeCell,
    Document,
    FilterDirective,
    Heading,
    Prose,
)
from .engine import Budget
from .exercise_checker import CheckerDeps, ExerciseSpec, check
from .filters import FilterRegistry, FilterSpec, apply_transcript, builtin_registry
from .source_parser import ParseError, parse
from .tool_runner import (
    TIMEOUT_EXIT_CODE,
    ToolCache,
    ToolError,
    ToolManifest,
    ToolRunner,
    load_manifest,
    manifest_from_dict,
    manifest_to_dict,
)

logger = logging.getLogger(__name__)

PROTOCOL_VERSION = 1
PRIVATE_DIR = "_private"
CACHE_DIR = ".ald-cache"
ASSETS_DIR = "assets"

_DEFAULT_ASSETS = Path(__file__).parent / "assets"


class BuildError(Exception):
    pass


@dataclass
class SiteConfig:
    source_dir: Path
    output_dir: Path
    manifest_path: Path | None = None
    default_tool_id: str | None = None
    cache_enabled: bool = True
    engine_budget: Budget = field(default_factory=Budget)
    assets_dir: Path | None = None

    def __post_init__(self):
        self.source_dir = Path(self.source_dir)
        self.output_dir = Path(self.output_dir)
        if self.manifest_path is not None:
            self.manifest_path = Path(self.manifest_path)
        if self.assets_dir is not None:
            self.assets_dir = Path(self.assets_dir)
        if self.source_dir.resolve() == self.output_dir.resolve():
            raise ValueError("source_dir and output_dir must be distinct")


@dataclass
class BuildReport:
    pages_built: int = 0
    tool_invocations: int = 0
    cache_hits: int = 0
    self_check_failures: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "pages_built": self.pages_built,
            "tool_invocations": self.tool_invocations,
            "cache_hits": self.cache_hits,
            "self_check_failures": list(self.self_check_failures),
        }


@dataclass
class _Page:
    stem: str
    title: str
    html: str
    manifest: dict
    exercises: dict


def build(config: SiteConfig, registry: FilterRegistry | None = None) -> BuildReport:
    """Build the site; raises ``BuildError`` with file/line context."""
    sources = sorted(config.source_dir.glob("*.md"))
    if not sources:
        raise BuildError(f"no sources: {config.source_dir} contains no .md files")

    if config.manifest_path is not None:
        manifest = load_manifest(config.manifest_path)
    else:
        manifest = ToolManifest(tools={})
    registry = registry or builtin_registry()
    cache = ToolCache(config.output_dir / CACHE_DIR if config.cache_enabled else None)
    runner = ToolRunner(manifest, cache)

    docs: list[Document] = []
    for source in sources:
        text = source.read_text(encoding="utf-8")
        try:
            docs.append(parse(text, str(source)))
        except ParseError as err:
            raise BuildError(f"{source}:{err.line}: {err.message}") from err

    _validate(docs, manifest, registry, config)

    pages = [_render_page(doc, config, runner, registry) for doc in docs]

    report = BuildReport()
    deps = CheckerDeps(runner=runner, filters=registry, budget=config.engine_budget)
    for page in pages:
        for cell_id, entry in page.exercises.items():
            spec = _exercise_spec(page.stem, cell_id, entry)
            verdict = check(spec, spec.solution, deps)
            if verdict.outcome != "pass":
                report.self_check_failures.append(
                    {"page": page.stem, "cell_id": cell_id, "feedback": verdict.feedback}
                )
    if report.self_check_failures:
        failing = ", ".join(
            f"{f['page']}#{f['cell_id']}" for f in report.self_check_failures
        )
        raise BuildError(f"solution self-check failed for: {failing}")

    _write_site(pages, config, manifest)
    report.pages_built = len(pages)
    report.tool_invocations = runner.spawns
    report.cache_hits = runner.cache_hits
    return report


def _validate(docs, manifest: ToolManifest, registry: FilterRegistry, config: SiteConfig):
    for doc in docs:
        for directive in doc.directives():
            tool_id = directive.tool_id or config.default_tool_id
            if tool_id is None:
                raise BuildError(
                    f"{doc.source_path}:{directive.span[0]}: directive names no tool "
                    "and no --default-tool is configured"
                )
            if tool_id not in manifest.tools:
                raise BuildError(
                    f"{doc.source_path}:{directive.span[0]}: unknown tool {tool_id!r}"
                )
            if directive.filter_name not in registry:
                raise BuildError(
                    f"{doc.source_path}:{directive.span[0]}: "
                    f"unknown filter {directive.filter_name!r}"
                )
        for cell in doc.code_cells():
            if cell.kind == EXERCISE and cell.checker == "verify_assert":
                if config.default_tool_id is None:
                    raise BuildError(
                        f"{doc.source_path}:{cell.span[0]}: exercise needs an analysis "
                        "tool but no --default-tool is configured"
                    )
                if config.default_tool_id not in manifest.tools:
                    raise BuildError(
                        f"{doc.source_path}:{cell.span[0]}: default tool "
                        f"{config.default_tool_id!r} is not in the manifest"
                    )


def _exercise_spec(page: str, cell_id: str, entry: dict) -> ExerciseSpec:
    filt = entry.get("filter")
    return ExerciseSpec(
        cell_id=cell_id,
        engine_id=entry["engine_id"],
        skeleton=entry["skeleton"],
        solution=entry["solution"],
        checker=entry["checker"],
        tool_id=entry.get("tool_id"),
        filter=FilterSpec(filt["name"], tuple(filt["params"])) if filt else None,
        query=entry.get("query"),
    )


def _render_page(
    doc: Document, config: SiteConfig, runner: ToolRunner, registry: FilterRegistry
) -> _Page:
    stem = Path(doc.source_path).stem
    title = doc.title or stem
    body: list[str] = []
    cells: list[dict] = []
    exercises: dict[str, dict] = {}

    for block in doc.blocks:
        if isinstance(block, Heading):
            level = block.level
            body.append(f"<h{level}>{html.escape(block.text)}</h{level}>")
        elif isinstance(block, Prose):
            body.extend(_render_prose(block.text))
        elif isinstance(block, CodeCell):
            entry = _manifest_entry(block)
            cells.append(entry)
            body.append(_render_cell(block, entry))
            if block.kind == EXERCISE:
                exercises[block.cell_id] = {
                    "engine_id": block.engine_id,
                    "skeleton": block.visible_text,
                    "solution": block.solution_text,
                    "checker": block.checker,
                    "tool_id": config.default_tool_id
                    if block.checker == "verify_assert"
                    else None,
                    "filter": {"name": "warn_error", "params": []}
                    if block.checker == "verify_assert"
                    else None,
                    "query": None,
                }
        elif isinstance(block, FilterDirective):
            body.append(_render_directive(block, doc, config, runner, registry))

    manifest = {
        "page": stem,
        "protocol_version": PROTOCOL_VERSION,
        "cells": cells,
    }
    return _Page(
        stem=stem,
        title=title,
        html=_page_html(title, body, manifest),
        manifest=manifest,
        exercises=exercises,
    )


def _manifest_entry(cell: CodeCell) -> dict:
    entry = {
        "cell_id": cell.cell_id,
        "kind": cell.kind,
        "engine_id": cell.engine_id,
        "initial_text": cell.visible_text,
    }
    if cell.kind == EXERCISE:
        entry["checker"] = cell.checker
    if cell.kind == QUERY:
        query = cell.visible_text.strip()
        if query.startswith("?-"):
            query = query[2:].strip()
        entry["query"] = query.rstrip(".").strip()
    return entry


def _render_prose(text: str) -> list[str]:
    out = []
    paragraph: list[str] = []

    def flush():
        if paragraph:
            out.append("<p>" + html.escape("\n".join(paragraph)) + "</p>")
            paragraph.clear()

    for line in text.split("\n"):
        if line.startswith("\\title"):
            continue  # rendered once as the page heading
        if not line.strip():
            flush()
        else:
            paragraph.append(line)
    flush()
    return out


def _render_cell(cell: CodeCell, entry: dict) -> str:
    initial = entry["initial_text"]
    return (
        f'<div class="cell cell-{cell.kind}" data-cell-id="{html.escape(cell.cell_id)}" '
        f'data-kind="{cell.kind}" data-engine="{html.escape(cell.engine_id)}">'
        f'<pre class="cell-text">{html.escape(initial)}</pre>'
        "</div>"
    )


def _render_directive(
    directive: FilterDirective,
    doc: Document,
    config: SiteConfig,
    runner: ToolRunner,
    registry: FilterRegistry,
) -> str:
    code_path = Path(doc.source_path).parent / directive.code_file
    try:
        input_text = code_path.read_text(encoding="utf-8")
    except OSError as err:
        raise BuildError(
            f"{doc.source_path}:{directive.span[0]}: cannot read {directive.code_file}: {err}"
        ) from err
    tool_id = directive.tool_id or config.default_tool_id
    assert tool_id is not None  # _validate checked
    try:
        transcript = runner.run_tool(tool_id, input_text, directive.tool_options)
    except ToolError as err:
        raise BuildError(f"{doc.source_path}:{directive.span[0]}: {err}") from err
    if transcript.exit_code == TIMEOUT_EXIT_CODE:
        raise BuildError(
            f"{doc.source_path}:{directive.span[0]}: tool {tool_id!r} timed out"
        )
    spec = FilterSpec(directive.filter_name, directive.filter_params)
    projected = apply_transcript(registry, spec, transcript)
    return f'<pre class="tool-output">{html.escape(projected)}</pre>'


def _page_html(title: str, body: list[str], manifest: dict) -> str:
    manifest_json = json.dumps(manifest, ensure_ascii=True, sort_keys=True).replace(
        "</", "<\\/"
    )
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        f"<title>{html.escape(title)}</title>",
        f'<link rel="stylesheet" href="{ASSETS_DIR}/runtime.css">',
        "</head>",
        "<body>",
        "<main>",
        f"<h1>{html.escape(title)}</h1>",
        *body,
        "</main>",
        f'<script type="application/json" id="cell-manifest">{manifest_json}</script>',
        f'<script type="module" src="{ASSETS_DIR}/runtime.js"></script>',
        "</body>",
        "</html>",
        "",
    ]
    return "\n".join(lines)


def _index_html(pages: list[_Page]) -> str:
    items = [
        f'<li><a href="{p.stem}.html">{html.escape(p.title)}</a></li>'
        for p in sorted(pages, key=lambda p: p.stem)
    ]
    lines = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        "<title>Pages</title>",
        f'<link rel="stylesheet" href="{ASSETS_DIR}/runtime.css">',
        "</head>",
        "<body>",
        "<main>",
        "<h1>Pages</h1>",
        "<ul>",
        *items,
        "</ul>",
        "</main>",
        "</body>",
        "</html>",
        "",
    ]
    return "\n".join(lines)


def _write_site(pages: list[_Page], config: SiteConfig, manifest: ToolManifest) -> None:
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    for page in pages:
        (out / f"{page.stem}.html").write_text(page.html, encoding="utf-8")
    (out / "index.html").write_text(_index_html(pages), encoding="utf-8")

    assets_src = config.assets_dir or _DEFAULT_ASSETS
    assets_dst = out / ASSETS_DIR
    if assets_dst.exists():
        shutil.rmtree(assets_dst)
    shutil.copytree(assets_src, assets_dst)

    private = out / PRIVATE_DIR
    private.mkdir(exist_ok=True)
    exercises = {
        "protocol_version": PROTOCOL_VERSION,
        "pages": {page.stem: page.exercises for page in pages},
    }
    (private / "exercises.json").write_text(
        json.dumps(exercises, ensure_ascii=True, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    site_meta = {
        "protocol_version": PROTOCOL_VERSION,
        "default_tool_id": config.default_tool_id,
        "tools": manifest_to_dict(manifest),
    }
    (private / "site.json").write_text(
        json.dumps(site_meta, ensure_ascii=True, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )


def load_site_meta(output_dir: Path) -> tuple[ToolManifest, str | None]:
    """Read back the tool manifest and default tool of a built site."""
    meta_path = Path(output_dir) / PRIVATE_DIR / "site.json"
    try:
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        return ToolManifest(tools={}), None
    return manifest_from_dict(meta.get("tools", {"tools": {}})), meta.get("default_tool_id")
