"""Command-line front door.

    ald build <srcdir> -o <outdir> [--tools manifest.json] [--no-cache]
              [--default-tool <id>] [--assets <dir>] [--report json]
    ald serve <outdir> --port <p>
    ald eval <file.pl> --query <goal> [--answers k] [--depth d] [--steps n]
    ald filter <name> [params...] < transcript
    ald check <exercises.json> <cell_id> <submission.pl>

Exit codes: 0 success, 1 error (single `error:` line on stderr),
2 usage. `ald check` exits 0 only for a pass verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import Budget, EngineError, parse_program, parse_query, solve
from .engine.solve import format_transcript
from .exercise_checker import CheckerDeps, check, feedback_for
from .filters import FilterError, FilterSpec, builtin_registry
from .site_builder import BuildError, SiteConfig, _exercise_spec, build, load_site_meta
from .source_parser import ParseError
from .server import serve
from .tool_runner import ToolCache, ToolError, ToolRunner


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ald", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_build = sub.add_parser("build", help="build a site from sources")
    p_build.add_argument("srcdir", type=Path)
    p_build.add_argument("-o", "--output", dest="outdir", type=Path, required=True)
    p_build.add_argument("--tools", type=Path, default=None, metavar="MANIFEST")
    p_build.add_argument("--no-cache", action="store_true")
    p_build.add_argument("--default-tool", default=None, metavar="ID")
    p_build.add_argument("--assets", type=Path, default=None, metavar="DIR")
    p_build.add_argument("--report", choices=["json"], default=None)

    p_serve = sub.add_parser("serve", help="serve a built site")
    p_serve.add_argument("outdir", type=Path)
    p_serve.add_argument("--port", type=int, default=8000)

    p_eval = sub.add_parser("eval", help="run a query against a program file")
    p_eval.add_argument("program", type=Path)
    p_eval.add_argument("--query", required=True)
    p_eval.add_argument("--answers", type=int, default=1, metavar="K")
    p_eval.add_argument("--depth", type=int, default=64, metavar="D")
    p_eval.add_argument("--steps", type=int, default=1_000_000, metavar="N")

    p_filter = sub.add_parser("filter", help="filter a transcript from stdin")
    p_filter.add_argument("name")
    p_filter.add_argument("params", nargs="*")

    p_check = sub.add_parser("check", help="grade a submission against an exercise")
    p_check.add_argument("exercises", type=Path)
    p_check.add_argument("cell_id")
    p_check.add_argument("submission", type=Path)

    return parser


def _cmd_build(args) -> int:
    config = SiteConfig(
        source_dir=args.srcdir,
        output_dir=args.outdir,
        manifest_path=args.tools,
        default_tool_id=args.default_tool,
        cache_enabled=not args.no_cache,
        assets_dir=args.assets,
    )
    report = build(config)
    if args.report == "json":
        print(json.dumps(report.as_dict(), sort_keys=True))
    else:
        print(
            f"built {report.pages_built} page(s) into {args.outdir} "
            f"({report.tool_invocations} tool run(s), {report.cache_hits} cache hit(s))"
        )
    return 0


def _cmd_eval(args) -> int:
    text = args.program.read_text(encoding="utf-8")
    program = parse_program(text)
    goal = parse_query(args.query)
    budget = Budget(max_depth=args.depth, max_steps=args.steps, max_answers=args.answers)
    result = solve(program, goal, budget)
    print(format_transcript(result))
    return 0


def _cmd_filter(args) -> int:
    registry = builtin_registry()
    text = sys.stdin.read()
    print(registry.apply(FilterSpec(args.name, tuple(args.params)), text), end="")
    return 0


def _cmd_check(args) -> int:
    data = json.loads(args.exercises.read_text(encoding="utf-8"))
    found = None
    for page, cells in data.get("pages", {}).items():
        if args.cell_id in cells:
            found = (page, cells[args.cell_id])
            break
    if found is None:
        raise BuildError(f"cell {args.cell_id!r} is not in {args.exercises}")
    page, entry = found
    spec = _exercise_spec(page, args.cell_id, entry)

    # site.json next to exercises.json supplies the tool manifest.
    site_dir = args.exercises.resolve().parent.parent
    manifest, _default = load_site_meta(site_dir)
    runner = ToolRunner(manifest, ToolCache(site_dir / ".ald-cache"))
    deps = CheckerDeps(runner=runner, filters=builtin_registry())
    verdict = check(spec, args.submission.read_text(encoding="utf-8"), deps)
    print(verdict.outcome)
    print(feedback_for(verdict))
    return 0 if verdict.outcome == "pass" else 1


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "build":
            return _cmd_build(args)
        if args.command == "serve":
            serve(args.outdir, args.port)
            return 0
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "filter":
            return _cmd_filter(args)
        if args.command == "check":
            return _cmd_check(args)
        parser.error(f"unknown command {args.command!r}")
    except (
        BuildError,
        EngineError,
        FilterError,
        ParseError,
        ToolError,
        OSError,
        json.JSONDecodeError,
        ValueError,
    ) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
