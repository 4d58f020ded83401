"""Dynamic phase: static file serving plus the evaluate/check protocol.

POST /eval evaluates a program/query pair under a budget and returns
formatted answers; POST /check grades an exercise submission against
the private sidecar written at build time. Requests are handled on
independent threads; each evaluation is isolated. Paths under the
private sidecar and the tool cache are never served.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import replace
from http import HTTPStatus
from http.server import SimpleHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

from .engine import Budget, EngineError, format_term, parse_program, parse_query, solve
from .exercise_checker import CheckerDeps, check, feedback_for
from .filters import builtin_registry
from .site_builder import CACHE_DIR, PRIVATE_DIR, _exercise_spec, load_site_meta
from .tool_runner import ToolCache, ToolRunner

logger = logging.getLogger(__name__)

_HIDDEN = (PRIVATE_DIR, CACHE_DIR)


class SiteContext:
    """Shared, read-only state for one served site."""

    def __init__(self, output_dir: Path, budget: Budget | None = None):
        self.output_dir = Path(output_dir)
        self.budget = budget or Budget()
        manifest, default_tool = load_site_meta(self.output_dir)
        self.default_tool_id = default_tool
        cache_dir = self.output_dir / CACHE_DIR
        self.runner = ToolRunner(manifest, ToolCache(cache_dir))
        self.filters = builtin_registry()
        try:
            raw = (self.output_dir / PRIVATE_DIR / "exercises.json").read_text(
                encoding="utf-8"
            )
            self.exercises = json.loads(raw).get("pages", {})
        except FileNotFoundError:
            self.exercises = {}

    def find_exercise(self, page: str, cell_id: str) -> dict | None:
        return self.exercises.get(page, {}).get(cell_id)


def _clamp(value, default: int, lo: int, hi: int) -> int:
    try:
        n = int(value)
    except (TypeError, ValueError):
        return default
    return max(lo, min(n, hi))


def handle_eval(ctx: SiteContext, payload: dict) -> dict:
    program_text = payload.get("program", "")
    query_text = payload.get("query", "")
    if not isinstance(program_text, str) or not isinstance(query_text, str):
        return {"status": "error", "error": "program and query must be strings"}
    budget = Budget(
        max_depth=_clamp(payload.get("max_depth"), ctx.budget.max_depth, 1, 4096),
        max_steps=_clamp(payload.get("max_steps"), ctx.budget.max_steps, 1, 50_000_000),
        max_answers=_clamp(payload.get("max_answers"), ctx.budget.max_answers, 1, 256),
    )
    try:
        program = parse_program(program_text)
        goal = parse_query(query_text)
        result = solve(program, goal, budget)
    except EngineError as err:
        return {"status": "error", "error": f"{err.kind}: {err}"}
    answers = [
        {
            "bindings": {name: format_term(t) for name, t in a.bindings.items()},
            "depth": a.proof_depth,
        }
        for a in result.answers
    ]
    return {"status": "ok", "answers": answers, "more": result.more}


def handle_check(ctx: SiteContext, payload: dict) -> dict | None:
    """Grade a submission; None means the cell is unknown."""
    page = payload.get("page")
    cell_id = payload.get("cell_id")
    submission = payload.get("submission")
    if not isinstance(page, str) or not isinstance(cell_id, str) or not isinstance(
        submission, str
    ):
        raise ValueError("page, cell_id and submission must be strings")
    entry = ctx.find_exercise(page, cell_id)
    if entry is None:
        return None
    spec = _exercise_spec(page, cell_id, entry)
    deps = CheckerDeps(runner=ctx.runner, filters=ctx.filters, budget=ctx.budget)
    verdict = check(spec, submission, deps)
    return {"verdict": verdict.outcome, "feedback": feedback_for(verdict)}


class SiteRequestHandler(SimpleHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    ctx: SiteContext  # set on the server class

    def __init__(self, *args, **kwargs):
        super().__init__(*args, directory=str(self.ctx.output_dir), **kwargs)

    def log_message(self, fmt, *args):
        logger.debug("%s " + fmt, self.address_string(), *args)

    def _reject_hidden(self) -> bool:
        parts = self.path.lstrip("/").split("/")
        if parts and parts[0] in _HIDDEN:
            self._send_json({"error": "not found"}, HTTPStatus.NOT_FOUND)
            return True
        return False

    def do_GET(self):
        if self._reject_hidden():
            return
        super().do_GET()

    def do_HEAD(self):
        if self._reject_hidden():
            return
        super().do_HEAD()

    def _send_json(self, obj: dict, status=HTTPStatus.OK) -> None:
        body = json.dumps(obj, ensure_ascii=True, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _read_json(self) -> dict | None:
        try:
            length = int(self.headers.get("Content-Length", "0"))
            payload = json.loads(self.rfile.read(length).decode("utf-8"))
        except (ValueError, json.JSONDecodeError):
            return None
        return payload if isinstance(payload, dict) else None

    def do_POST(self):
        if self.path not in ("/eval", "/check"):
            self._send_json({"error": "not found"}, HTTPStatus.NOT_FOUND)
            return
        payload = self._read_json()
        if payload is None:
            self._send_json({"error": "malformed JSON request"}, HTTPStatus.BAD_REQUEST)
            return
        try:
            if self.path == "/eval":
                self._send_json(handle_eval(self.ctx, payload))
                return
            response = handle_check(self.ctx, payload)
        except ValueError as err:
            self._send_json({"error": str(err)}, HTTPStatus.BAD_REQUEST)
            return
        if response is None:
            self._send_json({"error": "unknown page or cell"}, HTTPStatus.NOT_FOUND)
            return
        self._send_json(response)


def make_server(output_dir: Path, port: int, budget: Budget | None = None) -> ThreadingHTTPServer:
    """Create (but do not start) the site server; port 0 picks a free port."""
    ctx = SiteContext(output_dir, budget)
    handler = type("BoundHandler", (SiteRequestHandler,), {"ctx": ctx})
    return ThreadingHTTPServer(("127.0.0.1", port), handler)


def serve(output_dir: Path, port: int, budget: Budget | None = None) -> None:
    """Serve a built site until interrupted."""
    server = make_server(output_dir, port, budget)
    host, bound_port = server.server_address[:2]
    # flush so wrappers waiting for the URL see it even through a pipe
    print(f"serving {output_dir} on http://{host}:{bound_port}/ (Ctrl-C stops)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def serve_in_thread(output_dir: Path, port: int = 0, budget: Budget | None = None):
    """Start the server on a daemon thread; returns (server, base_url)."""
    server = make_server(output_dir, port, budget)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    host, bound_port = server.server_address[:2]
    return server, f"http://{host}:{bound_port}"
