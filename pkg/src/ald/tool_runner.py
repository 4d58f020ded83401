"""Invoke external tools described by a manifest, with a build cache.

Tools are one-shot commands. The argv template may contain the
placeholders ``{input}`` (path of a temp file holding the input text,
for ``input_mode: file``) and ``{options}`` (splice point for the
per-call option tokens; appended at the end when absent). Manifests may
additionally use ``{python}`` (the running interpreter) and
``{manifest_dir}`` (directory of the manifest file), which are expanded
at load time so fixture manifests stay relocatable.

Results are cached content-addressed: the key digests tool id, tool
version, input bytes and option tokens, so editing the input or
upgrading the tool invalidates exactly the affected transcripts.
Timeouts are reported as transcripts with exit code -1 and are never
cached.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import subprocess
import sys
import tempfile
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

logger = logging.getLogger(__name__)

TIMEOUT_EXIT_CODE = -1
UNVERSIONED = "unversioned"


class ToolError(Exception):
    pass


class UnknownTool(ToolError):
    def __init__(self, tool_id: str):
        super().__init__(f"unknown tool: {tool_id!r}")
        self.tool_id = tool_id


class SpawnFailure(ToolError):
    pass


class ToolNondeterminism(ToolError):
    """Two runs with the same cache key produced different transcripts."""


@dataclass(frozen=True)
class ToolSpec:
    command: tuple[str, ...]
    input_mode: str = "file"  # "file" | "stdin"
    timeout_ms: int = 10_000
    version_command: tuple[str, ...] | None = None
    scrub: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.command:
            raise ValueError("tool command must be nonempty")
        if self.input_mode not in ("file", "stdin"):
            raise ValueError(f"bad input_mode: {self.input_mode!r}")
        if self.timeout_ms <= 0:
            raise ValueError("timeout_ms must be positive")


@dataclass(frozen=True)
class ToolManifest:
    tools: Mapping[str, ToolSpec]

    def __post_init__(self):
        for tool_id in self.tools:
            if not tool_id:
                raise ValueError("tool ids must be nonempty")


@dataclass(frozen=True)
class Transcript:
    stdout: str
    stderr: str
    exit_code: int
    duration_ms: int
    tool_version: str


def _expand_static(token: str, manifest_dir: Path) -> str:
    return token.replace("{manifest_dir}", str(manifest_dir)).replace(
        "{python}", sys.executable
    )


def load_manifest(path: str | Path) -> ToolManifest:
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    return manifest_from_dict(data, manifest_dir=path.resolve().parent)


def manifest_from_dict(data: dict, manifest_dir: Path | None = None) -> ToolManifest:
    base = manifest_dir or Path.cwd()
    tools: dict[str, ToolSpec] = {}
    for tool_id, raw in data.get("tools", {}).items():
        command = tuple(_expand_static(t, base) for t in raw["command"])
        version_command = raw.get("version_command")
        if version_command is not None:
            version_command = tuple(_expand_static(t, base) for t in version_command)
        tools[tool_id] = ToolSpec(
            command=command,
            input_mode=raw.get("input_mode", "file"),
            timeout_ms=int(raw.get("timeout_ms", 10_000)),
            version_command=version_command,
            scrub=tuple(raw.get("scrub", ())),
        )
    return ToolManifest(tools=tools)


def manifest_to_dict(manifest: ToolManifest) -> dict:
    out: dict = {"tools": {}}
    for tool_id, spec in sorted(manifest.tools.items()):
        entry: dict = {
            "command": list(spec.command),
            "input_mode": spec.input_mode,
            "timeout_ms": spec.timeout_ms,
        }
        if spec.version_command is not None:
            entry["version_command"] = list(spec.version_command)
        if spec.scrub:
            entry["scrub"] = list(spec.scrub)
        out["tools"][tool_id] = entry
    return out


def cache_key(tool_id: str, tool_version: str, input_text: str, options) -> str:
    input_digest = hashlib.sha256(input_text.encode("utf-8")).hexdigest()
    payload = json.dumps(
        [tool_id, tool_version, input_digest, list(options)],
        ensure_ascii=True,
        separators=(",", ":"),
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class ToolCache:
    """On-disk transcript cache keyed by hex digests.

    Writes are serialized per key. The first completed write wins;
    later writes with identical content are no-ops and later writes
    with different content raise ``ToolNondeterminism`` (durations are
    ignored for the comparison, they legitimately vary).
    """

    def __init__(self, root: Path | None):
        self.root = Path(root) if root is not None else None
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()

    @property
    def enabled(self) -> bool:
        return self.root is not None

    def _path(self, key: str) -> Path:
        assert self.root is not None
        return self.root / f"{key}.json"

    def _lock_for(self, key: str) -> threading.Lock:
        with self._locks_guard:
            lock = self._locks.get(key)
            if lock is None:
                lock = self._locks[key] = threading.Lock()
            return lock

    def get(self, key: str) -> Transcript | None:
        if self.root is None:
            return None
        path = self._path(key)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (FileNotFoundError, json.JSONDecodeError):
            return None
        return Transcript(**data)

    def put(self, key: str, transcript: Transcript) -> None:
        if self.root is None:
            return
        with self._lock_for(key):
            existing = self.get(key)
            if existing is not None:
                same = (
                    existing.stdout == transcript.stdout
                    and existing.stderr == transcript.stderr
                    and existing.exit_code == transcript.exit_code
                    and existing.tool_version == transcript.tool_version
                )
                if same:
                    return
                raise ToolNondeterminism(
                    f"cache entry {key} already holds a different transcript"
                )
            self.root.mkdir(parents=True, exist_ok=True)
            payload = json.dumps(transcript.__dict__, ensure_ascii=True, sort_keys=True)
            tmp = self._path(key).with_suffix(".tmp")
            tmp.write_text(payload, encoding="utf-8")
            os.replace(tmp, self._path(key))


class ToolRunner:
    """Runs manifest tools, counting spawns and cache hits."""

    def __init__(self, manifest: ToolManifest, cache: ToolCache | None = None):
        self.manifest = manifest
        self.cache = cache if cache is not None else ToolCache(None)
        self.spawns = 0
        self.version_spawns = 0
        self.requests = 0
        self.cache_hits = 0
        self._versions: dict[str, str] = {}

    @property
    def total_spawns(self) -> int:
        return self.spawns + self.version_spawns

    def _spec(self, tool_id: str) -> ToolSpec:
        spec = self.manifest.tools.get(tool_id)
        if spec is None:
            raise UnknownTool(tool_id)
        return spec

    def tool_version(self, tool_id: str) -> str:
        """Version string of a tool, or ``unversioned`` when undeclared."""
        cached = self._versions.get(tool_id)
        if cached is not None:
            return cached
        spec = self._spec(tool_id)
        if spec.version_command is None:
            version = UNVERSIONED
        else:
            self.version_spawns += 1
            try:
                proc = subprocess.run(
                    list(spec.version_command),
                    capture_output=True,
                    timeout=spec.timeout_ms / 1000.0,
                    env=self._env(spec),
                )
            except (OSError, subprocess.TimeoutExpired) as err:
                raise SpawnFailure(f"version command for {tool_id} failed: {err}") from err
            if proc.returncode != 0:
                raise SpawnFailure(
                    f"version command for {tool_id} exited {proc.returncode}"
                )
            version = proc.stdout.decode("utf-8", "replace").strip() or UNVERSIONED
        self._versions[tool_id] = version
        return version

    @staticmethod
    def _env(spec: ToolSpec) -> dict[str, str]:
        return {k: v for k, v in os.environ.items() if k not in spec.scrub}

    def run_tool(self, tool_id: str, input_text: str, options=()) -> Transcript:
        """Run ``tool_id`` on ``input_text``; serve cached transcripts on key hits."""
        options = tuple(options)
        spec = self._spec(tool_id)
        version = self.tool_version(tool_id)
        key = cache_key(tool_id, version, input_text, options)
        self.requests += 1

        hit = self.cache.get(key)
        if hit is not None:
            self.cache_hits += 1
            return hit

        transcript = self._spawn(spec, version, input_text, options)
        if transcript.exit_code != TIMEOUT_EXIT_CODE:
            self.cache.put(key, transcript)
        return transcript

    def _spawn(self, spec: ToolSpec, version: str, input_text: str, options) -> Transcript:
        with tempfile.TemporaryDirectory(prefix="ald-tool-") as workdir:
            input_path = Path(workdir) / "input.pl"
            argv: list[str] = []
            for token in spec.command:
                if token == "{options}":
                    argv.extend(options)
                elif "{input}" in token:
                    argv.append(token.replace("{input}", str(input_path)))
                else:
                    argv.append(token)
            if "{options}" not in spec.command:
                argv.extend(options)

            stdin_data: bytes | None = None
            if spec.input_mode == "file":
                input_path.write_text(input_text, encoding="utf-8")
            else:
                stdin_data = input_text.encode("utf-8")

            self.spawns += 1
            logger.debug("spawning %s", argv)
            started = time.monotonic()
            try:
                proc = subprocess.run(
                    argv,
                    input=stdin_data,
                    capture_output=True,
                    timeout=spec.timeout_ms / 1000.0,
                    env=self._env(spec),
                )
            except subprocess.TimeoutExpired as err:
                elapsed = int((time.monotonic() - started) * 1000)
                out = err.stdout.decode("utf-8", "replace") if err.stdout else ""
                return Transcript(
                    stdout=out,
                    stderr=f"tool timed out after {spec.timeout_ms} ms",
                    exit_code=TIMEOUT_EXIT_CODE,
                    duration_ms=elapsed,
                    tool_version=version,
                )
            except OSError as err:
                raise SpawnFailure(f"could not spawn {argv[0]!r}: {err}") from err
            elapsed = int((time.monotonic() - started) * 1000)
            return Transcript(
                stdout=proc.stdout.decode("utf-8", "replace"),
                stderr=proc.stderr.decode("utf-8", "replace"),
                exit_code=proc.returncode,
                duration_ms=elapsed,
                tool_version=version,
            )


def run_tool(
    manifest: ToolManifest,
    tool_id: str,
    input_text: str,
    options=(),
    cache: ToolCache | None = None,
) -> Transcript:
    """One-off convenience wrapper around ``ToolRunner.run_tool``."""
    return ToolRunner(manifest, cache).run_tool(tool_id, input_text, options)


def tool_version(manifest: ToolManifest, tool_id: str) -> str:
    return ToolRunner(manifest, None).tool_version(tool_id)
