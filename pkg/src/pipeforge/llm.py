"""LLM backends and the two-stage pipeline generation flow.

Two backends ship: an HTTP chat-completion client configured through
environment variables, and a file-based replay backend that maps the
sha256 of a prompt to a canned response. The replay backend makes the
whole generation flow deterministic and is what every test uses.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import requests

from . import dsl
from .graph import CompileReport, SerializedGraph, interpret
from .layout import optimize_layout
from .prompts import (
    PipelineTag,
    PromptBundle,
    build_selector_prompt,
    build_writer_prompt,
    parse_selector_output,
)
from .registry import Registry

ENV_BACKEND = "PIPEFORGE_LLM_BACKEND"
ENV_URL = "PIPEFORGE_LLM_URL"
ENV_MODEL = "PIPEFORGE_LLM_MODEL"
ENV_KEY = "PIPEFORGE_LLM_KEY"
ENV_REPLAY_DIR = "PIPEFORGE_REPLAY_DIR"

DEFAULT_REPLAY_DIR = "fixtures/replay"
DEFAULT_STAGE_TIMEOUT = 60.0


class BackendError(Exception):
    pass


class BackendTimeout(BackendError):
    pass


class StageError(Exception):
    """A generation stage failed; carries the stage name for reporting."""

    def __init__(self, stage: str, message: str, *, timeout: bool = False):
        super().__init__(message)
        self.stage = stage
        self.timeout = timeout


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class ReplayBackend:
    """Deterministic backend reading canned replies from <dir>/<sha256>.txt."""

    name = "replay"

    def __init__(self, directory: str | Path = DEFAULT_REPLAY_DIR):
        self.directory = Path(directory)

    def complete(self, prompt: str, *, timeout: float | None = None) -> str:
        path = self.directory / f"{prompt_hash(prompt)}.txt"
        if not path.is_file():
            raise BackendError(
                f"no replay fixture {path.name} in {self.directory} "
                "(regenerate with scripts/gen_fixtures.py)"
            )
        return path.read_text(encoding="utf-8")


class HttpBackend:
    """Generic chat-completion client; endpoint and model come from env/args."""

    name = "http"

    def __init__(self, url: str, model: str = "", api_key: str = ""):
        if not url:
            raise BackendError(f"{ENV_URL} is not set")
        self.url = url
        self.model = model
        self.api_key = api_key

    def complete(self, prompt: str, *, timeout: float | None = None) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }
        try:
            resp = requests.post(self.url, json=body, headers=headers, timeout=timeout)
            resp.raise_for_status()
            payload = resp.json()
        except requests.Timeout as exc:
            raise BackendTimeout(f"backend timed out after {timeout}s") from exc
        except (requests.RequestException, ValueError) as exc:
            raise BackendError(str(exc)) from exc
        try:
            return payload["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise BackendError(f"unexpected backend response shape: {exc}") from exc


def backend_from_env(kind: str | None = None) -> ReplayBackend | HttpBackend:
    kind = kind or os.environ.get(ENV_BACKEND, "replay")
    if kind == "replay":
        return ReplayBackend(os.environ.get(ENV_REPLAY_DIR, DEFAULT_REPLAY_DIR))
    if kind == "http":
        return HttpBackend(
            url=os.environ.get(ENV_URL, ""),
            model=os.environ.get(ENV_MODEL, ""),
            api_key=os.environ.get(ENV_KEY, ""),
        )
    raise BackendError(f"unknown backend {kind!r}; expected 'http' or 'replay'")


@dataclass
class GenerationResult:
    instruction: str
    tag: PipelineTag
    selector_prompt: PromptBundle
    selector_raw: str
    selected_nodes: list[str]
    writer_prompt: PromptBundle
    pseudocode: str
    parse_diagnostics: list[tuple[int, str]]
    report: CompileReport
    graph: SerializedGraph
    timings: dict[str, float] = field(default_factory=dict)


def generate(
    instruction: str,
    tag: PipelineTag,
    backend: Any,
    reg: Registry,
    *,
    allow_fallback: bool = True,
    stage_timeout: float = DEFAULT_STAGE_TIMEOUT,
) -> GenerationResult:
    """Run selector -> writer -> interpret -> layout, keeping all artifacts.

    Failures surface as StageError naming the stage that broke; with the
    replay backend the whole flow is deterministic.
    """
    timings: dict[str, float] = {}

    selector_prompt = build_selector_prompt(instruction, tag, reg)
    start = time.perf_counter()
    try:
        selector_raw = backend.complete(selector_prompt.text, timeout=stage_timeout)
    except BackendTimeout as exc:
        raise StageError("selector", str(exc), timeout=True) from exc
    except BackendError as exc:
        raise StageError("selector", str(exc)) from exc
    timings["selector"] = time.perf_counter() - start

    selected = parse_selector_output(selector_raw, reg)
    if not selected and not allow_fallback:
        raise StageError("selector", "selector produced no nodes")

    writer_prompt = build_writer_prompt(instruction, tag, selected, reg)
    start = time.perf_counter()
    try:
        pseudocode = backend.complete(writer_prompt.text, timeout=stage_timeout)
    except BackendTimeout as exc:
        raise StageError("writer", str(exc), timeout=True) from exc
    except BackendError as exc:
        raise StageError("writer", str(exc)) from exc
    timings["writer"] = time.perf_counter() - start

    if not pseudocode.strip():
        raise StageError("writer", "no pseudocode produced")

    start = time.perf_counter()
    parsed = dsl.parse(pseudocode)
    report = interpret(parsed.program, reg)
    graph = optimize_layout(report.graph)
    timings["interpret"] = time.perf_counter() - start

    return GenerationResult(
        instruction=instruction,
        tag=tag,
        selector_prompt=selector_prompt,
        selector_raw=selector_raw,
        selected_nodes=list(writer_prompt.selected_nodes),
        writer_prompt=writer_prompt,
        pseudocode=pseudocode,
        parse_diagnostics=[(d.line, d.message) for d in parsed.diagnostics],
        report=report,
        graph=graph,
        timings=timings,
    )


def result_to_dict(result: GenerationResult) -> dict[str, Any]:
    """Wire shape for the service and the CLI's --json mode."""
    from .graph import graph_to_dict

    return {
        "instruction": result.instruction,
        "tag": result.tag.value,
        "selectedNodes": list(result.selected_nodes),
        "pseudocode": result.pseudocode,
        "droppedLines": [
            {"line": line, "reason": reason}
            for line, reason in result.report.dropped_lines
        ],
        "danglingArgs": [
            {"nodeId": node_id, "argName": arg}
            for node_id, arg in result.report.dangling_args
        ],
        "diagnostics": list(result.report.diagnostics)
        + [f"line {line}: {msg}" for line, msg in result.parse_diagnostics],
        "graph": graph_to_dict(result.graph),
        "timings": result.timings,
    }
