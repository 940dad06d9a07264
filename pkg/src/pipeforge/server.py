"""HTTP service exposing generation, compilation and evaluation.

Handlers are stateless; the registry and prompt templates are loaded once
at startup and shared read-only. Every error body is a JSON object with
"error" and "detail" keys (plus endpoint-specific extras), never HTML.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from . import dsl
from .graph import (
    GraphFormatError,
    SerializedGraph,
    graph_from_dict,
    graph_to_dict,
    interpret,
)
from .graph import validate as validate_graph
from .layout import optimize_layout
from .llm import (
    DEFAULT_STAGE_TIMEOUT,
    StageError,
    backend_from_env,
    generate,
    result_to_dict,
)
from .metric import BudgetExceededError, interactions, report_to_dict
from .prompts import PipelineTag
from .registry import (
    Registry,
    canonical_registry_path,
    load_registry,
    registry_to_dict,
)

MAX_COMPILE_BYTES = 100 * 1024
MAX_INSTRUCTION_CHARS = 2_000
MAX_EVAL_NODES = 15

ENV_CORS_ORIGIN = "PIPEFORGE_CORS_ORIGIN"


@dataclass
class ServerSettings:
    registry_path: str | Path | None = None
    backend: Any = None  # defaults to backend_from_env()
    stage_timeout: float = DEFAULT_STAGE_TIMEOUT
    save_dir: str | Path | None = None
    eval_workers: int = 2
    cors_origin: str | None = None


def _error(status: int, error: str, detail: str, **extra: Any) -> JSONResponse:
    return JSONResponse(
        status_code=status, content={"error": error, "detail": detail, **extra}
    )


async def _json_body(request: Request) -> tuple[dict | None, JSONResponse | None]:
    body = await request.body()
    if not body:
        return None, _error(400, "bad request", "empty request body")
    try:
        payload = json.loads(body.decode("utf-8"))
    except UnicodeDecodeError:
        return None, _error(400, "bad request", "request body is not UTF-8")
    except json.JSONDecodeError as exc:
        return None, _error(400, "bad request", f"invalid JSON: {exc}")
    if not isinstance(payload, dict):
        return None, _error(400, "bad request", "request body must be a JSON object")
    return payload, None


def create_app(settings: ServerSettings | None = None) -> FastAPI:
    """Build the application; raises if the registry cannot be loaded."""
    settings = settings or ServerSettings()
    registry_path = settings.registry_path or canonical_registry_path()
    registry: Registry = load_registry(registry_path)  # boot fails on bad registry
    backend = settings.backend if settings.backend is not None else backend_from_env()

    registry_dict = registry_to_dict(registry)
    registry_bytes = json.dumps(registry_dict, sort_keys=True).encode("utf-8")
    etag = f'"v{registry.version}-{hashlib.sha256(registry_bytes).hexdigest()[:12]}"'

    eval_slots = threading.BoundedSemaphore(max(1, settings.eval_workers))
    save_dir = Path(settings.save_dir) if settings.save_dir else None
    save_lock = threading.Lock()

    app = FastAPI(title="pipeforge", docs_url=None, redoc_url=None)

    cors_origin = settings.cors_origin or os.environ.get(ENV_CORS_ORIGIN)
    if cors_origin:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=[cors_origin],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(Exception)
    async def unhandled(_request: Request, exc: Exception) -> JSONResponse:
        return _error(500, "internal error", str(exc))

    @app.get("/api/nodes")
    async def get_nodes(request: Request) -> Response:
        if request.headers.get("if-none-match") == etag:
            return Response(status_code=304, headers={"ETag": etag})
        return JSONResponse(content=registry_dict, headers={"ETag": etag})

    @app.post("/api/generate")
    async def post_generate(request: Request) -> Response:
        payload, err = await _json_body(request)
        if err is not None:
            return err
        instruction = payload.get("instruction")
        raw_tag = payload.get("tag")
        if not isinstance(instruction, str) or not instruction.strip():
            return _error(400, "bad request", "instruction must be a non-empty string")
        if len(instruction) > MAX_INSTRUCTION_CHARS:
            return _error(
                400,
                "bad request",
                f"instruction exceeds {MAX_INSTRUCTION_CHARS} characters",
            )
        try:
            tag = PipelineTag.parse(raw_tag if isinstance(raw_tag, str) else "")
        except ValueError as exc:
            return _error(400, "bad request", str(exc))

        try:
            result = generate(
                instruction,
                tag,
                backend,
                registry,
                stage_timeout=settings.stage_timeout,
            )
        except StageError as exc:
            status = 504 if exc.timeout else 502
            return _error(
                status,
                "stage timeout" if exc.timeout else "backend failure",
                str(exc),
                stage=exc.stage,
            )

        body = result_to_dict(result)
        if save_dir is not None:
            save_dir.mkdir(parents=True, exist_ok=True)
            line = json.dumps({"time": time.time(), **body})
            with save_lock, open(save_dir / "generations.jsonl", "a") as fh:
                fh.write(line + "\n")
        return JSONResponse(content=body)

    @app.post("/api/compile")
    async def post_compile(request: Request) -> Response:
        body = await request.body()
        if len(body) > MAX_COMPILE_BYTES:
            return _error(413, "payload too large", "body exceeds 100 KB")
        if not body:
            return _error(400, "bad request", "empty request body")
        try:
            payload = json.loads(body.decode("utf-8"))
        except UnicodeDecodeError:
            return _error(400, "bad request", "request body is not UTF-8")
        except json.JSONDecodeError as exc:
            return _error(400, "bad request", f"invalid JSON: {exc}")
        if not isinstance(payload, dict) or not isinstance(
            payload.get("pseudocode"), str
        ):
            return _error(400, "bad request", "expected {\"pseudocode\": \"...\"}")

        # Compilation itself never rejects content: empty or hopeless
        # pseudocode still yields a (possibly empty) graph plus diagnostics.
        diagnostics: list[str] = []
        try:
            parsed = dsl.parse(payload["pseudocode"])
        except dsl.DslError as exc:
            return JSONResponse(
                content={
                    "graph": graph_to_dict(SerializedGraph()),
                    "droppedLines": [],
                    "danglingArgs": [],
                    "diagnostics": [str(exc)],
                }
            )
        report = interpret(parsed.program, registry)
        diagnostics.extend(report.diagnostics)
        diagnostics.extend(f"line {d.line}: {d.message}" for d in parsed.diagnostics)
        return JSONResponse(
            content={
                "graph": graph_to_dict(optimize_layout(report.graph)),
                "droppedLines": [
                    {"line": line, "reason": reason}
                    for line, reason in report.dropped_lines
                ],
                "danglingArgs": [
                    {"nodeId": node_id, "argName": arg}
                    for node_id, arg in report.dangling_args
                ],
                "diagnostics": diagnostics,
            }
        )

    @app.post("/api/layout")
    async def post_layout(request: Request) -> Response:
        payload, err = await _json_body(request)
        if err is not None:
            return err
        try:
            graph = graph_from_dict(payload.get("graph"))
        except GraphFormatError as exc:
            return _error(400, "bad request", str(exc))
        violations = validate_graph(graph, registry)
        if violations:
            return _error(
                422,
                "invalid graph",
                "graph does not satisfy structural invariants",
                violations=[
                    {"kind": v.kind, "message": v.message, "nodes": list(v.nodes)}
                    for v in violations
                ],
            )
        return JSONResponse(content={"graph": graph_to_dict(optimize_layout(graph))})

    @app.post("/api/evaluate")
    async def post_evaluate(request: Request) -> Response:
        payload, err = await _json_body(request)
        if err is not None:
            return err
        cascade = bool(payload.get("cascade", True))
        graphs = {}
        for key in ("generated", "target"):
            try:
                graphs[key] = graph_from_dict(payload.get(key))
            except GraphFormatError as exc:
                return _error(400, "bad request", f"{key}: {exc}")

        from .metric import InvalidGraphError

        for key, graph in graphs.items():
            if len(graph.nodes) > MAX_EVAL_NODES:
                return _error(
                    409,
                    "budget exceeded",
                    f"{key} graph has {len(graph.nodes)} nodes; "
                    f"the exact metric is limited to {MAX_EVAL_NODES}",
                )

        def run() -> Any:
            with eval_slots:
                return interactions(
                    graphs["generated"],
                    graphs["target"],
                    registry=registry,
                    cascade=cascade,
                )

        try:
            report = await _in_thread(run)
        except InvalidGraphError as exc:
            return _error(
                422,
                "invalid graph",
                str(exc),
                violations=[
                    {"kind": v.kind, "message": v.message, "nodes": list(v.nodes)}
                    for v in exc.violations
                ],
                which=exc.which,
            )
        except BudgetExceededError as exc:
            return _error(409, "budget exceeded", str(exc))
        return JSONResponse(content=report_to_dict(report))

    return app


async def _in_thread(fn):
    import anyio

    return await anyio.to_thread.run_sync(fn)


def run_server(
    host: str = "127.0.0.1",
    port: int = 8080,
    settings: ServerSettings | None = None,
) -> None:
    import uvicorn

    app = create_app(settings)
    uvicorn.run(app, host=host, port=port, log_level="info")
