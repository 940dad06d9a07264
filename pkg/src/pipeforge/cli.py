"""Command-line front door.

Exit codes are part of the contract for CI use: 0 success, 1 usage or I/O
error, 2 backend failure, 3 search budget exceeded.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import dsl
from .corpus import (
    evaluate_corpus,
    format_table,
    load_corpus,
    report_to_dict as corpus_report_to_dict,
    write_csv,
)
from .graph import from_json, interpret, to_json
from .layout import optimize_layout
from .llm import BackendError, StageError, backend_from_env, generate, result_to_dict
from .metric import BudgetExceededError, InvalidGraphError, interactions, report_to_dict
from .prompts import PipelineTag
from .registry import RegistryError, load_canonical_registry, load_registry

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BACKEND = 2
EXIT_BUDGET = 3


class UsageFailure(click.ClickException):
    exit_code = EXIT_USAGE


def _load_registry_opt(path: str | None):
    try:
        return load_registry(path) if path else load_canonical_registry()
    except RegistryError as exc:
        raise UsageFailure(str(exc)) from exc


registry_option = click.option(
    "--registry",
    "registry_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Override the node library file.",
)


@click.group()
def cli() -> None:
    """Generate, compile, lay out and score visual-programming pipelines."""


@cli.command("generate")
@click.option("--instruction", required=True, help="What the pipeline should do.")
@click.option(
    "--tag",
    required=True,
    type=click.Choice([t.value for t in PipelineTag]),
    help="Pipeline category steering few-shot examples.",
)
@click.option(
    "--backend",
    "backend_kind",
    type=click.Choice(["http", "replay"]),
    default=None,
    help="LLM backend (default: PIPEFORGE_LLM_BACKEND or replay).",
)
@click.option("--out", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True, help="Print the full result as JSON.")
@registry_option
def cmd_generate(instruction, tag, backend_kind, out, as_json, registry_path):
    """Generate a pipeline from an instruction and write/print it."""
    reg = _load_registry_opt(registry_path)
    try:
        backend = backend_from_env(backend_kind)
        result = generate(instruction, PipelineTag(tag), backend, reg)
    except (BackendError, StageError) as exc:
        stage = getattr(exc, "stage", None)
        where = f" ({stage} stage)" if stage else ""
        click.echo(f"backend failure{where}: {exc}", err=True)
        sys.exit(EXIT_BACKEND)

    pipeline_json = to_json(result.graph)
    if out:
        Path(out).write_text(pipeline_json, encoding="utf-8")

    if as_json:
        click.echo(json.dumps(result_to_dict(result), indent=2))
    else:
        click.echo(f"selected nodes: {', '.join(result.selected_nodes)}")
        if result.report.dropped_lines:
            for line, reason in result.report.dropped_lines:
                click.echo(f"dropped line {line}: {reason}")
        else:
            click.echo("dropped lines: none")
        click.echo(
            f"graph: {result.graph.node_count} nodes, "
            f"{result.graph.edge_count} edges"
        )
        if out:
            click.echo(f"pipeline written to {out}")
        else:
            click.echo(pipeline_json, nl=False)


@cli.command("compile")
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-layout", is_flag=True, help="Skip position assignment.")
@registry_option
def cmd_compile(source, no_layout, registry_path):
    """Compile a pseudocode (.ipc) file to pipeline JSON on stdout."""
    reg = _load_registry_opt(registry_path)
    text = Path(source).read_text(encoding="utf-8")
    try:
        parsed = dsl.parse(text)
    except dsl.DslError as exc:
        raise UsageFailure(f"{source}: {exc}") from exc

    report = interpret(parsed.program, reg)
    for diag in parsed.diagnostics:
        click.echo(f"warning: line {diag.line}: {diag.message}", err=True)
    for line, reason in report.dropped_lines:
        click.echo(f"warning: dropped line {line}: {reason}", err=True)
    for node_id, arg in report.dangling_args:
        click.echo(f"warning: {node_id}: dangling argument {arg}", err=True)
    for message in report.diagnostics:
        click.echo(f"warning: {message}", err=True)
    if not report.graph.nodes:
        click.echo("warning: no statements produced any nodes", err=True)

    graph = report.graph if no_layout else optimize_layout(report.graph)
    click.echo(to_json(graph), nl=False)


@cli.command("eval")
@click.option("--generated", type=click.Path(exists=True, dir_okay=False))
@click.option("--target", type=click.Path(exists=True, dir_okay=False))
@click.option("--corpus", "corpus_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--no-cascade", is_flag=True, help="Charge every edge delete separately.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None)
@click.option("--json", "as_json", is_flag=True)
@registry_option
def cmd_eval(generated, target, corpus_path, no_cascade, csv_path, as_json, registry_path):
    """Score generated pipelines against targets (one pair or a corpus)."""
    reg = _load_registry_opt(registry_path)
    cascade = not no_cascade

    if corpus_path:
        pairs = load_corpus(corpus_path)
        try:
            report = evaluate_corpus(pairs, registry=reg, cascade=cascade)
        except BudgetExceededError as exc:
            click.echo(f"budget exceeded: {exc}", err=True)
            sys.exit(EXIT_BUDGET)
        if csv_path:
            write_csv(report, csv_path)
            click.echo(f"per-pair results written to {csv_path}", err=True)
        if as_json:
            click.echo(json.dumps(corpus_report_to_dict(report), indent=2))
        else:
            click.echo(format_table(report))
        return

    if not generated or not target:
        raise UsageFailure("provide --generated and --target, or --corpus")
    try:
        g = from_json(Path(generated).read_text(encoding="utf-8"))
        t = from_json(Path(target).read_text(encoding="utf-8"))
        report = interactions(g, t, registry=reg, cascade=cascade)
    except BudgetExceededError as exc:
        click.echo(f"budget exceeded: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    except InvalidGraphError as exc:
        raise UsageFailure(str(exc)) from exc

    if as_json:
        click.echo(json.dumps(report_to_dict(report), indent=2))
    else:
        click.echo(f"count: {report.count}")
        click.echo(f"from scratch: {report.from_scratch}")
        click.echo(f"ratio: {report.ratio:.4f}")


@cli.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8080, show_default=True)
@click.option("--save-dir", type=click.Path(file_okay=False), default=None)
@click.option("--eval-workers", default=2, show_default=True)
@registry_option
def cmd_serve(host, port, save_dir, eval_workers, registry_path):
    """Run the HTTP service."""
    from .server import ServerSettings, run_server

    try:
        run_server(
            host=host,
            port=port,
            settings=ServerSettings(
                registry_path=registry_path,
                save_dir=save_dir,
                eval_workers=eval_workers,
            ),
        )
    except (RegistryError, BackendError) as exc:
        raise UsageFailure(str(exc)) from exc
    except OSError as exc:  # bind failure: occupied port, bad address
        raise UsageFailure(str(exc)) from exc
    except SystemExit as exc:  # uvicorn startup failure
        if exc.code:
            raise UsageFailure("server failed to start") from exc


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code mapping."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code if isinstance(exc, UsageFailure) else EXIT_USAGE
    except click.Abort:
        return EXIT_USAGE
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_USAGE
        return code
    except OSError as exc:
        click.echo(str(exc), err=True)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
