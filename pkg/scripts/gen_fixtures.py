#!/usr/bin/env python3
"""Regenerate derived fixtures.

Writes, from fixtures/replay_manifest.json and the .ipc samples:
  - fixtures/replay/<sha256-of-prompt>.txt  (canned selector/writer replies)
  - fixtures/corpus/corpus_unperturbed.json (generated == target)
  - fixtures/corpus/corpus_perturbed.json   (deterministically damaged copies)

The golden graphs under fixtures/golden/ are hand-authored on purpose and
never rewritten here. Rerun this script whenever prompt templates, few-shot
data or the registry change.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from pipeforge import dsl  # noqa: E402
from pipeforge.graph import copy_graph, graph_to_dict, interpret  # noqa: E402
from pipeforge.layout import optimize_layout  # noqa: E402
from pipeforge.llm import prompt_hash  # noqa: E402
from pipeforge.prompts import (  # noqa: E402
    PipelineTag,
    build_selector_prompt,
    build_writer_prompt,
    parse_selector_output,
)
from pipeforge.registry import load_canonical_registry  # noqa: E402

FIXTURES = ROOT / "fixtures"


def write_replay_fixtures() -> None:
    reg = load_canonical_registry()
    manifest = json.loads((FIXTURES / "replay_manifest.json").read_text())
    replay_dir = FIXTURES / "replay"
    replay_dir.mkdir(exist_ok=True)
    for old in replay_dir.glob("*.txt"):
        old.unlink()

    for case in manifest["cases"]:
        tag = PipelineTag(case["tag"])
        selector_prompt = build_selector_prompt(case["instruction"], tag, reg)
        selector_reply = case["selector_reply"]
        (replay_dir / f"{prompt_hash(selector_prompt.text)}.txt").write_text(
            selector_reply, encoding="utf-8"
        )

        writer_reply = case.get("writer_reply")
        if writer_reply is None and "writer_reply_file" in case:
            writer_reply = (FIXTURES / case["writer_reply_file"]).read_text()
        if writer_reply is None:
            continue  # selector-only case

        selected = parse_selector_output(selector_reply, reg)
        writer_prompt = build_writer_prompt(case["instruction"], tag, selected, reg)
        (replay_dir / f"{prompt_hash(writer_prompt.text)}.txt").write_text(
            writer_reply, encoding="utf-8"
        )
        print(f"replay: {case['name']} ({len(selected)} selected nodes)")


CORPUS_PIPELINES: list[tuple[str, str, str]] = [
    (
        "get the latest news about New York and summarize one result",
        "language",
        "file:news_summary.ipc",
    ),
    (
        "rewrite my note in a formal tone and show it",
        "language",
        "input:\n"
        'input_text_1: input_text(text="rewrite formally: see you tmrw")\n'
        "processor:\n"
        "palm_textgen_1_out = palm_textgen_1: palm_textgen(prompt=input_text_1)\n"
        "output:\n"
        "markdown_viewer_1: markdown_viewer(markdown=palm_textgen_1_out)\n",
    ),
    (
        "answer a question about a given web page",
        "language",
        "input:\n"
        'input_text_1: input_text(text="https://example.com")\n'
        'input_text_2: input_text(text="What is this page about?")\n'
        "processor:\n"
        "url_to_html_1_out = url_to_html_1: url_to_html(url=input_text_1)\n"
        "palm_model_1_out = palm_model_1: palm_model(prompt=input_text_2, context=url_to_html_1_out)\n"
        "output:\n"
        "markdown_viewer_1: markdown_viewer(markdown=palm_model_1_out)\n",
    ),
    (
        "pick a row from my sheet and expand it into a paragraph",
        "language",
        "input:\n"
        'input_text_1: input_text(text="https://sheets.example.com/doc")\n'
        "processor:\n"
        "input_sheet_1_out = input_sheet_1: input_sheet(url=input_text_1)\n"
        "string_picker_1_out = string_picker_1: string_picker(strings=input_sheet_1_out)\n"
        "palm_textgen_1_out = palm_textgen_1: palm_textgen(prompt=string_picker_1_out)\n"
        "output:\n"
        "markdown_viewer_1: markdown_viewer(markdown=palm_textgen_1_out)\n",
    ),
    (
        "highlight the people in my camera feed",
        "visual",
        "file:segmentation.ipc",
    ),
    (
        "turn a portrait photo into a 3d photo",
        "visual",
        "file:depth_photo.ipc",
    ),
    (
        "stick an uploaded image on people detected by pose",
        "visual",
        "input:\n"
        "live_camera_1: live_camera()\n"
        "input_image_1: input_image()\n"
        "processor:\n"
        "pose_landmark_1_out = pose_landmark_1: pose_landmark(image=live_camera_1)\n"
        "virtual_sticker_1_out = virtual_sticker_1: virtual_sticker(landmarks=pose_landmark_1_out, image=live_camera_1, sticker=input_image_1)\n"
        "output:\n"
        "image_viewer_1: image_viewer(image=virtual_sticker_1_out)\n",
    ),
    (
        "crop an uploaded picture and view it",
        "visual",
        "input:\n"
        "input_image_1: input_image()\n"
        "processor:\n"
        "image_processor_1_out = image_processor_1: image_processor(image=input_image_1)\n"
        "output:\n"
        "image_viewer_1: image_viewer(image=image_processor_1_out)\n",
    ),
    (
        "virtual sunglasses try-on with my web camera",
        "multimodal",
        "file:sunglasses.ipc",
    ),
    (
        "caption an uploaded image in detail",
        "multimodal",
        "file:caption.ipc",
    ),
    (
        "read the text in a photo and summarize it",
        "multimodal",
        "input:\n"
        "input_image_1: input_image()\n"
        "processor:\n"
        "image_to_text_1_out = image_to_text_1: image_to_text(image=input_image_1)\n"
        "palm_textgen_1_out = palm_textgen_1: palm_textgen(prompt=image_to_text_1_out)\n"
        "output:\n"
        "markdown_viewer_1: markdown_viewer(markdown=palm_textgen_1_out)\n",
    ),
    (
        "draw an illustration from my description",
        "multimodal",
        "input:\n"
        'input_text_1: input_text(text="a watercolor lighthouse at dawn")\n'
        "processor:\n"
        "imagen_1_out = imagen_1: imagen(prompt=input_text_1)\n"
        "output:\n"
        "image_viewer_1: image_viewer(image=imagen_1_out)\n",
    ),
]


def _drop_node(graph, node_index: int):
    out = copy_graph(graph)
    victim = out.nodes[node_index]
    out.nodes.remove(victim)
    for node in out.nodes:
        for input_id in list(node.incoming_edges):
            kept = [
                e for e in node.incoming_edges[input_id] if e.source_node_id != victim.id
            ]
            if kept:
                node.incoming_edges[input_id] = kept
            else:
                del node.incoming_edges[input_id]
    return out


def _drop_first_edge(graph):
    out = copy_graph(graph)
    for node in out.nodes:
        for input_id in list(node.incoming_edges):
            edges = node.incoming_edges[input_id]
            edges.pop(0)
            if not edges:
                del node.incoming_edges[input_id]
            return out
    return out


def perturb(graph, i: int):
    """Deterministic damage so perturbed corpora have nonzero ratios."""
    if i % 3 == 0:
        return _drop_node(graph, len(graph.nodes) - 1)
    if i % 3 == 1:
        return _drop_first_edge(graph)
    return _drop_node(graph, len(graph.nodes) // 2)


def write_corpora() -> None:
    reg = load_canonical_registry()
    unperturbed = []
    perturbed = []
    for i, (instruction, tag, source) in enumerate(CORPUS_PIPELINES):
        if source.startswith("file:"):
            source = (FIXTURES / "samples" / source[len("file:"):]).read_text()
        parsed = dsl.parse(source)
        assert not parsed.diagnostics, (instruction, parsed.diagnostics)
        report = interpret(parsed.program, reg)
        assert not report.dropped_lines and not report.dangling_args, instruction
        target = optimize_layout(report.graph)

        unperturbed.append(
            {
                "instruction": instruction,
                "tag": tag,
                "target": graph_to_dict(target),
                "generated": graph_to_dict(target),
            }
        )
        perturbed.append(
            {
                "instruction": instruction,
                "tag": tag,
                "target": graph_to_dict(target),
                "generated": graph_to_dict(perturb(target, i)),
            }
        )

    corpus_dir = FIXTURES / "corpus"
    corpus_dir.mkdir(exist_ok=True)
    (corpus_dir / "corpus_unperturbed.json").write_text(
        json.dumps(unperturbed, indent=2) + "\n"
    )
    (corpus_dir / "corpus_perturbed.json").write_text(
        json.dumps(perturbed, indent=2) + "\n"
    )
    print(f"corpus: {len(unperturbed)} pipelines (perturbed + unperturbed)")


if __name__ == "__main__":
    write_replay_fixtures()
    write_corpora()
