"""Prompt construction and output parsing for the two generation stages.

Stage one shows every node as a one-line catalog entry and asks for a
shortlist. Stage two shows full JSON configurations for the shortlisted
nodes plus per-tag pseudocode examples, and asks for pipeline pseudocode.
Both builders are pure: same inputs, byte-identical prompt.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Any

from .registry import NodeSpec, Registry

log = logging.getLogger(__name__)


class PipelineTag(str, Enum):
    LANGUAGE = "language"
    VISUAL = "visual"
    MULTIMODAL = "multimodal"

    @classmethod
    def parse(cls, value: str) -> "PipelineTag":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(
                f"invalid tag {value!r}; expected one of "
                + ", ".join(t.value for t in cls)
            ) from None


@dataclass(frozen=True)
class PromptBundle:
    stage: str  # "selector" | "writer"
    text: str
    tag: PipelineTag
    selected_nodes: tuple[str, ...] = ()
    fewshot_ids: tuple[str, ...] = ()


def _load_fewshot(name: str) -> dict[str, list[dict[str, Any]]]:
    path = resources.files("pipeforge").joinpath(f"data/fewshot/{name}.json")
    return json.loads(path.read_text(encoding="utf-8"))


def catalog_line(spec: NodeSpec) -> str:
    """One selector-prompt line: id, short description, optional recommendation."""
    if spec.recommended_nodes:
        recs = ", ".join(spec.recommended_nodes)
        return f"{spec.node_spec_id}: {spec.short_description}; usually selected with {recs}."
    return f"{spec.node_spec_id}: {spec.short_description}."


def build_selector_prompt(
    instruction: str, tag: PipelineTag, reg: Registry
) -> PromptBundle:
    fewshot = _load_fewshot("selector")[tag.value]
    parts = [
        "You are the node selector for a visual programming pipeline builder.",
        "Given an instruction and a pipeline tag, pick the nodes needed to",
        "build the pipeline.",
        "",
        "Guidelines:",
        "- Answer with a comma-separated list of node ids and nothing else.",
        "- Only use node ids from the list below.",
        "- Prefer the smallest set of nodes that fulfils the instruction.",
        "- Include the input and output nodes the pipeline needs.",
        "",
        "Available nodes:",
    ]
    parts.extend(catalog_line(spec) for spec in reg)
    parts.extend(["", f"Tag: {tag.value}", ""])
    for example in fewshot:
        parts.append(f"Q: {example['instruction']}")
        parts.append("A: " + ", ".join(example["nodes"]))
        parts.append("")
    parts.append(f"Q: {instruction}")
    parts.append("A:")

    return PromptBundle(
        stage="selector",
        text="\n".join(parts),
        tag=tag,
        fewshot_ids=tuple(f"selector/{tag.value}/{i}" for i in range(len(fewshot))),
    )


_TOKEN = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def parse_selector_output(raw: str, reg: Registry) -> list[str]:
    """Extract known node ids from a selector reply, first occurrence wins.

    Tolerates prefixes, brackets and newline separators; unknown ids are
    discarded (and logged) rather than fuzzily matched.
    """
    seen: list[str] = []
    for token in _TOKEN.findall(raw):
        if token in reg:
            if token not in seen:
                seen.append(token)
        elif "_" in token:
            log.debug("selector mentioned unknown node %r; discarded", token)
    return seen


def node_config(spec: NodeSpec) -> dict[str, Any]:
    """Writer-stage configuration block for one node."""
    config: dict[str, Any] = {
        "nodeSpecId": spec.node_spec_id,
        "description": spec.description,
        "category": spec.category,
    }
    if spec.input_specs:
        config["inputSpecs"] = [
            {"socketId": s.socket_id, "dataTypes": list(s.data_types)}
            for s in spec.input_specs
        ]
    if spec.output_specs:
        config["outputSpecs"] = [
            {"socketId": s.socket_id, "dataTypes": list(s.data_types)}
            for s in spec.output_specs
        ]
    if spec.recommended_nodes:
        config["recommendedNodes"] = list(spec.recommended_nodes)
    if spec.default_params:
        config["defaultParams"] = dict(spec.default_params)
    config["examples"] = list(spec.examples)
    return config


def tag_affine_nodes(tag: PipelineTag, reg: Registry) -> list[str]:
    """Fallback node set when the selector returns nothing.

    language: nodes touching only textual data; visual: nodes touching no
    textual data; multimodal: the whole library.
    """
    textual = {"text", "url", "string_list"}
    if tag is PipelineTag.MULTIMODAL:
        return [spec.node_spec_id for spec in reg]
    ids = []
    for spec in reg:
        involved = {
            dt
            for sock in (*spec.input_specs, *spec.output_specs)
            for dt in sock.data_types
        }
        if tag is PipelineTag.LANGUAGE and involved and involved <= textual:
            ids.append(spec.node_spec_id)
        elif tag is PipelineTag.VISUAL and involved and not (involved & textual):
            ids.append(spec.node_spec_id)
    return ids


def build_writer_prompt(
    instruction: str,
    tag: PipelineTag,
    selected: list[str] | tuple[str, ...],
    reg: Registry,
) -> PromptBundle:
    """Build the code-writing prompt for the selected nodes.

    Raises KeyError for ids missing from the registry. An empty selection
    falls back to the tag-affine node set (logged).
    """
    ids = list(selected)
    if not ids:
        ids = tag_affine_nodes(tag, reg)
        log.warning(
            "writer prompt requested with no selected nodes; "
            "falling back to %d %s-affine nodes",
            len(ids),
            tag.value,
        )
    specs = []
    for node_id in ids:
        spec = reg.get(node_id)
        if spec is None:
            raise KeyError(f"unknown node id {node_id!r} in selection")
        specs.append(spec)

    fewshot = _load_fewshot("writer")[tag.value]
    parts = [
        "You are the code writer for a visual programming pipeline builder.",
        "Write pseudocode that wires the selected nodes into a pipeline",
        "fulfilling the instruction.",
        "",
        "Guidelines:",
        "- Emit one line per node: [output_var = ]node_id: node_type(arg=source, ...)",
        "- A node id is its node type plus an underscore and a number, e.g. pali_1.",
        "- Input nodes take no output variable; their node id is the variable.",
        "- Group lines under the section headers input:, processor: and output:.",
        "- Arguments must reference output variables declared on earlier lines.",
        "",
        "Node configurations:",
    ]
    for spec in specs:
        parts.append(json.dumps(node_config(spec), indent=2))
    parts.extend(
        [
            "",
            "The following is a full list of the node ids you may use: "
            + ", ".join(ids)
            + ".",
            "Do not use any other node.",
            "",
        ]
    )
    for example in fewshot:
        parts.append(f"Q: {example['instruction']}")
        parts.append("A:")
        parts.append(example["pseudocode"])
        parts.append("")
    parts.append(f"Q: {instruction}")
    parts.append("A:")

    return PromptBundle(
        stage="writer",
        text="\n".join(parts),
        tag=tag,
        selected_nodes=tuple(ids),
        fewshot_ids=tuple(f"writer/{tag.value}/{i}" for i in range(len(fewshot))),
    )
