"""pipeforge: instruction-driven visual-programming pipeline engine.

Turns a natural-language instruction into a laid-out pipeline DAG via a
two-stage LLM flow and a pseudocode interpreter, and scores generated
pipelines against targets with an exact minimal-interaction metric.
"""

from .dsl import PseudoProgram, Statement, parse, print_program, token_count
from .graph import (
    CompileReport,
    IncomingEdge,
    SerializedGraph,
    SerializedNode,
    from_json,
    interpret,
    to_json,
    validate,
)
from .layout import optimize_layout
from .llm import GenerationResult, HttpBackend, ReplayBackend, generate
from .metric import (
    EditOp,
    InteractionReport,
    apply_script,
    interactions,
    oracle_interactions,
)
from .prompts import PipelineTag, build_selector_prompt, build_writer_prompt
from .registry import (
    NodeSpec,
    Registry,
    SocketSpec,
    default_parameters,
    load_canonical_registry,
    load_registry,
)

__version__ = "0.1.0"

__all__ = [
    "CompileReport",
    "EditOp",
    "GenerationResult",
    "HttpBackend",
    "IncomingEdge",
    "InteractionReport",
    "NodeSpec",
    "PipelineTag",
    "PseudoProgram",
    "Registry",
    "ReplayBackend",
    "SerializedGraph",
    "SerializedNode",
    "SocketSpec",
    "Statement",
    "apply_script",
    "build_selector_prompt",
    "build_writer_prompt",
    "default_parameters",
    "from_json",
    "generate",
    "interactions",
    "interpret",
    "load_canonical_registry",
    "load_registry",
    "optimize_layout",
    "oracle_interactions",
    "parse",
    "print_program",
    "to_json",
    "token_count",
    "validate",
]
