"""Shared generators and checkers for the test suite."""

from __future__ import annotations

import random
import string

from pipeforge.dsl import (
    Arg,
    PseudoProgram,
    SectionMarker,
    Statement,
    StringLiteral,
    VarRef,
)
from pipeforge.graph import IncomingEdge, SerializedGraph, SerializedNode
from pipeforge.metric import InteractionReport
from pipeforge.registry import Registry, default_parameters

_IDENT_FIRST = string.ascii_lowercase + "_"
_IDENT_REST = string.ascii_lowercase + string.digits + "_"
_LITERAL_CHARS = string.ascii_letters + string.digits + ' .,:;!?\'"\\()[]{}-+*/'


def random_ident(rng: random.Random, max_extra: int = 8) -> str:
    first = rng.choice(_IDENT_FIRST)
    rest = "".join(rng.choice(_IDENT_REST) for _ in range(rng.randint(0, max_extra)))
    return first + rest


def random_statement(rng: random.Random) -> Statement:
    node_type = random_ident(rng)
    node_id = f"{node_type}_{rng.randint(1, 99)}"
    output_var = random_ident(rng) if rng.random() < 0.6 else None

    names: set[str] = set()
    args = []
    for _ in range(rng.randint(0, 4)):
        name = random_ident(rng)
        if name in names:
            continue
        names.add(name)
        if rng.random() < 0.5:
            value = VarRef(random_ident(rng))
        else:
            length = rng.randint(0, 20)
            value = StringLiteral(
                "".join(rng.choice(_LITERAL_CHARS) for _ in range(length))
            )
        args.append(Arg(name, value))

    return Statement(
        output_var=output_var,
        node_id=node_id,
        node_type=node_type,
        args=tuple(args),
    )


def random_program(rng: random.Random, max_statements: int = 8) -> PseudoProgram:
    statements = tuple(
        random_statement(rng) for _ in range(rng.randint(0, max_statements))
    )
    sections = []
    for _ in range(rng.randint(0, 3)):
        sections.append(
            SectionMarker(random_ident(rng), rng.randint(0, len(statements)))
        )
    sections.sort(key=lambda m: m.index)  # parse records them in index order
    return PseudoProgram(statements=statements, sections=tuple(sections))


def random_pipeline(
    reg: Registry,
    rng: random.Random,
    *,
    min_nodes: int = 0,
    max_nodes: int = 6,
    edge_probability: float = 0.7,
) -> SerializedGraph:
    """A registry-valid random pipeline: typed edges, acyclic by construction."""
    specs = list(reg)
    n = rng.randint(min_nodes, max_nodes)
    nodes: list[SerializedNode] = []
    counters: dict[str, int] = {}

    for _ in range(n):
        spec = rng.choice(specs)
        counters[spec.node_spec_id] = counters.get(spec.node_spec_id, 0) + 1
        node_id = f"{spec.node_spec_id}_{counters[spec.node_spec_id]}"

        incoming: dict[str, list[IncomingEdge]] = {}
        for sock in spec.input_specs:
            if not nodes or rng.random() > edge_probability:
                continue
            candidates = []
            for earlier in nodes:
                out = reg.get(earlier.node_spec_id).default_output
                if out is not None and set(out.data_types) & set(sock.data_types):
                    candidates.append((earlier.id, out.socket_id))
            if candidates:
                src_id, out_id = rng.choice(candidates)
                incoming[sock.socket_id] = [IncomingEdge(src_id, out_id)]

        nodes.append(
            SerializedNode(
                id=node_id,
                node_spec_id=spec.node_spec_id,
                incoming_edges=incoming,
                params=default_parameters(spec),
            )
        )
    return SerializedGraph(nodes=nodes)


def correspondence(report: InteractionReport) -> dict[str, str]:
    """final-graph node id -> target node id, from mapping plus add_node ops."""
    corr = dict(report.mapping)
    for op in report.script:
        if op.kind == "add_node":
            corr[op.payload["nodeId"]] = op.payload["targetNodeId"]
    return corr


def equivalent_under(
    final: SerializedGraph, target: SerializedGraph, corr: dict[str, str]
) -> bool:
    """Does corr witness an isomorphism (spec ids and socketed edges match)?"""
    if len(final.nodes) != len(target.nodes):
        return False
    final_ids = {n.id for n in final.nodes}
    if set(corr) != final_ids or set(corr.values()) != {n.id for n in target.nodes}:
        return False
    target_by_id = {n.id: n for n in target.nodes}
    for node in final.nodes:
        if target_by_id[corr[node.id]].node_spec_id != node.node_spec_id:
            return False
    mapped_edges = {
        (corr[s], out, corr[d], inp) for s, out, d, inp in final.edges()
    }
    return mapped_edges == set(target.edges())


def scripted_proof_holds(generated, target, report: InteractionReport) -> bool:
    from pipeforge.metric import apply_script

    final = apply_script(generated, report.script)
    return equivalent_under(final, target, correspondence(report))
