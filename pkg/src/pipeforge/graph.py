"""Canonical pipeline graph: the interpreter, validation and the wire format.

The interpreter walks a parsed program statement by statement, adding one
serialized node per statement in order. Its contract is maximal salvage:
lines naming unknown node types are dropped and reported, unresolvable
argument references are dropped per-argument while the node is kept, and
the result always satisfies the serialized-graph invariants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Iterator

from .dsl import PseudoProgram, StringLiteral, VarRef
from .registry import Registry, default_parameters


@dataclass(frozen=True)
class IncomingEdge:
    source_node_id: str
    output_id: str


@dataclass(frozen=True)
class Position:
    x: int
    y: int


@dataclass
class SerializedNode:
    id: str
    node_spec_id: str
    incoming_edges: dict[str, list[IncomingEdge]] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    position: Position = Position(0, 0)


@dataclass
class SerializedGraph:
    nodes: list[SerializedNode] = field(default_factory=list)

    def node(self, node_id: str) -> SerializedNode | None:
        for n in self.nodes:
            if n.id == node_id:
                return n
        return None

    def edges(self) -> Iterator[tuple[str, str, str, str]]:
        """Yield (source_node_id, output_id, dest_node_id, input_id) tuples."""
        for n in self.nodes:
            for input_id, edges in n.incoming_edges.items():
                for e in edges:
                    yield (e.source_node_id, e.output_id, n.id, input_id)

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def edge_count(self) -> int:
        return sum(1 for _ in self.edges())


@dataclass
class CompileReport:
    graph: SerializedGraph
    dropped_lines: list[tuple[int, str]] = field(default_factory=list)
    dangling_args: list[tuple[str, str]] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)


def interpret(
    program: PseudoProgram, reg: Registry, *, strict: bool = False
) -> CompileReport:
    """Build a serialized graph from a program, salvaging whatever is sound.

    strict=True drops an entire statement when any of its variable
    references is dangling, instead of keeping the node with fewer edges.
    """
    graph = SerializedGraph()
    report = CompileReport(graph=graph)
    variables: dict[str, str] = {}  # referenceable name -> node id
    node_ids: set[str] = set()

    for stmt in program.statements:
        spec = reg.get(stmt.node_type)
        if spec is None:
            report.dropped_lines.append(
                (stmt.source_line, f"unknown node type {stmt.node_type}")
            )
            continue
        if stmt.node_id in node_ids:
            report.dropped_lines.append(
                (stmt.source_line, f"duplicate node id {stmt.node_id}")
            )
            continue

        params = default_parameters(spec)
        incoming: dict[str, list[IncomingEdge]] = {}
        dangling: list[str] = []

        for arg in stmt.args:
            if isinstance(arg.value, StringLiteral):
                if arg.name in spec.default_params:
                    params[arg.name] = arg.value.value
                else:
                    report.diagnostics.append(
                        f"{stmt.node_id}: literal argument {arg.name!r} is not a "
                        f"parameter of {stmt.node_type}; ignored"
                    )
                continue

            assert isinstance(arg.value, VarRef)
            source_id = variables.get(arg.value.name)
            if source_id is None:
                dangling.append(arg.name)
                continue
            if spec.input_socket(arg.name) is None:
                report.diagnostics.append(
                    f"{stmt.node_id}: no input socket {arg.name!r} on "
                    f"{stmt.node_type}; edge ignored"
                )
                continue
            source_spec = reg.get(graph.node(source_id).node_spec_id)
            out = source_spec.default_output
            if out is None:
                report.diagnostics.append(
                    f"{stmt.node_id}: {source_id} has no outputs; edge to "
                    f"{arg.name!r} ignored"
                )
                continue
            incoming.setdefault(arg.name, []).append(
                IncomingEdge(source_node_id=source_id, output_id=out.socket_id)
            )

        if dangling and strict:
            report.dropped_lines.append(
                (stmt.source_line, f"undefined variable {dangling[0]!r} argument")
            )
            continue
        for name in dangling:
            report.dangling_args.append((stmt.node_id, name))

        graph.nodes.append(
            SerializedNode(
                id=stmt.node_id,
                node_spec_id=stmt.node_type,
                incoming_edges=incoming,
                params=params,
            )
        )
        node_ids.add(stmt.node_id)
        variables[stmt.node_id] = stmt.node_id
        if stmt.output_var is not None:
            variables[stmt.output_var] = stmt.node_id

    return report


@dataclass(frozen=True)
class Violation:
    kind: str
    message: str
    nodes: tuple[str, ...] = ()


def validate(graph: SerializedGraph, reg: Registry) -> list[Violation]:
    """Structural and type checks; an empty list means the graph is valid."""
    violations: list[Violation] = []
    by_id: dict[str, SerializedNode] = {}

    for node in graph.nodes:
        if node.id in by_id:
            violations.append(
                Violation("duplicate-id", f"duplicate node id {node.id}", (node.id,))
            )
            continue
        by_id[node.id] = node

    for node in graph.nodes:
        spec = reg.get(node.node_spec_id)
        if spec is None:
            violations.append(
                Violation(
                    "unknown-spec",
                    f"{node.id}: unknown node spec {node.node_spec_id}",
                    (node.id,),
                )
            )
            continue
        for input_id, edges in node.incoming_edges.items():
            dest_sock = spec.input_socket(input_id)
            if dest_sock is None:
                violations.append(
                    Violation(
                        "unknown-input",
                        f"{node.id}: no input socket {input_id!r} on {spec.node_spec_id}",
                        (node.id,),
                    )
                )
            for edge in edges:
                source = by_id.get(edge.source_node_id)
                if source is None:
                    violations.append(
                        Violation(
                            "missing-source",
                            f"{node.id}.{input_id}: source node "
                            f"{edge.source_node_id} not in graph",
                            (node.id,),
                        )
                    )
                    continue
                source_spec = reg.get(source.node_spec_id)
                if source_spec is None:
                    continue  # already reported as unknown-spec
                out_sock = source_spec.output_socket(edge.output_id)
                if out_sock is None:
                    violations.append(
                        Violation(
                            "unknown-output",
                            f"{node.id}.{input_id}: no output socket "
                            f"{edge.output_id!r} on {source.node_spec_id}",
                            (node.id, source.id),
                        )
                    )
                    continue
                if dest_sock is not None and not (
                    set(out_sock.data_types) & set(dest_sock.data_types)
                ):
                    violations.append(
                        Violation(
                            "type-mismatch",
                            f"{source.id}.{edge.output_id} "
                            f"({'/'.join(out_sock.data_types)}) cannot feed "
                            f"{node.id}.{input_id} ({'/'.join(dest_sock.data_types)})",
                            (source.id, node.id),
                        )
                    )

    cycle = _find_cycle(graph, by_id)
    if cycle is not None:
        violations.append(
            Violation("cycle", f"cycle through {cycle[0]} -> {cycle[1]}", cycle)
        )

    return violations


def _find_cycle(
    graph: SerializedGraph, by_id: dict[str, SerializedNode]
) -> tuple[str, str] | None:
    """Kahn's algorithm; returns one back edge (u, v) when the graph is cyclic."""
    indegree: dict[str, int] = {n.id: 0 for n in graph.nodes}
    successors: dict[str, list[str]] = {n.id: [] for n in graph.nodes}
    for src, _out, dst, _inp in graph.edges():
        if src in indegree and dst in indegree:
            indegree[dst] += 1
            successors[src].append(dst)

    queue = [nid for nid, deg in indegree.items() if deg == 0]
    seen = 0
    while queue:
        nid = queue.pop()
        seen += 1
        for succ in successors[nid]:
            indegree[succ] -= 1
            if indegree[succ] == 0:
                queue.append(succ)

    if seen == len(indegree):
        return None
    remaining = {nid for nid, deg in indegree.items() if deg > 0}
    for src, _out, dst, _inp in graph.edges():
        if src in remaining and dst in remaining:
            return (src, dst)
    return None


class GraphFormatError(ValueError):
    """Malformed pipeline JSON; message carries a JSON-path-like location."""


def graph_to_dict(graph: SerializedGraph) -> dict[str, Any]:
    return {
        "nodes": [
            {
                "id": n.id,
                "nodeSpecId": n.node_spec_id,
                "incomingEdges": {
                    input_id: [
                        {"sourceNodeId": e.source_node_id, "outputId": e.output_id}
                        for e in edges
                    ]
                    for input_id, edges in n.incoming_edges.items()
                },
                "params": dict(n.params),
                "position": {"x": n.position.x, "y": n.position.y},
            }
            for n in graph.nodes
        ]
    }


def graph_from_dict(raw: Any) -> SerializedGraph:
    if not isinstance(raw, dict) or not isinstance(raw.get("nodes"), list):
        raise GraphFormatError("$: expected an object with a 'nodes' list")
    nodes: list[SerializedNode] = []
    for i, entry in enumerate(raw["nodes"]):
        where = f"nodes[{i}]"
        if not isinstance(entry, dict):
            raise GraphFormatError(f"{where}: expected an object")
        node_id = entry.get("id")
        spec_id = entry.get("nodeSpecId")
        if not isinstance(node_id, str) or not node_id:
            raise GraphFormatError(f"{where}.id: missing or empty")
        if not isinstance(spec_id, str) or not spec_id:
            raise GraphFormatError(f"{where}.nodeSpecId: missing or empty")

        incoming: dict[str, list[IncomingEdge]] = {}
        raw_edges = entry.get("incomingEdges", {})
        if not isinstance(raw_edges, dict):
            raise GraphFormatError(f"{where}.incomingEdges: expected an object")
        for input_id, lst in raw_edges.items():
            if not isinstance(lst, list):
                raise GraphFormatError(
                    f"{where}.incomingEdges.{input_id}: expected a list"
                )
            edges = []
            for j, e in enumerate(lst):
                loc = f"{where}.incomingEdges.{input_id}[{j}]"
                if not isinstance(e, dict):
                    raise GraphFormatError(f"{loc}: expected an object")
                src = e.get("sourceNodeId")
                out = e.get("outputId")
                if not isinstance(src, str) or not src:
                    raise GraphFormatError(f"{loc}.sourceNodeId: missing or empty")
                if not isinstance(out, str) or not out:
                    raise GraphFormatError(f"{loc}.outputId: missing or empty")
                edges.append(IncomingEdge(source_node_id=src, output_id=out))
            incoming[input_id] = edges

        params = entry.get("params", {})
        if not isinstance(params, dict):
            raise GraphFormatError(f"{where}.params: expected an object")

        raw_pos = entry.get("position", {"x": 0, "y": 0})
        if (
            not isinstance(raw_pos, dict)
            or not isinstance(raw_pos.get("x"), (int, float))
            or not isinstance(raw_pos.get("y"), (int, float))
        ):
            raise GraphFormatError(f"{where}.position: expected {{x, y}} numbers")

        nodes.append(
            SerializedNode(
                id=node_id,
                node_spec_id=spec_id,
                incoming_edges=incoming,
                params=dict(params),
                position=Position(int(raw_pos["x"]), int(raw_pos["y"])),
            )
        )
    return SerializedGraph(nodes=nodes)


def to_json(graph: SerializedGraph, *, indent: int | None = 2) -> str:
    return json.dumps(graph_to_dict(graph), indent=indent) + "\n"


def from_json(text: str) -> SerializedGraph:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"$: invalid JSON: {exc}") from exc
    return graph_from_dict(raw)


def copy_graph(graph: SerializedGraph) -> SerializedGraph:
    return SerializedGraph(
        nodes=[
            SerializedNode(
                id=n.id,
                node_spec_id=n.node_spec_id,
                incoming_edges={k: list(v) for k, v in n.incoming_edges.items()},
                params=dict(n.params),
                position=n.position,
            )
            for n in graph.nodes
        ]
    )
