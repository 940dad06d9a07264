"""Minimal user-interaction count between a generated and a target pipeline.

The count is the length of the cheapest edit script (node add/delete, edge
add/delete) turning the generated graph into the target, minimized over all
injective partial mappings between nodes of the same spec id. Deleting a
node removes its incident edges in the same interaction (cascade mode, the
default); cascade=False charges every edge deletion separately.

Two implementations ship: `interactions` (branch and bound, exact, intended
for graphs up to ~15 nodes) and `oracle_interactions` (plain exhaustive
enumeration, the independent check for small graphs). Neither approximates:
blowing the search budget raises instead of degrading silently.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Any

from .graph import (
    IncomingEdge,
    SerializedGraph,
    SerializedNode,
    copy_graph,
    validate,
)
from .registry import Registry

Edge = tuple[str, str, str, str]  # (source id, output socket, dest id, input socket)

MAX_METRIC_NODES = 15
MAX_ORACLE_NODES = 8


class BudgetExceededError(Exception):
    pass


class InvalidGraphError(ValueError):
    def __init__(self, which: str, violations: list):
        super().__init__(
            f"{which} graph is invalid: " + "; ".join(v.message for v in violations)
        )
        self.which = which
        self.violations = violations


class ScriptError(ValueError):
    def __init__(self, index: int, message: str):
        super().__init__(f"op {index}: {message}")
        self.index = index


@dataclass(frozen=True)
class EditOp:
    kind: str  # add_node | delete_node | add_edge | delete_edge
    payload: dict[str, str]


@dataclass
class InteractionReport:
    count: int
    ratio: float
    from_scratch: int
    script: list[EditOp]
    mapping: dict[str, str]  # generated node id -> target node id


def edge_set(graph: SerializedGraph) -> set[Edge]:
    return set(graph.edges())


def _from_scratch(target: SerializedGraph) -> int:
    return len(target.nodes) + len(edge_set(target))


def mapping_cost(
    generated: SerializedGraph,
    target: SerializedGraph,
    mapping: dict[str, str],
    *,
    cascade: bool = True,
) -> int:
    """Edit count for one fixed node mapping, straight from the definition.

    Used directly by the oracle; the branch-and-bound search computes the
    same quantity incrementally.
    """
    g_edges = edge_set(generated)
    t_edges = edge_set(target)
    image = set(mapping.values())

    deletes = sum(1 for n in generated.nodes if n.id not in mapping)
    adds = sum(1 for n in target.nodes if n.id not in image)

    matched: set[Edge] = set()
    edge_deletes = 0
    for src, out, dst, inp in g_edges:
        if src in mapping and dst in mapping:
            mapped_edge = (mapping[src], out, mapping[dst], inp)
            if mapped_edge in t_edges:
                matched.add(mapped_edge)
            else:
                edge_deletes += 1
        elif not cascade:
            edge_deletes += 1

    edge_adds = len(t_edges) - len(matched)
    return deletes + adds + edge_deletes + edge_adds


def oracle_interactions(
    generated: SerializedGraph, target: SerializedGraph, *, cascade: bool = True
) -> int:
    """Exhaustive minimum over every injective type-respecting partial mapping.

    No pruning, no shortcuts; only feasible for graphs of up to
    MAX_ORACLE_NODES nodes each.
    """
    if (
        len(generated.nodes) > MAX_ORACLE_NODES
        or len(target.nodes) > MAX_ORACLE_NODES
    ):
        raise BudgetExceededError(
            f"oracle is limited to {MAX_ORACLE_NODES} nodes per graph"
        )

    g_by_type: dict[str, list[str]] = {}
    for n in generated.nodes:
        g_by_type.setdefault(n.node_spec_id, []).append(n.id)
    t_by_type: dict[str, list[str]] = {}
    for n in target.nodes:
        t_by_type.setdefault(n.node_spec_id, []).append(n.id)

    per_type_choices: list[list[list[tuple[str, str]]]] = []
    for spec_id, g_ids in g_by_type.items():
        t_ids = t_by_type.get(spec_id, [])
        choices: list[list[tuple[str, str]]] = []
        for k in range(min(len(g_ids), len(t_ids)) + 1):
            for g_subset in itertools.combinations(g_ids, k):
                for t_perm in itertools.permutations(t_ids, k):
                    choices.append(list(zip(g_subset, t_perm)))
        per_type_choices.append(choices)

    best = None
    for combo in itertools.product(*per_type_choices) if per_type_choices else [()]:
        mapping = {g: t for pairs in combo for g, t in pairs}
        cost = mapping_cost(generated, target, mapping, cascade=cascade)
        if best is None or cost < best:
            best = cost
    if best is None:
        best = mapping_cost(generated, target, {}, cascade=cascade)
    return best


class _Search:
    """Branch and bound over per-type injective partial mappings.

    Generated nodes are assigned in insertion order; candidate targets are
    tried in insertion order with "unmapped" last, so the first optimum
    found is the lexicographically smallest one (the tie-break rule).
    """

    def __init__(
        self,
        generated: SerializedGraph,
        target: SerializedGraph,
        *,
        cascade: bool,
        max_states: int,
        max_seconds: float,
    ):
        self.cascade = cascade
        self.max_states = max_states
        self.deadline = time.monotonic() + max_seconds

        self.g_nodes = list(generated.nodes)
        self.t_nodes = list(target.nodes)
        self.g_edges = edge_set(generated)
        self.t_edges = edge_set(target)
        self.n_t_edges = len(self.t_edges)

        # edges grouped by the later (in assignment order) endpoint
        g_order = {n.id: i for i, n in enumerate(self.g_nodes)}
        self.edges_at: list[list[Edge]] = [[] for _ in self.g_nodes]
        for e in self.g_edges:
            src, _out, dst, _inp = e
            self.edges_at[max(g_order[src], g_order[dst])].append(e)

        # target edges grouped by node id, for committed-add accounting
        self.t_edges_of: dict[str, list[Edge]] = {n.id: [] for n in self.t_nodes}
        for e in self.t_edges:
            self.t_edges_of[e[0]].append(e)
            if e[2] != e[0]:
                self.t_edges_of[e[2]].append(e)

        # remaining candidate pools per spec id
        self.t_pool: dict[str, list[int]] = {}
        for i, n in enumerate(self.t_nodes):
            self.t_pool.setdefault(n.node_spec_id, []).append(i)
        self.g_remaining: dict[str, int] = {}
        for n in self.g_nodes:
            self.g_remaining[n.node_spec_id] = (
                self.g_remaining.get(n.node_spec_id, 0) + 1
            )

        self.assignment: dict[str, str] = {}
        self.inverse: dict[str, str] = {}
        self.used_t: set[str] = set()
        self.states = 0
        self.best_cost: int | None = None
        self.best_mapping: dict[str, str] | None = None

    def _check_budget(self) -> None:
        self.states += 1
        if self.states > self.max_states:
            raise BudgetExceededError(
                f"search exceeded {self.max_states} explored states"
            )
        if self.states % 1024 == 0 and time.monotonic() > self.deadline:
            raise BudgetExceededError("search exceeded its time budget")

    def _imbalance(self, unused_t: dict[str, int]) -> int:
        """Node add/delete cost forced by type-count imbalance of what's left."""
        cost = 0
        types = set(self.g_remaining) | set(unused_t)
        for spec_id in types:
            cost += abs(self.g_remaining.get(spec_id, 0) - unused_t.get(spec_id, 0))
        return cost

    def run(self) -> tuple[int, dict[str, str]]:
        unused_t: dict[str, int] = {}
        for n in self.t_nodes:
            unused_t[n.node_spec_id] = unused_t.get(n.node_spec_id, 0) + 1
        self._dfs(0, committed=0, matched=0, committed_adds=0, unused_t=unused_t)
        assert self.best_cost is not None and self.best_mapping is not None
        return self.best_cost, self.best_mapping

    def _edge_delta(self, g_node: SerializedNode, idx: int) -> tuple[int, int, int]:
        """Commit edges whose later endpoint is g_node.

        Returns (edge deletes, newly matched, committed target-edge adds).
        """
        deletes = 0
        matched = 0
        t_adds = 0
        mapped_to = self.assignment.get(g_node.id)

        for src, out, dst, inp in self.edges_at[idx]:
            other = dst if src == g_node.id else src
            other_t = self.assignment.get(other)
            if mapped_to is None or other_t is None:
                if not self.cascade:
                    deletes += 1
                continue
            image = (
                (mapped_to if src == g_node.id else other_t),
                out,
                (mapped_to if dst == g_node.id else other_t),
                inp,
            )
            if image in self.t_edges:
                matched += 1
            else:
                deletes += 1

        if mapped_to is not None:
            for t_edge in self.t_edges_of[mapped_to]:
                t_other = t_edge[2] if t_edge[0] == mapped_to else t_edge[0]
                if t_other == mapped_to or t_other not in self.used_t:
                    continue
                g_other = self.inverse[t_other]
                g_src = g_node.id if t_edge[0] == mapped_to else g_other
                g_dst = g_node.id if t_edge[2] == mapped_to else g_other
                preimage = (g_src, t_edge[1], g_dst, t_edge[3])
                if preimage not in self.g_edges:
                    t_adds += 1
        return deletes, matched, t_adds

    def _dfs(
        self,
        idx: int,
        *,
        committed: int,
        matched: int,
        committed_adds: int,
        unused_t: dict[str, int],
    ) -> None:
        self._check_budget()

        if idx == len(self.g_nodes):
            unmapped_t = len(self.t_nodes) - len(self.used_t)
            total = committed + unmapped_t + (self.n_t_edges - matched)
            if self.best_cost is None or total < self.best_cost:
                self.best_cost = total
                self.best_mapping = dict(self.assignment)
            return

        node = self.g_nodes[idx]
        spec_id = node.node_spec_id
        self.g_remaining[spec_id] -= 1

        candidates = [
            i
            for i in self.t_pool.get(spec_id, [])
            if self.t_nodes[i].id not in self.used_t
        ]
        for i in candidates + [None]:
            if i is None:
                node_cost = 1  # delete this generated node
            else:
                t_id = self.t_nodes[i].id
                self.assignment[node.id] = t_id
                self.inverse[t_id] = node.id
                self.used_t.add(t_id)
                unused_t[spec_id] -= 1
                node_cost = 0

            deletes, new_matched, t_adds = self._edge_delta(node, idx)
            # committed_adds feeds only the bound; the leaf cost recovers all
            # edge additions from (n_t_edges - matched).
            bound = (
                committed
                + node_cost
                + deletes
                + committed_adds
                + t_adds
                + self._imbalance(unused_t)
            )
            if self.best_cost is None or bound < self.best_cost:
                self._dfs(
                    idx + 1,
                    committed=committed + node_cost + deletes,
                    matched=matched + new_matched,
                    committed_adds=committed_adds + t_adds,
                    unused_t=unused_t,
                )

            if i is not None:
                t_id = self.t_nodes[i].id
                del self.assignment[node.id]
                del self.inverse[t_id]
                self.used_t.discard(t_id)
                unused_t[spec_id] += 1

        self.g_remaining[spec_id] += 1


def interactions(
    generated: SerializedGraph,
    target: SerializedGraph,
    *,
    registry: Registry | None = None,
    cascade: bool = True,
    max_nodes: int = MAX_METRIC_NODES,
    max_states: int = 2_000_000,
    max_seconds: float = 30.0,
) -> InteractionReport:
    """Exact minimal interaction count plus an optimal script and mapping."""
    if registry is not None:
        for which, graph in (("generated", generated), ("target", target)):
            violations = validate(graph, registry)
            if violations:
                raise InvalidGraphError(which, violations)

    if len(generated.nodes) > max_nodes or len(target.nodes) > max_nodes:
        raise BudgetExceededError(
            f"graphs above {max_nodes} nodes exceed the exact-search budget"
        )

    search = _Search(
        generated,
        target,
        cascade=cascade,
        max_states=max_states,
        max_seconds=max_seconds,
    )
    count, mapping = search.run()
    script = _build_script(generated, target, mapping, cascade=cascade)
    assert len(script) == count, "script length must equal the computed count"

    from_scratch = _from_scratch(target)
    ratio = count / from_scratch if from_scratch else 0.0
    return InteractionReport(
        count=count,
        ratio=ratio,
        from_scratch=from_scratch,
        script=script,
        mapping=mapping,
    )


def _build_script(
    generated: SerializedGraph,
    target: SerializedGraph,
    mapping: dict[str, str],
    *,
    cascade: bool,
) -> list[EditOp]:
    t_edges = edge_set(target)
    image = set(mapping.values())
    inverse = {t: g for g, t in mapping.items()}
    script: list[EditOp] = []

    matched: set[Edge] = set()
    doomed = {n.id for n in generated.nodes if n.id not in mapping}
    seen_edges: set[Edge] = set()
    for e in generated.edges():
        if e in seen_edges:
            continue
        seen_edges.add(e)
        src, out, dst, inp = e
        if src in mapping and dst in mapping:
            mapped_edge = (mapping[src], out, mapping[dst], inp)
            if mapped_edge in t_edges:
                matched.add(mapped_edge)
                continue
        elif cascade and (src in doomed or dst in doomed):
            continue  # removed for free when the node is deleted
        script.append(
            EditOp(
                "delete_edge",
                {
                    "sourceNodeId": src,
                    "outputId": out,
                    "destNodeId": dst,
                    "inputId": inp,
                },
            )
        )

    for node in generated.nodes:
        if node.id in doomed:
            script.append(EditOp("delete_node", {"nodeId": node.id}))

    surviving = {n.id for n in generated.nodes if n.id in mapping}
    allocated: dict[str, str] = {}
    for node in target.nodes:
        if node.id in image:
            continue
        new_id = node.id
        k = 2
        while new_id in surviving or new_id in allocated.values():
            new_id = f"{node.id}_new{k}"
            k += 1
        allocated[node.id] = new_id
        script.append(
            EditOp(
                "add_node",
                {
                    "nodeId": new_id,
                    "nodeSpecId": node.node_spec_id,
                    "targetNodeId": node.id,
                },
            )
        )

    def local_id(t_id: str) -> str:
        return inverse.get(t_id) or allocated[t_id]

    for e in sorted(t_edges - matched):
        src, out, dst, inp = e
        script.append(
            EditOp(
                "add_edge",
                {
                    "sourceNodeId": local_id(src),
                    "outputId": out,
                    "destNodeId": local_id(dst),
                    "inputId": inp,
                },
            )
        )
    return script


def apply_script(graph: SerializedGraph, script: list[EditOp]) -> SerializedGraph:
    """Execute an edit script; deleting a node always removes incident edges."""
    out = copy_graph(graph)

    for index, op in enumerate(script):
        p = op.payload
        if op.kind == "delete_edge":
            node = out.node(p["destNodeId"])
            if node is None:
                raise ScriptError(index, f"no node {p['destNodeId']}")
            edges = node.incoming_edges.get(p["inputId"], [])
            target_edge = IncomingEdge(p["sourceNodeId"], p["outputId"])
            if target_edge not in edges:
                raise ScriptError(index, "edge not present")
            edges.remove(target_edge)
            if not edges:
                del node.incoming_edges[p["inputId"]]
        elif op.kind == "delete_node":
            node = out.node(p["nodeId"])
            if node is None:
                raise ScriptError(index, f"no node {p['nodeId']}")
            out.nodes.remove(node)
            for other in out.nodes:
                for input_id in list(other.incoming_edges):
                    kept = [
                        e
                        for e in other.incoming_edges[input_id]
                        if e.source_node_id != node.id
                    ]
                    if kept:
                        other.incoming_edges[input_id] = kept
                    else:
                        del other.incoming_edges[input_id]
        elif op.kind == "add_node":
            if out.node(p["nodeId"]) is not None:
                raise ScriptError(index, f"node {p['nodeId']} already exists")
            out.nodes.append(
                SerializedNode(id=p["nodeId"], node_spec_id=p["nodeSpecId"])
            )
        elif op.kind == "add_edge":
            node = out.node(p["destNodeId"])
            if node is None or out.node(p["sourceNodeId"]) is None:
                raise ScriptError(index, "edge endpoint missing")
            edges = node.incoming_edges.setdefault(p["inputId"], [])
            new_edge = IncomingEdge(p["sourceNodeId"], p["outputId"])
            if new_edge in edges:
                raise ScriptError(index, "edge already present")
            edges.append(new_edge)
        else:
            raise ScriptError(index, f"unknown op kind {op.kind!r}")

    return out


def report_to_dict(report: InteractionReport) -> dict[str, Any]:
    return {
        "count": report.count,
        "ratio": report.ratio,
        "fromScratch": report.from_scratch,
        "script": [{"kind": op.kind, **op.payload} for op in report.script],
        "mapping": dict(report.mapping),
    }
