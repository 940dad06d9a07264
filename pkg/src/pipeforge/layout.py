"""Column/row layout for pipeline graphs.

Nodes are layered left to right by longest path from the sources, computed
with a BFS-style relaxation over a topological order, so every edge points
to a strictly later column. Rows within a column follow graph insertion
order. Box size and gaps are fixed; the engine does not render, so a UI is
free to re-measure.
"""

from __future__ import annotations

from .graph import Position, SerializedGraph, copy_graph

NODE_WIDTH = 280
NODE_HEIGHT = 160
GAP_X = 80
GAP_Y = 40


class LayoutCycleError(ValueError):
    def __init__(self, source: str, dest: str):
        super().__init__(f"graph is cyclic: back edge {source} -> {dest}")
        self.back_edge = (source, dest)


def column_assignment(graph: SerializedGraph) -> dict[str, int]:
    """Map node id -> column; 0 for sources, else 1 + max over predecessors."""
    preds: dict[str, set[str]] = {n.id: set() for n in graph.nodes}
    succs: dict[str, set[str]] = {n.id: set() for n in graph.nodes}
    for src, _out, dst, _inp in graph.edges():
        preds[dst].add(src)
        succs[src].add(dst)

    indegree = {nid: len(p) for nid, p in preds.items()}
    frontier = [n.id for n in graph.nodes if indegree[n.id] == 0]
    columns: dict[str, int] = {nid: 0 for nid in frontier}

    while frontier:
        nid = frontier.pop(0)
        for succ in sorted(succs[nid]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                columns[succ] = 1 + max(columns[p] for p in preds[succ])
                frontier.append(succ)

    if len(columns) != len(graph.nodes):
        unresolved = {n.id for n in graph.nodes if n.id not in columns}
        for src, _out, dst, _inp in graph.edges():
            if src in unresolved and dst in unresolved:
                raise LayoutCycleError(src, dst)
        raise LayoutCycleError("?", "?")  # unreachable for well-formed graphs

    return columns


def optimize_layout(graph: SerializedGraph) -> SerializedGraph:
    """Return a copy of the graph with positions assigned; topology untouched.

    Positions are a pure function of topology and insertion order, so the
    operation is deterministic and idempotent.
    """
    columns = column_assignment(graph)

    rows: dict[str, int] = {}
    next_row: dict[int, int] = {}
    for node in graph.nodes:  # insertion order decides rows within a column
        col = columns[node.id]
        rows[node.id] = next_row.get(col, 0)
        next_row[col] = rows[node.id] + 1

    out = copy_graph(graph)
    for node in out.nodes:
        node.position = Position(
            x=columns[node.id] * (NODE_WIDTH + GAP_X),
            y=rows[node.id] * (NODE_HEIGHT + GAP_Y),
        )
    return out
