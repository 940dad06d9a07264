/** Client-side pipeline graph with the same structural rules as the service.
 *
 * Every mutation is validated before it is committed, so the rendered graph
 * can never drift into a state the server would reject: ids stay unique,
 * edges only connect existing sockets with overlapping data types, and the
 * graph stays acyclic.
 */

import type {
  Edge,
  NodeSpec,
  SerializedGraph,
  SerializedNode,
  SocketSpec,
} from "./types.js";

export type ConnectVerdict = { ok: true } | { ok: false; reason: string };

const PLACE_STEP_X = 220;
const PLACE_STEP_Y = 110;

export function cloneGraph(graph: SerializedGraph): SerializedGraph {
  return JSON.parse(JSON.stringify(graph)) as SerializedGraph;
}

export function flattenEdges(graph: SerializedGraph): Edge[] {
  const edges: Edge[] = [];
  for (const node of graph.nodes) {
    for (const [inputId, list] of Object.entries(node.incomingEdges)) {
      for (const ref of list) {
        edges.push({
          sourceNodeId: ref.sourceNodeId,
          outputId: ref.outputId,
          destNodeId: node.id,
          inputId,
        });
      }
    }
  }
  return edges;
}

export function sameEdge(a: Edge, b: Edge): boolean {
  return (
    a.sourceNodeId === b.sourceNodeId &&
    a.outputId === b.outputId &&
    a.destNodeId === b.destNodeId &&
    a.inputId === b.inputId
  );
}

export class GraphStore {
  private specs = new Map<string, NodeSpec>();
  private graph: SerializedGraph = { nodes: [] };

  constructor(specs: NodeSpec[]) {
    for (const spec of specs) this.specs.set(spec.nodeSpecId, spec);
  }

  get nodes(): SerializedNode[] {
    return this.graph.nodes;
  }

  get edges(): Edge[] {
    return flattenEdges(this.graph);
  }

  spec(nodeSpecId: string): NodeSpec | undefined {
    return this.specs.get(nodeSpecId);
  }

  allSpecs(): NodeSpec[] {
    return [...this.specs.values()];
  }

  node(id: string): SerializedNode | undefined {
    return this.graph.nodes.find((n) => n.id === id);
  }

  specOf(nodeId: string): NodeSpec | undefined {
    const node = this.node(nodeId);
    return node ? this.specs.get(node.nodeSpecId) : undefined;
  }

  toJSON(): SerializedGraph {
    return cloneGraph(this.graph);
  }

  /** Structural check mirroring the service's validator; [] means valid. */
  validate(graph: SerializedGraph): string[] {
    const problems: string[] = [];
    const seen = new Set<string>();
    for (const [i, node] of graph.nodes.entries()) {
      const where = `nodes[${i}]`;
      if (!node.id) problems.push(`${where}: missing id`);
      if (seen.has(node.id)) problems.push(`${where}: duplicate id ${node.id}`);
      seen.add(node.id);
      const spec = this.specs.get(node.nodeSpecId);
      if (!spec) {
        problems.push(`${where}: unknown node spec ${node.nodeSpecId}`);
        continue;
      }
      for (const [inputId, list] of Object.entries(node.incomingEdges ?? {})) {
        const input = spec.inputSpecs.find((s) => s.socketId === inputId);
        if (!input) {
          problems.push(`${where}.incomingEdges.${inputId}: no such input socket`);
        }
        for (const ref of list) {
          const source = graph.nodes.find((n) => n.id === ref.sourceNodeId);
          if (!source) {
            problems.push(
              `${where}.incomingEdges.${inputId}: source ${ref.sourceNodeId} missing`,
            );
            continue;
          }
          const sourceSpec = this.specs.get(source.nodeSpecId);
          const output = sourceSpec?.outputSpecs.find(
            (s) => s.socketId === ref.outputId,
          );
          if (!output) {
            problems.push(
              `${where}.incomingEdges.${inputId}: no output ${ref.outputId} on ${source.nodeSpecId}`,
            );
            continue;
          }
          if (input && !typesOverlap(output, input)) {
            problems.push(
              `${where}.incomingEdges.${inputId}: ${output.dataTypes.join("/")} cannot feed ${input.dataTypes.join("/")}`,
            );
          }
        }
      }
    }
    if (problems.length === 0 && hasCycle(graph)) {
      problems.push("graph contains a cycle");
    }
    return problems;
  }

  /** Replace the whole graph (generation result or an import). */
  setGraph(graph: SerializedGraph): void {
    const problems = this.validate(graph);
    if (problems.length > 0) {
      throw new Error(problems[0]);
    }
    this.graph = cloneGraph(graph);
  }

  clear(): void {
    this.graph = { nodes: [] };
  }

  /** Typed-port check used before an edge is let through. */
  canConnect(edge: Edge): ConnectVerdict {
    const source = this.node(edge.sourceNodeId);
    const dest = this.node(edge.destNodeId);
    if (!source || !dest) return { ok: false, reason: "endpoint is gone" };
    if (edge.sourceNodeId === edge.destNodeId) {
      return { ok: false, reason: "a node cannot feed itself" };
    }
    const sourceSpec = this.specs.get(source.nodeSpecId);
    const destSpec = this.specs.get(dest.nodeSpecId);
    const output = sourceSpec?.outputSpecs.find((s) => s.socketId === edge.outputId);
    const input = destSpec?.inputSpecs.find((s) => s.socketId === edge.inputId);
    if (!output) return { ok: false, reason: `no output port ${edge.outputId}` };
    if (!input) return { ok: false, reason: `no input port ${edge.inputId}` };
    if (!typesOverlap(output, input)) {
      return {
        ok: false,
        reason: `${output.dataTypes.join("/")} output cannot feed a ${input.dataTypes.join("/")} input`,
      };
    }
    if (this.edges.some((e) => sameEdge(e, edge))) {
      return { ok: false, reason: "these ports are already connected" };
    }
    if (this.wouldCycle(edge)) {
      return { ok: false, reason: "connection would create a cycle" };
    }
    return { ok: true };
  }

  private wouldCycle(edge: Edge): boolean {
    // Adding src -> dst cycles iff src is reachable from dst.
    const successors = new Map<string, string[]>();
    for (const e of this.edges) {
      const list = successors.get(e.sourceNodeId) ?? [];
      list.push(e.destNodeId);
      successors.set(e.sourceNodeId, list);
    }
    const stack = [edge.destNodeId];
    const seen = new Set<string>();
    while (stack.length > 0) {
      const current = stack.pop()!;
      if (current === edge.sourceNodeId) return true;
      if (seen.has(current)) continue;
      seen.add(current);
      for (const next of successors.get(current) ?? []) stack.push(next);
    }
    return false;
  }

  /** Create a node from the palette with a fresh id and default params. */
  addNode(nodeSpecId: string): SerializedNode {
    const spec = this.specs.get(nodeSpecId);
    if (!spec) throw new Error(`unknown node spec ${nodeSpecId}`);
    let n = 1;
    while (this.node(`${nodeSpecId}_${n}`)) n += 1;
    const node: SerializedNode = {
      id: `${nodeSpecId}_${n}`,
      nodeSpecId,
      incomingEdges: {},
      params: { ...(spec.defaultParams as Record<string, unknown>) },
      position: this.freeSpot(),
    };
    this.graph.nodes.push(node);
    return node;
  }

  /** Re-insert a node removed earlier (undo path). */
  restoreNode(node: SerializedNode, edges: Edge[]): void {
    if (this.node(node.id)) throw new Error(`id ${node.id} already present`);
    const copy = JSON.parse(JSON.stringify(node)) as SerializedNode;
    copy.incomingEdges = {}; // rebuilt below along with the outgoing edges
    this.graph.nodes.push(copy);
    for (const edge of edges) this.insertEdge(edge);
  }

  /** Delete a node; its incident edges go with it. Returns what vanished. */
  deleteNode(id: string): { node: SerializedNode; removedEdges: Edge[] } {
    const node = this.node(id);
    if (!node) throw new Error(`no node ${id}`);
    const removedEdges = this.edges.filter(
      (e) => e.sourceNodeId === id || e.destNodeId === id,
    );
    this.graph.nodes = this.graph.nodes.filter((n) => n.id !== id);
    for (const other of this.graph.nodes) {
      for (const [inputId, list] of Object.entries(other.incomingEdges)) {
        const kept = list.filter((ref) => ref.sourceNodeId !== id);
        if (kept.length > 0) other.incomingEdges[inputId] = kept;
        else delete other.incomingEdges[inputId];
      }
    }
    return { node, removedEdges };
  }

  addEdge(edge: Edge): ConnectVerdict {
    const verdict = this.canConnect(edge);
    if (!verdict.ok) return verdict;
    this.insertEdge(edge);
    return verdict;
  }

  private insertEdge(edge: Edge): void {
    const dest = this.node(edge.destNodeId);
    if (!dest) throw new Error(`no node ${edge.destNodeId}`);
    const list = dest.incomingEdges[edge.inputId] ?? [];
    list.push({ sourceNodeId: edge.sourceNodeId, outputId: edge.outputId });
    dest.incomingEdges[edge.inputId] = list;
  }

  deleteEdge(edge: Edge): void {
    const dest = this.node(edge.destNodeId);
    const list = dest?.incomingEdges[edge.inputId];
    if (!dest || !list) throw new Error("edge not present");
    const index = list.findIndex(
      (ref) =>
        ref.sourceNodeId === edge.sourceNodeId && ref.outputId === edge.outputId,
    );
    if (index < 0) throw new Error("edge not present");
    list.splice(index, 1);
    if (list.length === 0) delete dest.incomingEdges[edge.inputId];
  }

  setParam(nodeId: string, key: string, value: unknown): void {
    const node = this.node(nodeId);
    if (!node) throw new Error(`no node ${nodeId}`);
    node.params[key] = value;
  }

  applyPositions(graph: SerializedGraph): void {
    const byId = new Map(graph.nodes.map((n) => [n.id, n.position]));
    for (const node of this.graph.nodes) {
      const position = byId.get(node.id);
      if (position) node.position = { ...position };
    }
  }

  private freeSpot(): { x: number; y: number } {
    const taken = new Set(
      this.graph.nodes.map((n) => `${n.position.x},${n.position.y}`),
    );
    for (let row = 0; ; row += 1) {
      for (let col = 0; col < 8; col += 1) {
        const x = col * PLACE_STEP_X;
        const y = row * PLACE_STEP_Y;
        if (!taken.has(`${x},${y}`)) return { x, y };
      }
    }
  }
}

function typesOverlap(a: SocketSpec, b: SocketSpec): boolean {
  return a.dataTypes.some((t) => b.dataTypes.includes(t));
}

function hasCycle(graph: SerializedGraph): boolean {
  const indegree = new Map<string, number>();
  const successors = new Map<string, string[]>();
  for (const node of graph.nodes) indegree.set(node.id, 0);
  for (const edge of flattenEdges(graph)) {
    if (!indegree.has(edge.sourceNodeId) || !indegree.has(edge.destNodeId)) continue;
    indegree.set(edge.destNodeId, (indegree.get(edge.destNodeId) ?? 0) + 1);
    const list = successors.get(edge.sourceNodeId) ?? [];
    list.push(edge.destNodeId);
    successors.set(edge.sourceNodeId, list);
  }
  const queue = [...indegree.entries()].filter(([, d]) => d === 0).map(([id]) => id);
  let seen = 0;
  while (queue.length > 0) {
    const id = queue.pop()!;
    seen += 1;
    for (const next of successors.get(id) ?? []) {
      const d = (indegree.get(next) ?? 0) - 1;
      indegree.set(next, d);
      if (d === 0) queue.push(next);
    }
  }
  return seen !== graph.nodes.length;
}
