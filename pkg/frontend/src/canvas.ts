/** SVG renderer for the pipeline canvas.
 *
 * Rendering is stateless: every change redraws the scene from the store.
 * Elements carry data attributes so event delegation (and tests) can find
 * nodes, ports and edges without holding element references.
 */

import type { Edge, SerializedNode } from "./types.js";
import type { GraphStore } from "./graphStore.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const NODE_W = 180;
export const NODE_H = 84;
const PORT_SPACING = 22;
const PORT_OFFSET_Y = 40;
const SCALE = 0.6; // server layout steps are 360/200 px; shrink to fit

export function edgeKey(edge: Edge): string {
  return [edge.sourceNodeId, edge.outputId, edge.destNodeId, edge.inputId].join("|");
}

export function parseEdgeKey(key: string): Edge {
  const [sourceNodeId, outputId, destNodeId, inputId] = key.split("|");
  return { sourceNodeId, outputId, destNodeId, inputId };
}

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

function nodeOrigin(node: SerializedNode): { x: number; y: number } {
  return { x: node.position.x * SCALE, y: node.position.y * SCALE };
}

export function portPosition(
  store: GraphStore,
  nodeId: string,
  socketId: string,
  side: "in" | "out",
): { x: number; y: number } {
  const node = store.node(nodeId);
  const spec = store.specOf(nodeId);
  if (!node || !spec) return { x: 0, y: 0 };
  const sockets = side === "in" ? spec.inputSpecs : spec.outputSpecs;
  const index = Math.max(
    0,
    sockets.findIndex((s) => s.socketId === socketId),
  );
  const origin = nodeOrigin(node);
  return {
    x: origin.x + (side === "in" ? 0 : NODE_W),
    y: origin.y + PORT_OFFSET_Y + index * PORT_SPACING,
  };
}

function edgePath(store: GraphStore, edge: Edge): string {
  const from = portPosition(store, edge.sourceNodeId, edge.outputId, "out");
  const to = portPosition(store, edge.destNodeId, edge.inputId, "in");
  const bend = Math.max(40, (to.x - from.x) / 2);
  return `M ${from.x} ${from.y} C ${from.x + bend} ${from.y}, ${to.x - bend} ${to.y}, ${to.x} ${to.y}`;
}

function renderNode(store: GraphStore, node: SerializedNode): SVGGElement {
  const spec = store.specOf(node.id);
  const origin = nodeOrigin(node);
  const group = el("g", {
    "data-node-id": node.id,
    class: `node node-${spec?.category ?? "unknown"}`,
    transform: `translate(${origin.x}, ${origin.y})`,
  });

  group.appendChild(
    el("rect", {
      class: "node-box",
      width: String(NODE_W),
      height: String(NODE_H),
      rx: "8",
      "data-node-body": node.id,
    }),
  );

  const title = el("text", { class: "node-title", x: "10", y: "20" });
  title.textContent = node.id;
  group.appendChild(title);

  const subtitle = el("text", { class: "node-subtitle", x: "10", y: "34" });
  subtitle.textContent = spec?.nodeSpecId ?? node.nodeSpecId;
  group.appendChild(subtitle);

  const close = el("text", {
    class: "node-delete",
    x: String(NODE_W - 16),
    y: "18",
    "data-delete-node": node.id,
    role: "button",
  });
  close.textContent = "×";
  group.appendChild(close);

  for (const [index, socket] of (spec?.inputSpecs ?? []).entries()) {
    const port = el("circle", {
      class: "port port-in",
      cx: "0",
      cy: String(PORT_OFFSET_Y + index * PORT_SPACING),
      r: "7",
      "data-port": "in",
      "data-node": node.id,
      "data-socket": socket.socketId,
    });
    const tip = el("title");
    tip.textContent = `${socket.socketId} (${socket.dataTypes.join(", ")})`;
    port.appendChild(tip);
    group.appendChild(port);
    const label = el("text", {
      class: "port-label",
      x: "12",
      y: String(PORT_OFFSET_Y + index * PORT_SPACING + 4),
    });
    label.textContent = socket.socketId;
    group.appendChild(label);
  }

  for (const [index, socket] of (spec?.outputSpecs ?? []).entries()) {
    const port = el("circle", {
      class: "port port-out",
      cx: String(NODE_W),
      cy: String(PORT_OFFSET_Y + index * PORT_SPACING),
      r: "7",
      "data-port": "out",
      "data-node": node.id,
      "data-socket": socket.socketId,
    });
    const tip = el("title");
    tip.textContent = `${socket.socketId} (${socket.dataTypes.join(", ")})`;
    port.appendChild(tip);
    group.appendChild(port);
    const label = el("text", {
      class: "port-label port-label-out",
      x: String(NODE_W - 12),
      y: String(PORT_OFFSET_Y + index * PORT_SPACING + 4),
      "text-anchor": "end",
    });
    label.textContent = socket.socketId;
    group.appendChild(label);
  }

  return group;
}

export function renderCanvas(svg: SVGSVGElement, store: GraphStore): void {
  svg.replaceChildren();

  const edgeLayer = el("g", { class: "edges" });
  for (const edge of store.edges) {
    const path = el("path", {
      class: "edge",
      d: edgePath(store, edge),
      "data-edge": edgeKey(edge),
    });
    const tip = el("title");
    tip.textContent = `${edge.sourceNodeId}.${edge.outputId} → ${edge.destNodeId}.${edge.inputId} (click to delete)`;
    path.appendChild(tip);
    edgeLayer.appendChild(path);
  }
  svg.appendChild(edgeLayer);

  const nodeLayer = el("g", { class: "nodes" });
  for (const node of store.nodes) {
    nodeLayer.appendChild(renderNode(store, node));
  }
  svg.appendChild(nodeLayer);

  let maxX = 600;
  let maxY = 360;
  for (const node of store.nodes) {
    const origin = nodeOrigin(node);
    maxX = Math.max(maxX, origin.x + NODE_W + 60);
    maxY = Math.max(maxY, origin.y + NODE_H + 60);
  }
  svg.setAttribute("viewBox", `0 0 ${maxX} ${maxY}`);
  svg.setAttribute("width", String(maxX));
  svg.setAttribute("height", String(maxY));
}
