/** Application shell: instruction dialog, palette, canvas and inspector.
 *
 * All pipeline state lives in this tab; the service is stateless. The
 * interaction counter counts canvas edits (node/edge add/delete) net of
 * undos, the same events the evaluation metric prices.
 */

import { ApiFailure, PipeforgeClient } from "./api.js";
import { parseEdgeKey, renderCanvas } from "./canvas.js";
import { GraphStore } from "./graphStore.js";
import { EditHistory } from "./history.js";
import type { Edge, PipelineTag, SerializedGraph } from "./types.js";
import { PIPELINE_TAGS } from "./types.js";

const TEMPLATE = `
  <header class="toolbar">
    <button type="button" data-open-dialog>New pipeline…</button>
    <button type="button" data-undo>Undo</button>
    <button type="button" data-relayout>Re-layout</button>
    <button type="button" data-export>Export</button>
    <label class="import-label">Import<input type="file" data-import accept=".json" hidden></label>
    <span class="counter">interactions: <strong data-interaction-counter>0</strong></span>
  </header>
  <div class="banner banner-error" data-error-banner hidden></div>
  <div class="banner banner-warning" data-warning-panel hidden>
    <span>Some pseudocode lines were dropped:</span>
    <ul data-warning-list></ul>
    <button type="button" data-dismiss-warnings>Dismiss</button>
  </div>
  <div class="workspace">
    <aside class="palette" data-palette></aside>
    <main class="canvas-wrap">
      <svg class="canvas" data-canvas xmlns="http://www.w3.org/2000/svg"></svg>
    </main>
    <aside class="inspector" data-inspector hidden></aside>
  </div>
  <div class="refusal" data-refusal hidden></div>
  <div class="dialog-backdrop" data-dialog hidden>
    <form class="dialog" data-instruction-form>
      <h2>Describe your pipeline</h2>
      <textarea name="instruction" rows="3" placeholder="e.g. create a virtual sunglasses try-on experience using your web camera"></textarea>
      <div class="tags" role="radiogroup">${PIPELINE_TAGS.map(
        (tag, i) =>
          `<label><input type="radio" name="tag" value="${tag}"${i === 0 ? " checked" : ""}>${tag}</label>`,
      ).join("")}</div>
      <div class="dialog-buttons">
        <button type="submit" data-submit-instruction>Submit</button>
        <button type="button" data-close-dialog>Cancel</button>
      </div>
    </form>
  </div>
`;

export interface AppController {
  store: GraphStore;
  history: EditHistory;
  refresh(): void;
  generate(instruction: string, tag: PipelineTag): Promise<void>;
  relayout(): Promise<void>;
  exportJson(): string;
  importJson(text: string): void;
}

function find<T extends Element>(root: ParentNode, selector: string): T {
  const element = root.querySelector<T>(selector);
  if (!element) throw new Error(`missing element ${selector}`);
  return element;
}

export async function initApp(
  root: HTMLElement,
  client: PipeforgeClient,
): Promise<AppController> {
  root.innerHTML = TEMPLATE;

  const registry = await client.nodes();
  const store = new GraphStore(registry.nodes);
  const history = new EditHistory();

  const svg = find<SVGSVGElement>(root, "[data-canvas]");
  const counter = find<HTMLElement>(root, "[data-interaction-counter]");
  const errorBanner = find<HTMLElement>(root, "[data-error-banner]");
  const warningPanel = find<HTMLElement>(root, "[data-warning-panel]");
  const warningList = find<HTMLElement>(root, "[data-warning-list]");
  const palette = find<HTMLElement>(root, "[data-palette]");
  const inspector = find<HTMLElement>(root, "[data-inspector]");
  const refusal = find<HTMLElement>(root, "[data-refusal]");
  const dialog = find<HTMLElement>(root, "[data-dialog]");
  const form = find<HTMLFormElement>(root, "[data-instruction-form]");

  let selectedNodeId: string | null = null;
  let pendingPort: { nodeId: string; socketId: string } | null = null;
  let refusalTimer: ReturnType<typeof setTimeout> | null = null;

  function refresh(): void {
    renderCanvas(svg, store);
    counter.textContent = String(history.interactionCount);
    renderInspector();
  }

  function showError(message: string): void {
    errorBanner.textContent = message;
    errorBanner.hidden = false;
  }

  function clearError(): void {
    errorBanner.hidden = true;
    errorBanner.textContent = "";
  }

  function showRefusal(reason: string): void {
    refusal.textContent = reason;
    refusal.hidden = false;
    if (refusalTimer) clearTimeout(refusalTimer);
    refusalTimer = setTimeout(() => {
      refusal.hidden = true;
    }, 2500);
  }

  function showWarnings(lines: { line: number; reason: string }[]): void {
    warningList.replaceChildren();
    if (lines.length === 0) {
      warningPanel.hidden = true;
      return;
    }
    for (const dropped of lines) {
      const item = document.createElement("li");
      item.dataset.warningItem = String(dropped.line);
      item.textContent = `line ${dropped.line}: ${dropped.reason}`;
      warningList.appendChild(item);
    }
    warningPanel.hidden = false;
  }

  function renderPalette(): void {
    palette.replaceChildren();
    for (const category of ["input", "processor", "output"] as const) {
      const heading = document.createElement("h3");
      heading.textContent = category;
      palette.appendChild(heading);
      for (const spec of store.allSpecs()) {
        if (spec.category !== category) continue;
        const button = document.createElement("button");
        button.type = "button";
        button.dataset.paletteNode = spec.nodeSpecId;
        button.textContent = spec.nodeSpecId;
        button.title = spec.shortDescription;
        palette.appendChild(button);
      }
    }
  }

  function renderInspector(): void {
    const node = selectedNodeId ? store.node(selectedNodeId) : undefined;
    if (!node) {
      inspector.hidden = true;
      inspector.replaceChildren();
      return;
    }
    inspector.hidden = false;
    inspector.replaceChildren();
    const heading = document.createElement("h3");
    heading.textContent = node.id;
    inspector.appendChild(heading);
    const spec = store.spec(node.nodeSpecId);
    const blurb = document.createElement("p");
    blurb.textContent = spec?.description ?? "";
    inspector.appendChild(blurb);
    const keys = Object.keys(node.params);
    if (keys.length === 0) {
      const none = document.createElement("p");
      none.className = "muted";
      none.textContent = "no parameters";
      inspector.appendChild(none);
    }
    for (const key of keys) {
      const label = document.createElement("label");
      label.textContent = key;
      const input = document.createElement("input");
      input.value = String(node.params[key]);
      input.dataset.param = key;
      input.addEventListener("change", () => {
        store.setParam(node.id, key, input.value); // params are free: not an interaction
      });
      label.appendChild(input);
      inspector.appendChild(label);
    }
  }

  async function generate(instruction: string, tag: PipelineTag): Promise<void> {
    clearError();
    try {
      const result = await client.generate(instruction, tag);
      store.setGraph(result.graph);
      history.reset();
      selectedNodeId = null;
      showWarnings(result.droppedLines);
      dialog.hidden = true;
      refresh();
    } catch (error) {
      if (error instanceof ApiFailure) {
        showError(error.describe());
      } else {
        showError(String(error));
      }
    }
  }

  async function relayout(): Promise<void> {
    clearError();
    try {
      const result = await client.layout(store.toJSON());
      store.applyPositions(result.graph);
      refresh();
    } catch (error) {
      showError(error instanceof ApiFailure ? error.describe() : String(error));
    }
  }

  function exportJson(): string {
    return JSON.stringify(store.toJSON(), null, 2) + "\n";
  }

  function importJson(text: string): void {
    clearError();
    let parsed: SerializedGraph;
    try {
      parsed = JSON.parse(text) as SerializedGraph;
    } catch (error) {
      showError(`import failed: ${String(error)}`);
      return;
    }
    try {
      store.setGraph(parsed);
    } catch (error) {
      showError(`import failed: ${(error as Error).message}`);
      return;
    }
    history.reset();
    selectedNodeId = null;
    showWarnings([]);
    refresh();
  }

  function connectTo(nodeId: string, socketId: string): void {
    if (!pendingPort) return;
    const edge: Edge = {
      sourceNodeId: pendingPort.nodeId,
      outputId: pendingPort.socketId,
      destNodeId: nodeId,
      inputId: socketId,
    };
    pendingPort = null;
    const verdict = store.addEdge(edge);
    if (!verdict.ok) {
      showRefusal(verdict.reason);
      return;
    }
    history.record({ kind: "add_edge", edge });
    refresh();
  }

  // --- canvas event delegation -------------------------------------------
  svg.addEventListener("click", (event) => {
    const target = event.target as Element;
    const deleteNode = target.closest("[data-delete-node]");
    if (deleteNode) {
      const id = deleteNode.getAttribute("data-delete-node")!;
      const removed = store.deleteNode(id);
      history.record({ kind: "delete_node", ...removed });
      if (selectedNodeId === id) selectedNodeId = null;
      refresh();
      return;
    }
    const edgeEl = target.closest("[data-edge]");
    if (edgeEl) {
      const edge = parseEdgeKey(edgeEl.getAttribute("data-edge")!);
      store.deleteEdge(edge);
      history.record({ kind: "delete_edge", edge });
      refresh();
      return;
    }
    const body = target.closest("[data-node-body]");
    if (body) {
      selectedNodeId = body.getAttribute("data-node-body");
      renderInspector();
    }
  });

  svg.addEventListener("mousedown", (event) => {
    const target = event.target as Element;
    const port = target.closest('[data-port="out"]');
    if (port) {
      pendingPort = {
        nodeId: port.getAttribute("data-node")!,
        socketId: port.getAttribute("data-socket")!,
      };
      event.preventDefault();
    }
  });

  svg.addEventListener("mouseup", (event) => {
    const target = event.target as Element;
    const port = target.closest('[data-port="in"]');
    if (port && pendingPort) {
      connectTo(port.getAttribute("data-node")!, port.getAttribute("data-socket")!);
    } else {
      pendingPort = null;
    }
  });

  // --- toolbar ------------------------------------------------------------
  palette.addEventListener("click", (event) => {
    const button = (event.target as Element).closest("[data-palette-node]");
    if (!button) return;
    const node = store.addNode(button.getAttribute("data-palette-node")!);
    history.record({ kind: "add_node", node: JSON.parse(JSON.stringify(node)) });
    refresh();
  });

  find<HTMLButtonElement>(root, "[data-undo]").addEventListener("click", () => {
    if (history.undo(store)) refresh();
  });

  find<HTMLButtonElement>(root, "[data-relayout]").addEventListener("click", () => {
    void relayout();
  });

  find<HTMLButtonElement>(root, "[data-export]").addEventListener("click", () => {
    const blob = new Blob([exportJson()], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = "pipeline.json";
    anchor.click();
    URL.revokeObjectURL(url);
  });

  find<HTMLInputElement>(root, "[data-import]").addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    const file = input.files?.[0];
    if (!file) return;
    void file.text().then((text) => importJson(text));
    input.value = "";
  });

  find<HTMLElement>(root, "[data-dismiss-warnings]").addEventListener("click", () => {
    warningPanel.hidden = true;
  });

  find<HTMLElement>(root, "[data-open-dialog]").addEventListener("click", () => {
    dialog.hidden = false;
  });

  find<HTMLElement>(root, "[data-close-dialog]").addEventListener("click", () => {
    dialog.hidden = true;
  });

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const instruction = String(data.get("instruction") ?? "").trim();
    const tag = String(data.get("tag") ?? "language") as PipelineTag;
    if (!instruction) {
      showError("instruction must not be empty");
      return;
    }
    void generate(instruction, tag);
  });

  renderPalette();
  refresh();

  return { store, history, refresh, generate, relayout, exportJson, importJson };
}
