/** Edit history with undo; the interaction counter is its net length.
 *
 * Counting follows the same taxonomy as the evaluation metric: adding or
 * deleting a node is one interaction (a deletion takes its incident edges
 * along for free), adding or deleting an edge is one interaction. Parameter
 * edits are not interactions.
 */

import type { Edge, SerializedNode } from "./types.js";
import type { GraphStore } from "./graphStore.js";

export type Edit =
  | { kind: "add_node"; node: SerializedNode }
  | { kind: "delete_node"; node: SerializedNode; removedEdges: Edge[] }
  | { kind: "add_edge"; edge: Edge }
  | { kind: "delete_edge"; edge: Edge };

export class EditHistory {
  private entries: Edit[] = [];

  get interactionCount(): number {
    return this.entries.length;
  }

  record(edit: Edit): void {
    this.entries.push(edit);
  }

  reset(): void {
    this.entries = [];
  }

  /** Revert the most recent edit against the store; returns it, or undefined. */
  undo(store: GraphStore): Edit | undefined {
    const edit = this.entries.pop();
    if (!edit) return undefined;
    switch (edit.kind) {
      case "add_node":
        store.deleteNode(edit.node.id);
        break;
      case "delete_node":
        store.restoreNode(edit.node, edit.removedEdges);
        break;
      case "add_edge":
        store.deleteEdge(edit.edge);
        break;
      case "delete_edge": {
        const verdict = store.addEdge(edit.edge);
        if (!verdict.ok) throw new Error(`cannot undo edge delete: ${verdict.reason}`);
        break;
      }
    }
    return edit;
  }
}
