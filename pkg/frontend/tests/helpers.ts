/** Test scaffolding: real fixtures from the repo plus a scripted fetch. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { vi } from "vitest";

import type { RegistryPayload, SerializedGraph } from "../src/types.js";

const repoRoot = join(dirname(fileURLToPath(import.meta.url)), "..", "..");

export const registryPayload: RegistryPayload = JSON.parse(
  readFileSync(join(repoRoot, "src/pipeforge/data/registry.json"), "utf-8"),
);

export const sunglassesGolden: SerializedGraph = JSON.parse(
  readFileSync(join(repoRoot, "fixtures/golden/sunglasses.json"), "utf-8"),
);

export interface Route {
  status?: number;
  body: unknown | ((requestBody: unknown) => unknown);
}

/** Install a fetch stub keyed by URL pathname; returns the call log. */
export function stubFetch(routes: Record<string, Route>): string[] {
  const calls: string[] = [];
  vi.stubGlobal(
    "fetch",
    vi.fn(async (input: RequestInfo | URL, init?: RequestInit) => {
      const url = new URL(String(input), "http://localhost");
      calls.push(url.pathname);
      const route = routes[url.pathname];
      if (!route) {
        return new Response(
          JSON.stringify({ error: "not found", detail: url.pathname }),
          { status: 404, headers: { "Content-Type": "application/json" } },
        );
      }
      const requestBody = init?.body ? JSON.parse(String(init.body)) : undefined;
      const body =
        typeof route.body === "function"
          ? (route.body as (b: unknown) => unknown)(requestBody)
          : route.body;
      return new Response(JSON.stringify(body), {
        status: route.status ?? 200,
        headers: { "Content-Type": "application/json" },
      });
    }),
  );
  return calls;
}

export function generateResponse(graph: SerializedGraph, dropped: { line: number; reason: string }[] = []) {
  return {
    instruction: "x",
    tag: "multimodal",
    selectedNodes: graph.nodes.map((n) => n.nodeSpecId),
    pseudocode: "",
    droppedLines: dropped,
    danglingArgs: [],
    diagnostics: [],
    graph,
  };
}

export async function flush(): Promise<void> {
  await new Promise((resolve) => setTimeout(resolve, 0));
  await new Promise((resolve) => setTimeout(resolve, 0));
}

export function click(element: Element): void {
  element.dispatchEvent(new MouseEvent("click", { bubbles: true }));
}

export function mouseDown(element: Element): void {
  element.dispatchEvent(new MouseEvent("mousedown", { bubbles: true }));
}

export function mouseUp(element: Element): void {
  element.dispatchEvent(new MouseEvent("mouseup", { bubbles: true }));
}
