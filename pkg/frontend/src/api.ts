/** Thin typed client for the pipeline service endpoints. */

import type {
  CompileResponse,
  ErrorBody,
  GenerateResponse,
  PipelineTag,
  RegistryPayload,
  SerializedGraph,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(
    readonly status: number,
    readonly body: ErrorBody,
  ) {
    super(body.detail || body.error || `request failed (${status})`);
  }

  /** Human line for the error banner, naming the failing stage when known. */
  describe(): string {
    if (this.body.stage) {
      return `${this.body.stage} stage failed: ${this.body.detail}`;
    }
    return `${this.body.error}: ${this.body.detail}`;
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  if (!resp.ok) {
    let body: ErrorBody;
    try {
      body = (await resp.json()) as ErrorBody;
    } catch {
      body = { error: `http ${resp.status}`, detail: resp.statusText };
    }
    throw new ApiFailure(resp.status, body);
  }
  return (await resp.json()) as T;
}

function post(body: unknown): RequestInit {
  return {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  };
}

export class PipeforgeClient {
  constructor(readonly baseUrl: string = "") {}

  nodes(): Promise<RegistryPayload> {
    return request(`${this.baseUrl}/api/nodes`);
  }

  generate(instruction: string, tag: PipelineTag): Promise<GenerateResponse> {
    return request(`${this.baseUrl}/api/generate`, post({ instruction, tag }));
  }

  compile(pseudocode: string): Promise<CompileResponse> {
    return request(`${this.baseUrl}/api/compile`, post({ pseudocode }));
  }

  layout(graph: SerializedGraph): Promise<{ graph: SerializedGraph }> {
    return request(`${this.baseUrl}/api/layout`, post({ graph }));
  }

  evaluate(
    generated: SerializedGraph,
    target: SerializedGraph,
    cascade = true,
  ): Promise<{ count: number; ratio: number; fromScratch: number }> {
    return request(
      `${this.baseUrl}/api/evaluate`,
      post({ generated, target, cascade }),
    );
  }
}
