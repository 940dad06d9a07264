/** Wire types shared with the pipeline service. */

export interface SocketSpec {
  socketId: string;
  dataTypes: string[];
}

export type NodeCategory = "input" | "output" | "processor";

export interface NodeSpec {
  nodeSpecId: string;
  category: NodeCategory;
  shortDescription: string;
  description: string;
  inputSpecs: SocketSpec[];
  outputSpecs: SocketSpec[];
  recommendedNodes: string[];
  defaultParams: Record<string, unknown>;
  examples: string[];
  provenance?: string;
}

export interface RegistryPayload {
  version: number;
  nodes: NodeSpec[];
}

export interface IncomingEdgeRef {
  sourceNodeId: string;
  outputId: string;
}

export interface SerializedNode {
  id: string;
  nodeSpecId: string;
  incomingEdges: Record<string, IncomingEdgeRef[]>;
  params: Record<string, unknown>;
  position: { x: number; y: number };
}

export interface SerializedGraph {
  nodes: SerializedNode[];
}

/** A single edge flattened out of the incomingEdges maps. */
export interface Edge {
  sourceNodeId: string;
  outputId: string;
  destNodeId: string;
  inputId: string;
}

export interface DroppedLine {
  line: number;
  reason: string;
}

export interface GenerateResponse {
  instruction: string;
  tag: string;
  selectedNodes: string[];
  pseudocode: string;
  droppedLines: DroppedLine[];
  danglingArgs: { nodeId: string; argName: string }[];
  diagnostics: string[];
  graph: SerializedGraph;
}

export interface CompileResponse {
  graph: SerializedGraph;
  droppedLines: DroppedLine[];
  danglingArgs: { nodeId: string; argName: string }[];
  diagnostics: string[];
}

export interface ErrorBody {
  error: string;
  detail: string;
  stage?: string;
  violations?: { kind: string; message: string; nodes: string[] }[];
}

export const PIPELINE_TAGS = ["language", "visual", "multimodal"] as const;
export type PipelineTag = (typeof PIPELINE_TAGS)[number];
