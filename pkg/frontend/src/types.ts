// Wire types for the diagram service JSON API. Field names mirror the
// server payloads exactly; everything the console shows comes from these.

export type Severity = "error" | "warning";

export interface WireDiagnostic {
  severity: Severity;
  code: string;
  message: string;
  node: string | null;
  entity: string | null;
}

export interface WireEdge {
  source: string;
  data: string;
  target: string;
  category: string;
}

export interface WireField {
  name: string;
  dtype: string;
  description: string;
}

export interface WireMessage {
  type: "message";
  id: string;
  sender: string;
  receiver: string;
  api: string;
  tables: string[];
}

export interface WireBranch {
  label: string;
  elements: WireElement[];
}

export interface WireFragment {
  type: "fragment";
  id: string;
  kind: string;
  tables: string[];
  branches: WireBranch[];
}

export interface WireReturn {
  type: "return";
  id: string;
  fields: WireField[];
}

export type WireElement = WireMessage | WireFragment | WireReturn;

export interface WireUseCase {
  name: string;
  input_fields: WireField[];
  participants: string[];
  body: WireElement[];
  spans: Record<string, number[]>;
}

export interface WireApi {
  name: string;
  description: string;
  request: WireField[];
  response: WireField[];
}

export interface WireRule {
  condition: string;
  condition_reads: string[];
  action: string;
  action_reads: string[];
  action_writes: WireField[];
}

export interface WireTable {
  id: string;
  rules: WireRule[];
}

export type NodeKind = "input" | "function" | "control" | "output";

export interface WireEdg {
  usecase: string;
  nodes: { id: string; kind: NodeKind }[];
  hierarchy_edges: string[][];
  sequence_edges: string[][];
  fragment_kinds: Record<string, string>;
  branches: Record<string, { label: string; children: string[] }[]>;
}

export interface UsecaseListResponse {
  schema_version: number;
  usecases: string[];
}

export interface UsecaseResponse {
  schema_version: number;
  usecase: WireUseCase;
  apis: Record<string, WireApi>;
  tables: Record<string, WireTable>;
  text: string;
}

export interface EdgResponse extends WireEdg {
  schema_version: number;
}

export interface PruneResponse {
  schema_version: number;
  usecase: string;
  target: string;
  members: string[];
  ratio: number;
}

export interface InferResponse {
  schema_version: number;
  usecase: string;
  edges: WireEdge[];
  diagnostics: WireDiagnostic[];
}

export interface ParseResponse {
  schema_version: number;
  document: {
    usecases: WireUseCase[];
    apis: Record<string, WireApi>;
    tables: Record<string, WireTable>;
  } | null;
  diagnostics: WireDiagnostic[];
}

export interface ErrorResponse {
  schema_version: number;
  diagnostic: WireDiagnostic;
}
