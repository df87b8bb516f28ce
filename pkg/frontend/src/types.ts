// Wire formats of the simulator service. The UI performs no graph rewriting:
// every state shown on screen is a GraphDocument received from the server.

export type AttrValue = number | boolean | string;

export interface GraphNode {
  id: number;
  type: string;
  attrs: Record<string, AttrValue>;
}

export interface GraphEdge {
  id: number;
  label: string;
  src: number;
  tgt: number;
}

export interface GraphDocument {
  version: number;
  typeGraph: string;
  nextId?: number;
  nodes: GraphNode[];
  edges: GraphEdge[];
}

export interface DiffSets {
  createdNodes: number[];
  createdEdges: number[];
  deletedNodes: number[];
  deletedEdges: number[];
  updatedNodes: number[];
  /** only populated when visualising a rule match, never for executed steps */
  forbiddenNodes?: number[];
}

export interface ConstraintReport {
  constraint: string;
  verdict: "holds" | "violated";
  witness?: Record<string, number>;
  detail?: string;
}

export interface SessionCreated {
  sessionId: string;
  graph: GraphDocument;
  digest: string;
  reports: ConstraintReport[];
  stepCount: number;
  transcript: string[];
}

export interface StepResult {
  statement: string;
  rule: string | null;
  anchors: Record<string, number>;
  graph: GraphDocument;
  digest: string;
  diff: DiffSets;
  reports: ConstraintReport[];
  output: string | null;
  transcript: string[];
  stepCount: number;
}

export interface GraphPayload {
  graph: GraphDocument;
  digest: string;
  reports: ConstraintReport[];
  stepCount: number;
  transcript: string[];
}

export interface RuleInfo {
  name: string;
  description: string;
  extension: boolean;
  anchors: Record<string, string>;
  params: string[];
}

export interface MatchSummary {
  index: number;
  rule: string;
  bindings: Record<string, number>;
  description: string;
}

export interface TraceStepDoc {
  index: number;
  statement: string;
  rule: string | null;
  anchors: Record<string, number>;
  match: Record<string, number>;
  params: Record<string, number>;
  from: number;
  to: number;
  diff: DiffSets;
  reports: ConstraintReport[];
  output: string | null;
  whatIf: boolean;
}

export interface TraceDoc {
  version: number;
  config: Record<string, unknown>;
  env: Record<string, number>;
  states: GraphDocument[];
  digests: string[];
  steps: TraceStepDoc[];
  transcript: string[];
  error: ApiErrorBody | null;
}

export interface FormulaVerdict {
  holds: boolean;
  violationIndex: number | null;
  reports: ConstraintReport[];
}

export interface ApiErrorBody {
  kind: string;
  message: string;
  position?: { line: number; column: number };
}
