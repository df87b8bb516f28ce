// View state for one simulation session.
//
// The store never computes graphs: every snapshot it holds arrived verbatim
// in a server payload, so the rendered state always equals the service's
// view of the session (the e2e suite asserts digest equality).

import type {
  ApiErrorBody,
  ConstraintReport,
  DiffSets,
  GraphDocument,
  MatchSummary,
  StepResult,
} from "./types.js";

export interface TimelineEntry {
  statement: string;
  rule: string | null;
  graph: GraphDocument;
  digest: string;
  diff: DiffSets | null;
  reports: ConstraintReport[];
  output: string | null;
}

export interface ViewState {
  sessionId: string | null;
  /** timeline[0] is the start state; the last entry is the current state. */
  timeline: TimelineEntry[];
  /** index into timeline currently shown (read-only unless last). */
  viewing: number;
  transcript: string[];
  pendingError: ApiErrorBody | null;
  selectedRule: string | null;
  matches: MatchSummary[];
}

export type Listener = (state: ViewState) => void;

const EMPTY_DIFF: DiffSets = {
  createdNodes: [],
  createdEdges: [],
  deletedNodes: [],
  deletedEdges: [],
  updatedNodes: [],
};

export class SessionStore {
  private state: ViewState = {
    sessionId: null,
    timeline: [],
    viewing: 0,
    transcript: [],
    pendingError: null,
    selectedRule: null,
    matches: [],
  };
  private listeners: Listener[] = [];

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(): void {
    for (const listener of this.listeners) listener(this.state);
  }

  get current(): ViewState {
    return this.state;
  }

  /** Entry being displayed (timeline selection or the live head). */
  get shown(): TimelineEntry | null {
    return this.state.timeline[this.state.viewing] ?? null;
  }

  get head(): TimelineEntry | null {
    const t = this.state.timeline;
    return t.length ? (t[t.length - 1] ?? null) : null;
  }

  get isLive(): boolean {
    return this.state.viewing === this.state.timeline.length - 1;
  }

  /** Graph shown one step earlier than the selection (for deletion ghosts). */
  get previousGraph(): GraphDocument | null {
    const prev = this.state.timeline[this.state.viewing - 1];
    return prev ? prev.graph : null;
  }

  startSession(
    sessionId: string,
    graph: GraphDocument,
    digest: string,
    reports: ConstraintReport[],
  ): void {
    this.state = {
      sessionId,
      timeline: [
        {
          statement: "(start)",
          rule: null,
          graph,
          digest,
          diff: null,
          reports,
          output: null,
        },
      ],
      viewing: 0,
      transcript: [],
      pendingError: null,
      selectedRule: null,
      matches: [],
    };
    this.emit();
  }

  applyStep(result: StepResult): void {
    this.state = {
      ...this.state,
      timeline: [
        ...this.state.timeline,
        {
          statement: result.statement,
          rule: result.rule,
          graph: result.graph,
          digest: result.digest,
          diff: result.diff ?? EMPTY_DIFF,
          reports: result.reports,
          output: result.output,
        },
      ],
      transcript: result.transcript,
      pendingError: null,
      matches: [],
    };
    this.state.viewing = this.state.timeline.length - 1;
    this.emit();
  }

  applyUndo(graph: GraphDocument, digest: string, reports: ConstraintReport[], transcript: string[]): void {
    const timeline = this.state.timeline.slice(0, -1);
    if (!timeline.length) return;
    const last = timeline[timeline.length - 1]!;
    // the restored snapshot must match what we showed before the undone step
    if (last.digest !== digest) {
      timeline[timeline.length - 1] = { ...last, graph, digest, reports };
    }
    this.state = {
      ...this.state,
      timeline,
      viewing: timeline.length - 1,
      transcript,
      pendingError: null,
      matches: [],
    };
    this.emit();
  }

  setError(error: ApiErrorBody): void {
    this.state = { ...this.state, pendingError: error };
    this.emit();
  }

  clearError(): void {
    if (!this.state.pendingError) return;
    this.state = { ...this.state, pendingError: null };
    this.emit();
  }

  selectRule(rule: string | null, matches: MatchSummary[]): void {
    this.state = { ...this.state, selectedRule: rule, matches };
    this.emit();
  }

  viewStep(index: number): void {
    if (index < 0 || index >= this.state.timeline.length) return;
    this.state = { ...this.state, viewing: index };
    this.emit();
  }

  viewLatest(): void {
    this.viewStep(this.state.timeline.length - 1);
  }
}

/** Violated referential-integrity reports of the shown state. */
export function violatedReports(entry: TimelineEntry | null): ConstraintReport[] {
  if (!entry) return [];
  return entry.reports.filter((r) => r.verdict === "violated");
}

/** Node ids highlighted as violation witnesses. */
export function witnessNodeIds(entry: TimelineEntry | null): Set<number> {
  const out = new Set<number>();
  for (const report of violatedReports(entry)) {
    for (const id of Object.values(report.witness ?? {})) out.add(id);
  }
  return out;
}
