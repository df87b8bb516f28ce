// Typed client for the simulator's session API.

import type {
  ApiErrorBody,
  FormulaVerdict,
  GraphPayload,
  MatchSummary,
  RuleInfo,
  SessionCreated,
  StepResult,
  TraceDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly body: ApiErrorBody,
  ) {
    super(`${body.kind}: ${body.message}`);
  }
}

export interface SessionConfig {
  addressPool?: number;
  strictC?: boolean;
  materializeAddresses?: boolean;
  ignoreNames?: boolean;
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const text = await response.text();
  const payload = text ? JSON.parse(text) : {};
  if (!response.ok) {
    throw new ApiError(response.status, payload as ApiErrorBody);
  }
  return payload as T;
}

export class SimulatorClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  createSession(
    decls: string,
    config: SessionConfig = {},
    inputStream: number[] = [],
  ): Promise<SessionCreated> {
    return request(this.url("/sessions"), {
      method: "POST",
      body: JSON.stringify({ decls, config, inputStream }),
    });
  }

  getGraph(sessionId: string): Promise<GraphPayload> {
    return request(this.url(`/sessions/${sessionId}/graph`));
  }

  postStatement(sessionId: string, text: string): Promise<StepResult> {
    return request(this.url(`/sessions/${sessionId}/statements`), {
      method: "POST",
      body: JSON.stringify({ text }),
    });
  }

  getRules(sessionId: string): Promise<{ rules: RuleInfo[] }> {
    return request(this.url(`/sessions/${sessionId}/rules`));
  }

  getMatches(
    sessionId: string,
    rule: string,
  ): Promise<{ rule: string; matches: MatchSummary[] }> {
    return request(
      this.url(`/sessions/${sessionId}/matches?rule=${encodeURIComponent(rule)}`),
    );
  }

  applyMatch(
    sessionId: string,
    rule: string,
    matchIndex: number,
    params: Record<string, number> = {},
  ): Promise<StepResult> {
    return request(this.url(`/sessions/${sessionId}/apply`), {
      method: "POST",
      body: JSON.stringify({ rule, matchIndex, params }),
    });
  }

  undo(sessionId: string): Promise<GraphPayload> {
    return request(this.url(`/sessions/${sessionId}/undo`), { method: "POST" });
  }

  getTrace(sessionId: string): Promise<TraceDoc> {
    return request(this.url(`/sessions/${sessionId}/trace`));
  }

  checkFormula(sessionId: string, formula: string): Promise<FormulaVerdict> {
    return request(this.url(`/sessions/${sessionId}/check`), {
      method: "POST",
      body: JSON.stringify({ formula }),
    });
  }
}
