// Browser bootstrap: wires the session store, API client and SVG renderer
// into the page. All state transitions go through the service; this file
// only moves payloads around and re-renders.

import { ApiError, SimulatorClient, type SessionConfig } from "./api.js";
import { renderGraph } from "./render.js";
import { SessionStore, violatedReports, witnessNodeIds } from "./store.js";
import type { RuleInfo } from "./types.js";

const DEFAULT_DECLS = `int s = 0;
int t = 0;
int age[] = { 30, 65, 41, 23 };
int * agep, * maxp;`;

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing element #${id}`);
  return found as T;
}

class App {
  private client = new SimulatorClient("");
  private store = new SessionStore();
  private rules: RuleInfo[] = [];
  private busy = false;

  async start(): Promise<void> {
    this.store.subscribe(() => this.render());
    el<HTMLButtonElement>("new-session").addEventListener("click", () => {
      void this.createSession();
    });
    el<HTMLFormElement>("statement-form").addEventListener("submit", (ev) => {
      ev.preventDefault();
      void this.submitStatement();
    });
    el<HTMLButtonElement>("undo").addEventListener("click", () => {
      void this.undo();
    });
    el<HTMLSelectElement>("rule-select").addEventListener("change", () => {
      void this.loadMatches();
    });
    el<HTMLButtonElement>("error-dismiss").addEventListener("click", () => {
      this.store.clearError();
    });
    await this.createSession();
  }

  /** One mutation in flight at a time; the service serializes the rest. */
  private async guarded<T>(work: () => Promise<T>): Promise<T | null> {
    if (this.busy) return null;
    this.busy = true;
    try {
      return await work();
    } catch (error) {
      if (error instanceof ApiError) {
        if (error.status === 404) {
          this.store.setError({
            kind: "SessionExpired",
            message: "session no longer exists; create a new one",
          });
        } else {
          this.store.setError(error.body);
        }
      } else {
        this.store.setError({
          kind: "NetworkError",
          message: `${error}; retry when the service is reachable`,
        });
      }
      return null;
    } finally {
      this.busy = false;
    }
  }

  private async createSession(): Promise<void> {
    const decls = el<HTMLTextAreaElement>("decls").value || DEFAULT_DECLS;
    const pool = Number(el<HTMLInputElement>("pool").value || "8");
    const stream = el<HTMLInputElement>("input-stream")
      .value.split(",")
      .map((s) => s.trim())
      .filter(Boolean)
      .map(Number);
    const config: SessionConfig = { addressPool: pool };
    await this.guarded(async () => {
      const created = await this.client.createSession(decls, config, stream);
      this.store.startSession(
        created.sessionId,
        created.graph,
        created.digest,
        created.reports,
      );
      const ruleDoc = await this.client.getRules(created.sessionId);
      this.rules = ruleDoc.rules;
      this.renderRuleOptions();
    });
  }

  private async submitStatement(): Promise<void> {
    const box = el<HTMLInputElement>("statement");
    const text = box.value.trim();
    const sessionId = this.store.current.sessionId;
    if (!text || !sessionId) return;
    const result = await this.guarded(() =>
      this.client.postStatement(sessionId, text),
    );
    if (result) {
      this.store.applyStep(result);
      box.value = "";
    }
  }

  private async undo(): Promise<void> {
    const sessionId = this.store.current.sessionId;
    if (!sessionId) return;
    const payload = await this.guarded(() => this.client.undo(sessionId));
    if (payload) {
      this.store.applyUndo(
        payload.graph,
        payload.digest,
        payload.reports,
        payload.transcript,
      );
    }
  }

  private async loadMatches(): Promise<void> {
    const sessionId = this.store.current.sessionId;
    const rule = el<HTMLSelectElement>("rule-select").value;
    if (!sessionId || !rule) {
      this.store.selectRule(null, []);
      return;
    }
    const doc = await this.guarded(() => this.client.getMatches(sessionId, rule));
    if (doc) this.store.selectRule(rule, doc.matches);
  }

  private async applyMatch(index: number): Promise<void> {
    const { sessionId, selectedRule } = this.store.current;
    if (!sessionId || !selectedRule) return;
    const info = this.rules.find((r) => r.name === selectedRule);
    const params: Record<string, number> = {};
    for (const p of info?.params ?? []) {
      params[p] = Number(window.prompt(`value for ${p}`, "0") ?? "0");
    }
    const result = await this.guarded(() =>
      this.client.applyMatch(sessionId, selectedRule, index, params),
    );
    if (result) this.store.applyStep(result);
  }

  private renderRuleOptions(): void {
    const select = el<HTMLSelectElement>("rule-select");
    select.innerHTML =
      `<option value="">what-if: pick a rule</option>` +
      this.rules
        .map(
          (r) =>
            `<option value="${r.name}">${r.name}${r.extension ? " (ext)" : ""}</option>`,
        )
        .join("");
  }

  private render(): void {
    const state = this.store.current;
    const shown = this.store.shown;

    const banner = el<HTMLDivElement>("error-banner");
    if (state.pendingError) {
      banner.hidden = false;
      el<HTMLSpanElement>("error-kind").textContent = state.pendingError.kind;
      el<HTMLSpanElement>("error-message").textContent =
        state.pendingError.message;
    } else {
      banner.hidden = true;
    }

    const pane = el<HTMLDivElement>("graph-pane");
    if (shown) {
      pane.innerHTML = renderGraph(shown.graph, {
        diff: this.store.isLive ? shown.diff : shown.diff,
        previous: this.store.previousGraph,
        witnesses: witnessNodeIds(shown),
      });
    }

    const wfBadge = el<HTMLSpanElement>("wf-badge");
    const riBadge = el<HTMLSpanElement>("ri-badge");
    const violated = violatedReports(shown);
    const wfBroken = violated.filter((r) => r.constraint.includes("WF"));
    const riBroken = violated.filter((r) => r.constraint.startsWith("notRI"));
    wfBadge.className = wfBroken.length ? "badge bad" : "badge ok";
    wfBadge.textContent = wfBroken.length
      ? `WF: ${wfBroken.map((r) => r.constraint).join(", ")}`
      : "WF ok";
    riBadge.className = riBroken.length ? "badge bad" : "badge ok";
    riBadge.textContent = riBroken.length
      ? `RI: ${riBroken.map((r) => r.constraint).join(", ")}`
      : "RI ok";

    const timeline = el<HTMLOListElement>("timeline");
    timeline.innerHTML = state.timeline
      .map((entry, i) => {
        const classes = [
          i === state.viewing ? "selected" : "",
          i === state.timeline.length - 1 ? "live" : "past",
        ]
          .filter(Boolean)
          .join(" ");
        const rule = entry.rule ? ` -> ${entry.rule}` : "";
        return `<li class="${classes}" data-index="${i}">${escapeHtml(entry.statement)}${escapeHtml(rule)}</li>`;
      })
      .join("");
    for (const item of timeline.querySelectorAll("li")) {
      item.addEventListener("click", () => {
        this.store.viewStep(Number(item.dataset["index"]));
      });
    }

    el<HTMLDivElement>("readonly-note").hidden = this.store.isLive;
    el<HTMLPreElement>("transcript").textContent = state.transcript.join("\n");

    const matchList = el<HTMLUListElement>("match-list");
    matchList.innerHTML = state.matches
      .map(
        (m) =>
          `<li><button data-match="${m.index}">apply</button> ` +
          `<span>[${m.index}] ${escapeHtml(m.description)}</span></li>`,
      )
      .join("");
    for (const button of matchList.querySelectorAll("button")) {
      button.addEventListener("click", () => {
        void this.applyMatch(Number((button as HTMLButtonElement).dataset["match"]));
      });
    }

    el<HTMLButtonElement>("undo").disabled =
      state.timeline.length <= 1 || !this.store.isLive;
    el<HTMLInputElement>("statement").disabled = !this.store.isLive;
  }
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

window.addEventListener("DOMContentLoaded", () => {
  void new App().start();
});
