/**
 * Console shell: role picker, session lifecycle, transcript and role panel.
 *
 * The session id lives in the URL hash, so a reload reattaches and
 * re-fetches; nothing authoritative is kept client-side. Each action posts
 * to the service and re-renders from the response.
 */

import { ApiError, SessionApi } from "./api.js";
import { clear, el } from "./dom.js";
import { renderTranscript } from "./transcript.js";
import { renderUserPanel } from "./userPanel.js";
import {
  freshPanelState,
  renderWizardPanel,
  type WizardPanelState,
} from "./wizardPanel.js";
import type { ActRow, Schema, SelectionRow, SessionView } from "./types.js";

function apiBase(): string {
  const params = new URLSearchParams(window.location.search);
  return params.get("api") ?? "";
}

function hashSession(): string | null {
  const m = window.location.hash.match(/s=([0-9a-f]+)/);
  return m ? m[1]! : null;
}

export class ConsoleApp {
  private api: SessionApi;
  private schema: Schema | null = null;
  private view: SessionView | null = null;
  private panelState: WizardPanelState = freshPanelState();
  private error: string | null = null;

  constructor(private root: HTMLElement, base?: string) {
    this.api = new SessionApi(base ?? apiBase());
  }

  async start(): Promise<void> {
    try {
      this.schema = await this.api.getSchema();
    } catch (e) {
      this.root.append(
        el("p", { class: "error" },
          `Cannot reach the session service: ${String(e)}`));
      return;
    }
    const existing = hashSession();
    if (existing) {
      await this.refresh(existing);
    }
    this.render();
  }

  // Errors stick until the next user action so a rejected post is still
  // visible after the follow-up state re-fetch succeeds.
  private async guard<T>(fn: () => Promise<T>): Promise<T | null> {
    try {
      return await fn();
    } catch (e) {
      this.error = e instanceof ApiError ? `${e.status}: ${e.message}` : String(e);
      return null;
    }
  }

  private async refresh(sessionId: string): Promise<void> {
    const view = await this.guard(() => this.api.getState(sessionId));
    if (view) this.view = view;
  }

  async open(role: "user" | "wizard", goalType: string): Promise<void> {
    this.error = null;
    const view = await this.guard(() =>
      this.api.openSession({ role, goal_type: goalType || undefined }));
    if (view) {
      this.view = view;
      this.panelState = freshPanelState();
      window.location.hash = `s=${view.session_id}`;
    }
    this.render();
  }

  private async userTurn(selected: SelectionRow[]): Promise<void> {
    this.error = null;
    const sid = this.view!.session_id;
    await this.guard(() => this.api.postUserTurn(sid, selected));
    await this.refresh(sid);
    this.render();
  }

  private async wizardTurn(
    acts: ActRow[],
    entities: Record<string, string>,
  ): Promise<void> {
    this.error = null;
    const sid = this.view!.session_id;
    const resp = await this.guard(() =>
      this.api.postWizardTurn(sid, acts, entities));
    if (resp) this.panelState = freshPanelState();
    await this.refresh(sid);
    this.render();
  }

  private async wizardQuery(
    domain: string,
    constraints: [string, string][],
    near: string | null,
  ): Promise<void> {
    this.error = null;
    const sid = this.view!.session_id;
    const resp = await this.guard(() =>
      this.api.postQuery(sid, domain, constraints, near));
    await this.refresh(sid);
    if (resp && this.view?.queries) {
      this.panelState.activeTab = this.view.queries.length - 1;
    }
    this.render();
  }

  private async download(): Promise<void> {
    this.error = null;
    const sid = this.view!.session_id;
    const text = await this.guard(() => this.api.exportRaw(sid));
    if (text === null) {
      this.render();
      return;
    }
    const blob = new Blob([text], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const a = el("a", { href: url, download: `dialogue-${sid}.json` });
    document.body.append(a);
    a.click();
    a.remove();
    URL.revokeObjectURL(url);
  }

  render(): void {
    clear(this.root);
    this.root.append(el("h1", {}, "Dialogue console"));
    if (this.error) {
      this.root.append(el("p", { class: "error", id: "error-box" }, this.error));
    }
    if (!this.view) {
      this.root.append(this.renderPicker());
      return;
    }
    const view = this.view;
    const head = el("div", { class: "session-head" },
      el("span", {}, `session ${view.session_id.slice(0, 8)} `),
      el("span", {}, `role: ${view.role} `),
      el("span", { id: "finished-flag" },
        view.finished ? "finished" : "running"));
    const download = el("button", { id: "download-btn" }, "Download JSON");
    download.addEventListener("click", () => void this.download());
    const reset = el("button", { id: "new-session" }, "New session");
    reset.addEventListener("click", () => {
      this.view = null;
      this.panelState = freshPanelState();
      window.location.hash = "";
      this.render();
    });
    head.append(" ", download, " ", reset);
    this.root.append(head);

    const columns = el("div", { class: "columns" });
    columns.append(renderTranscript(view.transcript));
    if (view.role === "user") {
      columns.append(renderUserPanel(view, {
        onSubmit: (sel) => void this.userTurn(sel),
        onClose: () => void this.userTurn([]),
      }));
    } else {
      columns.append(renderWizardPanel(view, this.schema!, this.panelState, {
        onQuery: (d, c, n) => void this.wizardQuery(d, c, n),
        onSubmit: (acts, ents) => void this.wizardTurn(acts, ents),
      }, () => this.render()));
    }
    this.root.append(columns);
  }

  private renderPicker(): HTMLElement {
    const box = el("div", { class: "picker", id: "role-picker" });
    const goalType = el("select", { id: "goal-type" },
      el("option", { value: "" }, "random"),
      ...(this.schema?.goal_types ?? []).map(
        (t) => el("option", { value: t }, t)));
    const asUser = el("button", { id: "open-user" }, "Play the user");
    asUser.addEventListener("click", () =>
      void this.open("user", (goalType as HTMLSelectElement).value));
    const asWizard = el("button", { id: "open-wizard" }, "Play the wizard");
    asWizard.addEventListener("click", () =>
      void this.open("wizard", (goalType as HTMLSelectElement).value));
    box.append(
      el("p", {}, "Open a live session against the rule agent."),
      el("label", {}, "goal type ", goalType),
      el("div", { class: "actions" }, asUser, asWizard));
    return box;
  }
}

export function mount(root: HTMLElement, base?: string): ConsoleApp {
  const app = new ConsoleApp(root, base);
  void app.start();
  return app;
}

declare global {
  interface Window {
    __console_autostart?: boolean;
  }
}

if (typeof document !== "undefined" && window.__console_autostart !== false) {
  const root = document.getElementById("app");
  if (root) mount(root);
}
