/**
 * Thin client for the session service. Every call round-trips; the caller
 * re-renders from the response, never from locally patched state.
 */

import type {
  ActRow,
  QueryResponse,
  Schema,
  SelectionRow,
  SessionView,
  TurnResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function request<T>(
  base: string,
  method: string,
  path: string,
  body?: unknown,
): Promise<T> {
  const init: RequestInit = { method };
  if (body !== undefined) {
    init.headers = { "Content-Type": "application/json" };
    init.body = JSON.stringify(body);
  }
  const resp = await fetch(base + path, init);
  if (!resp.ok) {
    let detail = resp.statusText;
    try {
      const data = await resp.json();
      if (typeof data.detail === "string") detail = data.detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(resp.status, detail);
  }
  return (await resp.json()) as T;
}

export class SessionApi {
  constructor(readonly base: string) {}

  getSchema(): Promise<Schema> {
    return request(this.base, "GET", "/schema");
  }

  openSession(opts: {
    role: "user" | "wizard";
    goal_type?: string;
    seed?: number;
  }): Promise<SessionView> {
    return request(this.base, "POST", "/sessions", opts);
  }

  getState(sessionId: string): Promise<SessionView> {
    return request(this.base, "GET", `/sessions/${sessionId}/state`);
  }

  postUserTurn(sessionId: string, selected: SelectionRow[]): Promise<TurnResponse> {
    return request(this.base, "POST", `/sessions/${sessionId}/turn`, {
      selected,
    });
  }

  postWizardTurn(
    sessionId: string,
    acts: ActRow[],
    entities: Record<string, string>,
  ): Promise<TurnResponse> {
    return request(this.base, "POST", `/sessions/${sessionId}/turn`, {
      acts,
      entities,
    });
  }

  postQuery(
    sessionId: string,
    domain: string,
    constraints: [string, string][],
    near?: string | null,
  ): Promise<QueryResponse> {
    return request(this.base, "POST", `/sessions/${sessionId}/query`, {
      domain,
      constraints,
      near: near ?? null,
    });
  }

  /**
   * Raw export body. Kept as the exact server text so a saved file is
   * byte-identical to what the service produced.
   */
  async exportRaw(sessionId: string): Promise<string> {
    const resp = await fetch(`${this.base}/sessions/${sessionId}/export`);
    if (!resp.ok) {
      throw new ApiError(resp.status, resp.statusText);
    }
    return resp.text();
  }
}
