/**
 * In-memory stand-in for the session service, shaped by captured
 * responses. Implements just enough turn semantics for the console flows:
 * posted rows flip to expressed, blank ones come back filled on the next
 * state, an empty selection closes the dialogue.
 */

import type { GoalRow, SelectionRow, SessionView, Turn } from "../src/types.js";

import schemaFixture from "./fixtures/schema.json";
import userFixture from "./fixtures/user_session.json";

export class MockServer {
  rows: GoalRow[];
  finished = false;
  transcript: Turn[] = [];
  exportBody = '{\n "dialogues": [],\n "schema_version": "1.0"\n}';
  getsAfterPost = 0;
  postsSeen: SelectionRow[][] = [];
  rejectNext: string | null = null;

  constructor() {
    this.rows = (userFixture as unknown as SessionView).goal!.rows.map(
      (r) => [...r] as GoalRow,
    );
  }

  private view(): SessionView {
    const base = userFixture as unknown as SessionView;
    return {
      ...base,
      finished: this.finished,
      transcript: this.transcript,
      goal: { ...base.goal!, rows: this.rows.map((r) => [...r] as GoalRow) },
    };
  }

  fetch = async (input: RequestInfo | URL, init?: RequestInit): Promise<Response> => {
    const url = String(input);
    const method = init?.method ?? "GET";
    const path = url.replace(/^https?:\/\/[^/]+/, "");

    if (method === "GET" && path === "/schema") {
      return this.json(200, schemaFixture);
    }
    if (method === "POST" && path === "/sessions") {
      return this.json(201, this.view());
    }
    if (method === "GET" && path.endsWith("/state")) {
      this.getsAfterPost += 1;
      return this.json(200, this.view());
    }
    if (method === "GET" && path.endsWith("/export")) {
      return new Response(this.exportBody, { status: 200 });
    }
    if (method === "POST" && path.endsWith("/turn")) {
      if (this.rejectNext) {
        const detail = this.rejectNext;
        this.rejectNext = null;
        return this.json(409, { detail });
      }
      if (this.finished) {
        return this.json(409, { detail: "session already finished" });
      }
      const body = JSON.parse(String(init?.body ?? "{}"));
      const selected = (body.selected ?? []) as SelectionRow[];
      this.postsSeen.push(selected);
      const before = this.transcript.length;
      if (selected.length === 0) {
        this.finished = true;
        this.pushTurns(
          [["General", "thank", "none", "none"], ["General", "bye", "none", "none"]],
          [["General", "welcome", "none", "none"], ["General", "bye", "none", "none"]],
        );
      } else {
        for (const [sg, domain, slot] of selected) {
          const row = this.rows.find(
            (r) => r[0] === sg && r[1] === domain && r[2] === slot,
          );
          if (!row) return this.json(400, { detail: `no tuple ${slot}` });
          row[4] = true;
          if (row[3] === "") row[3] = `v-${slot}`;
        }
        this.pushTurns(
          selected.map(([, d, s, v]) =>
            v === "" ? ["Request", d, s, ""] : ["Inform", d, s, v]),
          selected
            .filter(([, , , v]) => v === "")
            .map(([, d, s]) => ["Inform", d, s, `v-${s}`]),
        );
      }
      return this.json(200, {
        ...this.view(),
        new_turns: this.transcript.slice(before),
      });
    }
    return this.json(404, { detail: `no route ${method} ${path}` });
  };

  private pushTurns(userActs: string[][], sysActs: string[][]): void {
    this.transcript.push(
      {
        role: "user",
        acts: userActs as Turn["acts"],
        utterance: "user says",
        user_state: this.rows.map((r) => [...r] as GoalRow),
        selected: null,
        sys_state: null,
      },
      {
        role: "sys",
        acts: sysActs as Turn["acts"],
        utterance: "system says",
        user_state: null,
        selected: null,
        sys_state: {},
      },
    );
  }

  private json(status: number, body: unknown): Response {
    return new Response(JSON.stringify(body), {
      status,
      headers: { "Content-Type": "application/json" },
    });
  }
}
