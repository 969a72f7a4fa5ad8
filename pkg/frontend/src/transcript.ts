import { el } from "./dom.js";
import { actLabel } from "./logic.js";
import type { Turn } from "./types.js";

/** Chat-style transcript: rendered text plus the acts behind each turn. */
export function renderTranscript(turns: Turn[]): HTMLElement {
  const box = el("div", { class: "transcript", id: "transcript" });
  if (turns.length === 0) {
    box.append(el("p", { class: "hint" }, "No turns yet."));
    return box;
  }
  for (const turn of turns) {
    const bubble = el(
      "div",
      { class: `turn turn-${turn.role}` },
      el("div", { class: "speaker" }, turn.role === "user" ? "User" : "System"),
      el("div", { class: "utterance" }, turn.utterance ?? "(no text)"),
      el(
        "div",
        { class: "acts" },
        turn.acts.map((a) => actLabel(a)).join(" | "),
      ),
    );
    box.append(bubble);
  }
  return box;
}
