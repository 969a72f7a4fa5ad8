/**
 * Human-as-user panel: the goal as a tuple table. Unexpressed rows carry
 * checkboxes; submitting posts exactly the checked rows. An empty
 * submission is only reachable through the explicit close button.
 */

import { el } from "./dom.js";
import { rowFilled, submitEnabled, toSelectionPayload } from "./logic.js";
import type { GoalRow, SelectionRow, SessionView } from "./types.js";

export interface UserPanelHooks {
  onSubmit(selected: SelectionRow[]): void;
  onClose(): void;
}

export function renderUserPanel(
  view: SessionView,
  hooks: UserPanelHooks,
): HTMLElement {
  const goal = view.goal;
  if (!goal) {
    return el("div", {}, el("p", {}, "No goal on this session."));
  }
  const panel = el("div", { class: "panel user-panel" });
  panel.append(
    el("h2", {}, `Goal (${goal.goal_type})`),
    el("p", { class: "goal-description" }, goal.description),
  );

  const checks: (HTMLInputElement | null)[] = [];
  const table = el("table", { class: "tuple-table", id: "goal-table" });
  table.append(
    el(
      "tr",
      {},
      el("th", {}, ""),
      el("th", {}, "sub-goal"),
      el("th", {}, "domain"),
      el("th", {}, "slot"),
      el("th", {}, "value"),
      el("th", {}, "status"),
    ),
  );
  goal.rows.forEach((row) => {
    const [sg, domain, slot, value, expressed] = row;
    let check: HTMLInputElement | null = null;
    if (!expressed && !view.finished) {
      check = el("input", { type: "checkbox", class: "row-check" });
      check.addEventListener("change", updateButtons);
    }
    checks.push(check);
    table.append(
      el(
        "tr",
        { class: expressed ? "row-expressed" : "row-open" },
        el("td", {}, check),
        el("td", {}, String(sg)),
        el("td", {}, domain),
        el("td", {}, slot),
        el("td", { class: rowFilled(row) ? "val-filled" : "val-blank" },
          value === "" ? "(blank)" : value),
        el("td", {}, expressed ? (rowFilled(row) ? "filled" : "expressed") : "open"),
      ),
    );
  });
  panel.append(table);

  const submit = el("button", { id: "submit-turn" }, "Send selected") as HTMLButtonElement;
  const close = el("button", { id: "close-session" }, "Close dialogue") as HTMLButtonElement;
  close.disabled = view.finished;

  function chosen(): GoalRow[] {
    const out: GoalRow[] = [];
    goal!.rows.forEach((row, i) => {
      const c = checks[i];
      if (c && c.checked) out.push(row);
    });
    return out;
  }

  function updateButtons(): void {
    submit.disabled = !submitEnabled(chosen().length, view.finished);
  }
  updateButtons();

  submit.addEventListener("click", () => {
    const rows = chosen();
    if (rows.length === 0) return;
    hooks.onSubmit(toSelectionPayload(rows));
  });
  close.addEventListener("click", () => hooks.onClose());

  panel.append(el("div", { class: "actions" }, submit, close));
  if (view.finished) {
    panel.append(el("p", { class: "done-note" }, "Dialogue finished."));
  }
  return panel;
}
