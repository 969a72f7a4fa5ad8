/**
 * Human-as-wizard panel: query tabs over the venue database, a results
 * table whose row picks prefill Recommend acts, and an act editor that
 * starts from the user's pending requests. The first tab of a turn is the
 * locked server prefill; manual queries stack behind it.
 */

import { el } from "./dom.js";
import {
  buildConstraints,
  fillInformValues,
  informPrefill,
  noOfferAct,
  noOfferEnabled,
  queryFormSlots,
  recommendPrefill,
} from "./logic.js";
import type {
  ActRow,
  Entity,
  QueryTab,
  Schema,
  SessionView,
} from "./types.js";

export interface WizardPanelHooks {
  onQuery(domain: string, constraints: [string, string][], near: string | null): void;
  onSubmit(acts: ActRow[], entities: Record<string, string>): void;
}

export interface WizardPanelState {
  activeTab: number;
  pickedEntities: Entity[];
  actRows: ActRow[];
  prefilled: boolean;
}

export function freshPanelState(): WizardPanelState {
  return { activeTab: 0, pickedEntities: [], actRows: [], prefilled: false };
}

function renderQueryForm(
  schema: Schema,
  domain: string,
  hooks: WizardPanelHooks,
): HTMLElement {
  const { text, toggles } = queryFormSlots(schema, domain);
  const form = el("div", { class: "query-form", id: "query-form" });
  const textInputs = new Map<string, HTMLInputElement>();
  const toggleInputs = new Map<string, HTMLInputElement>();

  const grid = el("div", { class: "slot-grid" });
  for (const slot of text) {
    const input = el("input", { type: "text", "data-slot": slot });
    textInputs.set(slot, input);
    grid.append(el("label", {}, `${slot} `, input));
  }
  form.append(grid);

  if (toggles.length > 0) {
    const box = el("div", { class: "service-toggles", id: "service-toggles" });
    for (const name of toggles) {
      const input = el("input", {
        type: "checkbox",
        class: "service-toggle",
        "data-service": name,
      });
      toggleInputs.set(name, input);
      box.append(el("label", { class: "toggle" }, input, ` ${name}`));
    }
    form.append(
      el("details", { open: true },
        el("summary", {}, `services (${toggles.length})`), box),
    );
  }

  const nearInput = el("input", {
    type: "text",
    id: "near-input",
    placeholder: "entity id, blank for none",
  });
  const run = el("button", { id: "run-query" }, "Run query");
  run.addEventListener("click", () => {
    const textVals: Record<string, string> = {};
    for (const [slot, input] of textInputs) textVals[slot] = input.value;
    const toggleVals: Record<string, boolean> = {};
    for (const [name, input] of toggleInputs) toggleVals[name] = input.checked;
    const near = nearInput.value.trim();
    hooks.onQuery(domain, buildConstraints(textVals, toggleVals), near || null);
  });
  form.append(el("div", { class: "query-run" },
    el("label", {}, "near ", nearInput), run));
  return form;
}

function renderResults(
  tab: QueryTab,
  state: WizardPanelState,
  rerender: () => void,
): HTMLElement {
  const box = el("div", { class: "results" });
  if (tab.results.length === 0) {
    box.append(el("p", { class: "hint" }, "No matching entities."));
    return box;
  }
  const table = el("table", { class: "result-table", id: "result-table" });
  const slots = ["name", "rating", "price", "fee", "cost", "phone"];
  table.append(el("tr", {},
    el("th", {}, "pick"), el("th", {}, "id"),
    ...slots.map((s) => el("th", {}, s))));
  for (const ent of tab.results) {
    const check = el("input", { type: "checkbox", class: "entity-pick" });
    check.checked = state.pickedEntities.some((e) => e.id === ent.id);
    check.addEventListener("change", () => {
      if (check.checked) {
        state.pickedEntities.push(ent);
      } else {
        state.pickedEntities = state.pickedEntities.filter(
          (e) => e.id !== ent.id,
        );
      }
      state.actRows = fillInformValues(
        [
          ...recommendPrefill(state.pickedEntities),
          ...state.actRows.filter((a) => a[0] !== "Recommend"),
        ],
        state.pickedEntities,
      );
      rerender();
    });
    table.append(el("tr", {},
      el("td", {}, check),
      el("td", {}, ent.id),
      ...slots.map((s) => {
        const v = ent.values[s];
        return el("td", {}, v === undefined || v === null ? "" : String(v));
      })));
  }
  box.append(table);
  return box;
}

function renderActEditor(
  state: WizardPanelState,
  view: SessionView,
  hooks: WizardPanelHooks,
  rerender: () => void,
): HTMLElement {
  const box = el("div", { class: "act-editor", id: "act-editor" });
  box.append(el("h3", {}, "System acts"));

  const list = el("ul", { class: "act-list" });
  state.actRows.forEach((act, i) => {
    const drop = el("button", { class: "drop-act" }, "x");
    drop.addEventListener("click", () => {
      state.actRows.splice(i, 1);
      rerender();
    });
    const valueInput = el("input", {
      type: "text",
      class: "act-value-edit",
      value: act[3],
    });
    valueInput.value = act[3];
    valueInput.addEventListener("input", () => {
      act[3] = valueInput.value;
    });
    list.append(el("li", {},
      `${act[0]} ${act[1]}.${act[2]} = `, valueInput, " ", drop));
  });
  box.append(list);

  const intent = el("select", { id: "act-intent" },
    ...["Inform", "Request", "Recommend", "NoOffer", "Select", "General"].map(
      (x) => el("option", { value: x }, x)));
  const domain = el("input", { type: "text", id: "act-domain", placeholder: "domain" });
  const slot = el("input", { type: "text", id: "act-slot", placeholder: "slot" });
  const value = el("input", { type: "text", id: "act-value", placeholder: "value" });
  const add = el("button", { id: "add-act" }, "Add act");
  add.addEventListener("click", () => {
    state.actRows.push([
      (intent as HTMLSelectElement).value,
      domain.value.trim(),
      slot.value.trim(),
      value.value.trim(),
    ]);
    rerender();
  });
  box.append(el("div", { class: "act-form" }, intent, domain, slot, value, add));

  const tab = view.queries?.[state.activeTab];
  const noOffer = el("button", { id: "nooffer-btn" }, "NoOffer") as HTMLButtonElement;
  noOffer.disabled = !noOfferEnabled(tab);
  noOffer.addEventListener("click", () => {
    if (tab) {
      state.actRows.push(noOfferAct(tab.domain));
      rerender();
    }
  });

  const send = el("button", { id: "send-acts" }, "Send turn") as HTMLButtonElement;
  send.disabled = view.finished || state.actRows.length === 0;
  send.addEventListener("click", () => {
    const entities: Record<string, string> = {};
    for (const e of state.pickedEntities) {
      if (!(e.domain in entities)) entities[e.domain] = e.id;
    }
    hooks.onSubmit([...state.actRows], entities);
  });

  box.append(el("div", { class: "actions" }, noOffer, send));
  return box;
}

export function renderWizardPanel(
  view: SessionView,
  schema: Schema,
  state: WizardPanelState,
  hooks: WizardPanelHooks,
  rerender: () => void,
): HTMLElement {
  const panel = el("div", { class: "panel wizard-panel" });
  const tabs = view.queries ?? [];

  // Pending requests seed the act editor once per turn.
  if (!state.prefilled && view.state) {
    state.actRows = [
      ...informPrefill(view.state.pending, state.pickedEntities),
      ...state.actRows,
    ];
    state.prefilled = true;
  }

  const tabBar = el("div", { class: "tab-bar", id: "tab-bar" });
  tabs.forEach((tab, i) => {
    const btn = el(
      "button",
      { class: `tab ${i === state.activeTab ? "tab-active" : ""}` },
      `${tab.domain}${tab.locked ? " (locked)" : ""} [${tab.result_count}]`,
    );
    btn.addEventListener("click", () => {
      state.activeTab = i;
      rerender();
    });
    tabBar.append(btn);
  });
  panel.append(el("h2", {}, "Database"), tabBar);

  const active = tabs[state.activeTab];
  if (active) {
    if (active.locked) {
      panel.append(el("p", { class: "hint locked-note" },
        "Locked prefill from the user's constraints: " +
          JSON.stringify(active.constraints)));
    }
    panel.append(renderResults(active, state, rerender));
  } else {
    panel.append(el("p", { class: "hint" }, "No queries this turn."));
  }

  // Only entity-backed domains are queryable; traffic domains have no
  // stored rows and the server rejects them.
  const domainPick = el("select", { id: "query-domain" },
    ...Object.keys(schema.domains)
      .filter((d) => schema.domains[d]!.slots.some((s) => s.name === "name"))
      .map((d) => el("option", { value: d }, d)));
  const formHost = el("div", { id: "form-host" });
  function mountForm(): void {
    formHost.replaceChildren(
      renderQueryForm(schema, (domainPick as HTMLSelectElement).value, hooks));
  }
  domainPick.addEventListener("change", mountForm);
  mountForm();
  panel.append(el("h3", {}, "New query"), domainPick, formHost);

  if (view.user_terminated && !view.finished) {
    panel.append(el("p", { class: "hint" },
      "User has said goodbye; send a closing turn."));
  }
  panel.append(renderActEditor(state, view, hooks, rerender));
  if (view.finished) {
    panel.append(el("p", { class: "done-note" }, "Dialogue finished."));
  }
  return panel;
}
