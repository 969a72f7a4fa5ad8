// Wizard panel rendered straight from a captured session snapshot: tab
// locking, the hotel service toggles, entity picks driving Recommend
// prefills, and the NoOffer gate.

import { beforeEach, describe, expect, it } from "vitest";

import {
  freshPanelState,
  renderWizardPanel,
  type WizardPanelState,
} from "../src/wizardPanel.js";
import type { ActRow, Schema, SessionView } from "../src/types.js";

import schemaFixture from "./fixtures/schema.json";
import wizardFixture from "./fixtures/wizard_session.json";

const schema = schemaFixture as unknown as Schema;

interface Submitted {
  acts: ActRow[];
  entities: Record<string, string>;
}

let view: SessionView;
let state: WizardPanelState;
let queries: unknown[];
let submitted: Submitted[];
let host: HTMLElement;

function render(): void {
  const panel = renderWizardPanel(
    view,
    schema,
    state,
    {
      onQuery: (domain, constraints, near) =>
        queries.push({ domain, constraints, near }),
      onSubmit: (acts, entities) => submitted.push({ acts, entities }),
    },
    render,
  );
  host.replaceChildren(panel);
}

function q<T extends Element>(sel: string): T {
  const node = host.querySelector(sel);
  if (!node) throw new Error(`missing ${sel}`);
  return node as T;
}

beforeEach(() => {
  view = JSON.parse(JSON.stringify(wizardFixture)) as SessionView;
  state = freshPanelState();
  queries = [];
  submitted = [];
  document.body.innerHTML = '<div id="host"></div>';
  host = document.getElementById("host")!;
  render();
});

describe("query tabs", () => {
  it("marks the server prefill tab as locked with its result count", () => {
    const tabs = [...host.querySelectorAll("#tab-bar .tab")];
    expect(tabs.length).toBe(1);
    expect(tabs[0]!.textContent).toBe("hotel (locked) [9]");
    expect(host.querySelector(".locked-note")!.textContent).toContain("rating");
  });

  it("lists all nine prefill results in the table", () => {
    // header + 9 entities
    expect(host.querySelectorAll("#result-table tr").length).toBe(10);
  });
});

describe("query form", () => {
  it("offers only entity-backed domains", () => {
    const options = [...q<HTMLSelectElement>("#query-domain").options].map(
      (o) => o.value,
    );
    expect(options).toEqual(["attraction", "restaurant", "hotel"]);
  });

  it("shows all 37 hotel service toggles when the hotel domain is picked", () => {
    const pick = q<HTMLSelectElement>("#query-domain");
    pick.value = "hotel";
    pick.dispatchEvent(new Event("change"));
    const toggles = host.querySelectorAll("#query-form .service-toggle");
    expect(toggles.length).toBe(37);
    expect(toggles.length).toBe(schema.hotel_services.length);
  });

  it("shows no service toggles for attraction", () => {
    const pick = q<HTMLSelectElement>("#query-domain");
    pick.value = "attraction";
    pick.dispatchEvent(new Event("change"));
    expect(host.querySelectorAll("#query-form .service-toggle").length).toBe(0);
  });

  it("sends typed constraints and checked services as one query", () => {
    const pick = q<HTMLSelectElement>("#query-domain");
    pick.value = "hotel";
    pick.dispatchEvent(new Event("change"));
    const rating = host.querySelector<HTMLInputElement>(
      '#query-form input[data-slot="rating"]',
    )!;
    rating.value = "4.5";
    const sauna = host.querySelector<HTMLInputElement>(
      '#query-form input[data-service="sauna"]',
    )!;
    sauna.checked = true;
    q<HTMLButtonElement>("#run-query").click();
    expect(queries).toEqual([
      {
        domain: "hotel",
        constraints: [
          ["rating", "4.5"],
          ["sauna", "yes"],
        ],
        near: null,
      },
    ]);
  });
});

describe("entity picks", () => {
  it("prefills one Recommend act per picked entity", () => {
    const picks = host.querySelectorAll<HTMLInputElement>(".entity-pick");
    picks[0]!.checked = true;
    picks[0]!.dispatchEvent(new Event("change"));
    picks[1]!.checked = true;
    picks[1]!.dispatchEvent(new Event("change"));

    const recommends = state.actRows.filter((a) => a[0] === "Recommend");
    expect(recommends.length).toBe(2);
    expect(recommends[0]![1]).toBe("hotel");
    expect(recommends[0]![2]).toBe("name");
    expect(recommends[0]![3]).not.toBe("");
    const items = host.querySelectorAll("#act-editor .act-list li");
    expect(items.length).toBe(2);
  });

  it("unpicking an entity withdraws its Recommend", () => {
    const picks = host.querySelectorAll<HTMLInputElement>(".entity-pick");
    picks[0]!.checked = true;
    picks[0]!.dispatchEvent(new Event("change"));
    const again = host.querySelectorAll<HTMLInputElement>(".entity-pick")[0]!;
    again.checked = false;
    again.dispatchEvent(new Event("change"));
    expect(state.actRows.filter((a) => a[0] === "Recommend").length).toBe(0);
  });
});

describe("act editor", () => {
  it("disables send with no acts and enables it once one exists", () => {
    expect(q<HTMLButtonElement>("#send-acts").disabled).toBe(true);
    q<HTMLInputElement>("#act-domain").value = "hotel";
    q<HTMLInputElement>("#act-slot").value = "phone";
    q<HTMLInputElement>("#act-value").value = "010-1234";
    q<HTMLButtonElement>("#add-act").click();
    expect(q<HTMLButtonElement>("#send-acts").disabled).toBe(false);
  });

  it("submits the edited acts along with picked entity ids", () => {
    const picks = host.querySelectorAll<HTMLInputElement>(".entity-pick");
    picks[0]!.checked = true;
    picks[0]!.dispatchEvent(new Event("change"));
    q<HTMLButtonElement>("#send-acts").click();
    expect(submitted.length).toBe(1);
    expect(submitted[0]!.acts[0]![0]).toBe("Recommend");
    expect(submitted[0]!.entities).toEqual({ hotel: "hotel-0008" });
  });

  it("keeps NoOffer disabled while the active tab has results", () => {
    expect(q<HTMLButtonElement>("#nooffer-btn").disabled).toBe(true);
  });

  it("enables NoOffer on an empty tab and queues the act", () => {
    view.queries!.push({
      domain: "restaurant",
      locked: false,
      constraints: [["name", "no such place"]],
      near: null,
      relaxed: [],
      result_ids: [],
      result_count: 0,
      results: [],
    });
    state.activeTab = 1;
    render();
    const btn = q<HTMLButtonElement>("#nooffer-btn");
    expect(btn.disabled).toBe(false);
    btn.click();
    expect(state.actRows).toContainEqual([
      "NoOffer",
      "restaurant",
      "none",
      "none",
    ]);
  });
});

describe("pending requests", () => {
  it("seeds the act editor from the user's pending slots once per turn", () => {
    view.state!.pending = { hotel: ["phone", "address"] };
    state = freshPanelState();
    render();
    const informs = state.actRows.filter((a) => a[0] === "Inform");
    expect(informs.map((a) => a[2]).sort()).toEqual(["address", "phone"]);
    // A rerender within the same turn must not duplicate the prefill.
    render();
    expect(state.actRows.filter((a) => a[0] === "Inform").length).toBe(2);
  });
});
