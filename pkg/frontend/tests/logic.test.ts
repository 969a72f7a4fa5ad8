import { describe, expect, it } from "vitest";

import {
  actLabel,
  buildConstraints,
  fillInformValues,
  informPrefill,
  noOfferAct,
  noOfferEnabled,
  queryFormSlots,
  recommendPrefill,
  rowFilled,
  selectableRows,
  submitEnabled,
  toSelectionPayload,
} from "../src/logic.js";
import type { Entity, GoalRow, QueryTab, Schema } from "../src/types.js";

import schemaFixture from "./fixtures/schema.json";

const schema = schemaFixture as unknown as Schema;

function ent(domain: string, id: string, values: Record<string, unknown>): Entity {
  return { id, domain, values, nearby: {} };
}

describe("goal row helpers", () => {
  const rows: GoalRow[] = [
    [1, "hotel", "rating", "4.5", true],
    [1, "hotel", "name", "", false],
    [1, "hotel", "phone", "", false],
  ];

  it("only unexpressed rows are selectable", () => {
    expect(selectableRows(rows)).toEqual([1, 2]);
  });

  it("filled means non-blank value", () => {
    expect(rowFilled(rows[0]!)).toBe(true);
    expect(rowFilled(rows[1]!)).toBe(false);
  });

  it("submit needs a selection and a live session", () => {
    expect(submitEnabled(0, false)).toBe(false);
    expect(submitEnabled(2, false)).toBe(true);
    expect(submitEnabled(2, true)).toBe(false);
  });

  it("payload drops the expressed flag", () => {
    expect(toSelectionPayload([rows[0]!])).toEqual([
      [1, "hotel", "rating", "4.5"],
    ]);
  });
});

describe("wizard act prefills", () => {
  it("two picked entities prefill two Recommends", () => {
    const picked = [
      ent("hotel", "hotel-1", { name: "North Inn" }),
      ent("hotel", "hotel-2", { name: "South Inn" }),
    ];
    expect(recommendPrefill(picked)).toEqual([
      ["Recommend", "hotel", "name", "North Inn"],
      ["Recommend", "hotel", "name", "South Inn"],
    ]);
  });

  it("pending requests become Inform rows, valued from picked entities", () => {
    const acts = informPrefill(
      { hotel: ["phone", "address"], attraction: ["fee"] },
      [ent("hotel", "hotel-1", { phone: "010-5551", name: "North Inn" })],
    );
    expect(acts).toContainEqual(["Inform", "hotel", "phone", "010-5551"]);
    expect(acts).toContainEqual(["Inform", "hotel", "address", ""]);
    expect(acts).toContainEqual(["Inform", "attraction", "fee", ""]);
  });

  it("fillInformValues touches only blank Informs", () => {
    const out = fillInformValues(
      [
        ["Inform", "hotel", "phone", ""],
        ["Inform", "hotel", "price", "edited by hand"],
        ["Recommend", "hotel", "name", ""],
      ],
      [ent("hotel", "hotel-1", { phone: "010-5551", price: 300 })],
    );
    expect(out[0]).toEqual(["Inform", "hotel", "phone", "010-5551"]);
    expect(out[1]).toEqual(["Inform", "hotel", "price", "edited by hand"]);
    expect(out[2]).toEqual(["Recommend", "hotel", "name", ""]);
  });
});

describe("query form", () => {
  it("hotel exposes every boolean service as a toggle", () => {
    const { text, toggles } = queryFormSlots(schema, "hotel");
    expect(toggles).toHaveLength(37);
    expect(toggles).toEqual(schema.hotel_services);
    for (const service of toggles) {
      expect(text).not.toContain(service);
    }
    expect(text).toContain("rating");
  });

  it("non-hotel domains have no toggles", () => {
    const { text, toggles } = queryFormSlots(schema, "attraction");
    expect(toggles).toEqual([]);
    expect(text).toContain("fee");
  });

  it("constraints keep non-blank text and on toggles only", () => {
    const pairs = buildConstraints(
      { rating: " 4.5 ", price: "" },
      { sauna: true, gym: false },
    );
    expect(pairs).toEqual([
      ["rating", "4.5"],
      ["sauna", "yes"],
    ]);
  });
});

describe("NoOffer", () => {
  const emptyTab: QueryTab = {
    domain: "hotel", locked: false, constraints: {}, near: null,
    relaxed: false, result_ids: [], result_count: 0, results: [],
  };

  it("enabled only on an empty tab", () => {
    expect(noOfferEnabled(emptyTab)).toBe(true);
    expect(noOfferEnabled({ ...emptyTab, result_count: 3 })).toBe(false);
    expect(noOfferEnabled(undefined)).toBe(false);
  });

  it("act row is schema shaped", () => {
    expect(noOfferAct("hotel")).toEqual(["NoOffer", "hotel", "none", "none"]);
  });
});

describe("act labels", () => {
  it("general and slotted acts read differently", () => {
    expect(actLabel(["General", "thank", "none", "none"])).toBe("General/thank");
    expect(actLabel(["Request", "hotel", "phone", ""])).toBe(
      "Request hotel.phone = ?",
    );
  });
});
