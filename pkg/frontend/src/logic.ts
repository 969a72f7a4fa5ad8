/**
 * Pure view logic: what is selectable, what gets prefilled, when buttons
 * enable. Kept DOM-free so it can be tested directly.
 */

import type { ActRow, Entity, GoalRow, QueryTab, Schema, SelectionRow } from "./types.js";

/** Rows the user may still voice: not yet expressed. */
export function selectableRows(rows: GoalRow[]): number[] {
  const out: number[] = [];
  rows.forEach((row, i) => {
    if (!row[4]) out.push(i);
  });
  return out;
}

/** A row reads as filled once its value is non-blank. */
export function rowFilled(row: GoalRow): boolean {
  return row[3] !== "";
}

export function submitEnabled(selectedCount: number, finished: boolean): boolean {
  return !finished && selectedCount > 0;
}

/** Strip the expressed flag for the turn payload. */
export function toSelectionPayload(rows: GoalRow[]): SelectionRow[] {
  return rows.map((r) => [r[0], r[1], r[2], r[3]]);
}

/**
 * Picking entities in a result tab prefills one Recommend per entity,
 * matching what the rule agent would utter for its top hits.
 */
export function recommendPrefill(entities: Entity[]): ActRow[] {
  return entities.map((e) => [
    "Recommend",
    e.domain,
    "name",
    String(e.values["name"] ?? ""),
  ]);
}

/**
 * Pending requests become editable Inform rows. When a picked entity of the
 * same domain knows the slot, its value is offered as the starting point.
 */
export function informPrefill(
  pending: Record<string, string[]>,
  picked: Entity[],
): ActRow[] {
  const byDomain = new Map<string, Entity>();
  for (const e of picked) {
    if (!byDomain.has(e.domain)) byDomain.set(e.domain, e);
  }
  const out: ActRow[] = [];
  for (const [domain, slots] of Object.entries(pending)) {
    const src = byDomain.get(domain);
    for (const slot of slots) {
      const v = src?.values[slot];
      out.push(["Inform", domain, slot, v === undefined || v === null ? "" : String(v)]);
    }
  }
  return out;
}

/**
 * Fill blank Inform values from picked entities of the same domain.
 * Human edits are never overwritten; only empty values are touched.
 */
export function fillInformValues(acts: ActRow[], picked: Entity[]): ActRow[] {
  const byDomain = new Map<string, Entity>();
  for (const e of picked) {
    if (!byDomain.has(e.domain)) byDomain.set(e.domain, e);
  }
  return acts.map((a) => {
    const [intent, domain, slot, value] = a;
    if (intent !== "Inform" || value !== "") return a;
    const v = byDomain.get(domain)?.values[slot];
    if (v === undefined || v === null) return a;
    return [intent, domain, slot, String(v)];
  });
}

/** NoOffer only makes sense against an empty result tab. */
export function noOfferEnabled(tab: QueryTab | undefined): boolean {
  return tab !== undefined && tab.result_count === 0;
}

export function noOfferAct(domain: string): ActRow {
  return ["NoOffer", domain, "none", "none"];
}

/**
 * Informable slots for the query form. Hotel additionally exposes every
 * boolean service as its own toggle; those come from the schema's
 * hotel_services list, not the slot table.
 */
export function queryFormSlots(schema: Schema, domain: string): {
  text: string[];
  toggles: string[];
} {
  const dom = schema.domains[domain];
  if (!dom) return { text: [], toggles: [] };
  const services = new Set(domain === "hotel" ? schema.hotel_services : []);
  const text = dom.slots
    .filter((s) => s.informable && !services.has(s.name))
    .map((s) => s.name);
  return { text, toggles: domain === "hotel" ? [...schema.hotel_services] : [] };
}

/** Form values to [slot, value] pairs, dropping blanks and off toggles. */
export function buildConstraints(
  text: Record<string, string>,
  toggles: Record<string, boolean>,
): [string, string][] {
  const pairs: [string, string][] = [];
  for (const [slot, value] of Object.entries(text)) {
    const v = value.trim();
    if (v !== "") pairs.push([slot, v]);
  }
  for (const [slot, on] of Object.entries(toggles)) {
    if (on) pairs.push([slot, "yes"]);
  }
  return pairs;
}

/** One-line label for an act row in the transcript and the act editor. */
export function actLabel(act: ActRow): string {
  const [intent, domain, slot, value] = act;
  if (intent === "General") return `General/${domain}`;
  const v = value === "" ? "?" : value;
  return `${intent} ${domain}.${slot} = ${v}`;
}
