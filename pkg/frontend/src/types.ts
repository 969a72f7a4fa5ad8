/**
 * JSON shapes exchanged with the session service.
 *
 * These mirror the server responses exactly; the console never invents
 * state of its own, so every field here is server-authored.
 */

/** [subgoal_id, domain, slot, value, expressed] */
export type GoalRow = [number, string, string, string, boolean];

/** GoalRow without the expressed flag, as posted back in a user turn. */
export type SelectionRow = [number, string, string, string];

/** [intent, domain, slot, value] */
export type ActRow = [string, string, string, string];

export interface Turn {
  role: "user" | "sys";
  acts: ActRow[];
  utterance: string | null;
  user_state: GoalRow[] | null;
  selected: GoalRow[] | null;
  sys_state: Record<string, unknown> | null;
}

export interface Entity {
  id: string;
  domain: string;
  values: Record<string, unknown>;
  nearby: Record<string, string[]>;
}

export interface QueryTab {
  domain: string;
  locked: boolean;
  constraints: Record<string, string>;
  near: string | null;
  relaxed: boolean;
  result_ids: string[];
  result_count: number;
  results: Entity[];
}

export interface WizardState {
  constraints: Record<string, Record<string, string>>;
  near: Record<string, string | null>;
  selected: Record<string, string>;
  pending: Record<string, string[]>;
  touched: string[];
  traffic: Record<string, Record<string, string>>;
  clarify: string[];
  general: string[];
}

export interface SessionView {
  version: string;
  session_id: string;
  role: "user" | "wizard";
  finished: boolean;
  transcript: Turn[];
  goal?: {
    goal_type: string;
    description: string;
    rows: GoalRow[];
  };
  user_terminated?: boolean;
  state?: WizardState;
  queries?: QueryTab[];
}

export interface TurnResponse extends SessionView {
  new_turns: Turn[];
}

export interface SlotDef {
  name: string;
  kind: string;
  informable: boolean;
  requestable: boolean;
}

export interface Schema {
  version: string;
  domains: Record<string, { slots: SlotDef[] }>;
  intents: string[];
  goal_types: string[];
  general_subtypes: string[];
  hotel_services: string[];
}

export interface QueryResponse {
  version: string;
  tab: QueryTab;
  n_tabs: number;
}
