"""Rule-based wizard: state tracking, database search, and response policy.

The wizard keeps one cumulative constraint dict per domain, built only from
what the user actually said; relaxation never writes back into it. Every
system turn re-runs the touched domains' searches, recording each executed
query, so a turn that needed relaxation carries the whole query ladder in its
state snapshot. Act composition is a pure function of database plus snapshot,
which is what makes exact re-annotation of logged dialogues possible.
"""

from __future__ import annotations

import copy
import random
import string
from dataclasses import dataclass, field

from . import acts as A
from . import database as dbm
from . import schema
from . import values as V

MAX_RECOMMEND = 3
RESULT_ID_CAP = 12


class DSTError(ValueError):
    pass


@dataclass
class Query:
    """One executed search: what was asked and what came back."""
    constraints: dict[str, str]
    near: str | None = None
    relaxed: dict[str, str | None] = field(default_factory=dict)
    result_ids: list[str] = field(default_factory=list)
    result_count: int = 0

    def to_dict(self) -> dict:
        return {
            "constraints": dict(self.constraints),
            "near": self.near,
            "relaxed": dict(self.relaxed),
            "result_ids": list(self.result_ids),
            "result_count": self.result_count,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Query":
        return cls(constraints=dict(data["constraints"]), near=data.get("near"),
                   relaxed=dict(data.get("relaxed", {})),
                   result_ids=list(data.get("result_ids", [])),
                   result_count=data.get("result_count", 0))


@dataclass
class SystemState:
    """Cumulative dialogue state plus the current turn's working set."""
    constraints: dict[str, dict[str, str]] = field(default_factory=dict)
    near: dict[str, str] = field(default_factory=dict)
    selected: dict[str, str] = field(default_factory=dict)
    traffic: dict[str, dict[str, str]] = field(default_factory=dict)
    turn: int = 0
    warnings: int = 0
    # Per-turn working set, reset by rule_dst_update.
    touched: list[str] = field(default_factory=list)
    queries: dict[str, list[Query]] = field(default_factory=dict)
    relaxed: dict[str, dict[str, str | None]] = field(default_factory=dict)
    pending: dict[str, list[str]] = field(default_factory=dict)
    general: list[str] = field(default_factory=list)
    clarify: list[str] = field(default_factory=list)

    def active_domain(self) -> str | None:
        return self.touched[-1] if self.touched else None

    def snapshot(self) -> dict:
        return copy.deepcopy({
            "turn": self.turn,
            "constraints": self.constraints,
            "near": self.near,
            "selected": self.selected,
            "traffic": self.traffic,
            "touched": self.touched,
            "queries": {d: [q.to_dict() for q in qs]
                        for d, qs in self.queries.items()},
            "relaxed": self.relaxed,
            "pending": self.pending,
            "general": self.general,
            "clarify": self.clarify,
        })

    @classmethod
    def from_snapshot(cls, snap: dict) -> "SystemState":
        state = cls(
            constraints={d: dict(c) for d, c in snap["constraints"].items()},
            near=dict(snap["near"]), selected=dict(snap["selected"]),
            traffic={d: dict(v) for d, v in snap["traffic"].items()},
            turn=snap["turn"], touched=list(snap["touched"]),
            relaxed={d: dict(v) for d, v in snap["relaxed"].items()},
            pending={d: list(v) for d, v in snap["pending"].items()},
            general=list(snap["general"]), clarify=list(snap["clarify"]))
        state.queries = {d: [Query.from_dict(q) for q in qs]
                         for d, qs in snap["queries"].items()}
        return state


def _normalize(user_acts) -> list[A.DialogueAct]:
    return [a if isinstance(a, A.DialogueAct) else A.DialogueAct.from_list(a)
            for a in user_acts]


def rule_dst_update(state: SystemState, user_acts) -> None:
    """Fold one user turn into the state.

    Selects open a fresh query for their domain: the accumulated constraints
    are discarded and the nearby anchor pinned to the currently selected
    entity of the referenced domain. Informs overwrite (latest wins) and
    Requests queue slots to answer. Selects are applied before the turn's
    other acts so constraints voiced alongside one land in the fresh query.
    Unknown domains or slots raise DSTError.
    """
    state.turn += 1
    state.touched = []
    state.queries = {}
    state.relaxed = {}
    state.pending = {}
    state.general = []
    state.clarify = []

    def touch(domain: str) -> None:
        if domain not in state.touched:
            state.touched.append(domain)

    acts = _normalize(user_acts)
    for act in acts:
        if act.intent != A.SELECT:
            continue
        if act.domain not in schema.DOMAINS:
            raise DSTError(f"unknown domain {act.domain!r}")
        src = act.value
        if src not in schema.VENUE_DOMAINS:
            raise DSTError(f"select references unknown domain {src!r}")
        touch(act.domain)
        state.constraints.pop(act.domain, None)
        anchor = state.selected.get(src)
        if anchor is None:
            # Nothing selected yet in the referenced domain: ask for it
            # instead of crashing.
            if src not in state.clarify:
                state.clarify.append(src)
        else:
            state.near[act.domain] = anchor

    for act in acts:
        if act.intent in (A.GENERAL, A.SELECT):
            if act.intent == A.GENERAL:
                state.general.append(act.domain)
            continue
        if act.intent in (A.NOOFFER, A.RECOMMEND):
            state.warnings += 1
            continue
        if act.domain not in schema.DOMAINS:
            raise DSTError(f"unknown domain {act.domain!r}")
        if not schema.has_slot(act.domain, act.slot):
            raise DSTError(f"unknown slot {act.slot!r} for domain {act.domain!r}")
        if act.intent == A.INFORM:
            touch(act.domain)
            state.constraints.setdefault(act.domain, {})[act.slot] = act.value
        elif act.intent == A.REQUEST:
            touch(act.domain)
            slots = state.pending.setdefault(act.domain, [])
            if act.slot not in slots:
                slots.append(act.slot)
        else:
            raise DSTError(f"unknown intent {act.intent!r}")


# ---------------------------------------------------------------------------
# Search with relaxation.

def _query_constraints(domain: str, cons: dict[str, str], near: str | None):
    out = [dbm.constraint_for(domain, slot, value) for slot, value in cons.items()]
    if near is not None:
        out.append(dbm.Constraint("name", dbm.NEARBY_OF, near))
    return out


def _next_relaxation(db, domain: str, cons: dict[str, str],
                     base: dict[str, str]) -> tuple[str, str | None] | None:
    """The next (slot, new value or None) sacrifice, or None when exhausted.

    Priority: drop a service, loosen a numeric cap or floor by one grid step
    (dropping it once the grid is exhausted), drop a list constraint, drop a
    scalar one. The name and the nearby anchor are never relaxed.
    """
    order = {schema.BOOLEAN_SERVICE: 0, schema.NUMERIC: 1,
             schema.MULTI_VALUE: 2, schema.SCALAR_TEXT: 3}
    candidates = []
    for slot in cons:
        if slot == "name":
            continue
        spec = schema.slot_spec(domain, slot)
        rank = order.get(spec.kind)
        if rank is not None:
            candidates.append((rank, slot, spec))
    if not candidates:
        return None
    candidates.sort(key=lambda c: (c[0], list(cons).index(c[1])))
    rank, slot, spec = candidates[0]
    if spec.kind == schema.NUMERIC:
        loosened = dbm.loosen(db, domain, slot, cons[slot])
        if loosened is not None:
            return slot, V.to_act_value(loosened)
    return slot, None


def search_with_relaxation(db: dbm.Database, domain: str,
                           constraints: dict[str, str],
                           near: str | None) -> list[Query]:
    """Run the user's query, then progressively weaker ones until non-empty.

    Returns every executed query in order; the last one holds the results
    that the policy answers from. The `relaxed` map of each query is the
    difference from the user's own constraint set.
    """
    base = dict(constraints)
    cons = dict(constraints)
    relaxed: dict[str, str | None] = {}
    queries: list[Query] = []
    while True:
        results = dbm.query(db, domain, _query_constraints(domain, cons, near))
        ids = [e.id for e in results]
        queries.append(Query(
            constraints=dict(cons), near=near, relaxed=dict(relaxed),
            result_ids=ids[:RESULT_ID_CAP], result_count=len(ids)))
        if ids:
            return queries
        step = _next_relaxation(db, domain, cons, base)
        if step is None:
            return queries
        slot, new_value = step
        relaxed[slot] = new_value
        if new_value is None:
            del cons[slot]
        else:
            cons[slot] = new_value


# ---------------------------------------------------------------------------
# Act composition: a pure function of database and state working set.

def _relax_inform_value(db: dbm.Database, entity: dbm.Entity, slot: str) -> str:
    spec = schema.slot_spec(entity.domain, slot)
    if spec.kind == schema.MULTI_VALUE:
        vals = entity.values.get(slot) or []
        return V.to_act_value(vals[0]) if vals else "none"
    return dbm.value_of(db, entity, slot)


def compose_acts(db: dbm.Database, state: SystemState) -> list[A.DialogueAct]:
    """Build the system acts for the current turn from the state alone."""
    if "bye" in state.general:
        return [A.general("welcome"), A.general("bye")]
    acts: list[A.DialogueAct] = []
    for domain in state.touched:
        queries = state.queries.get(domain, [])
        pending = state.pending.get(domain, [])
        if domain in schema.TRAFFIC_DOMAINS:
            cache = state.traffic.get(domain, {})
            cons = state.constraints.get(domain, {})
            missing = [s for s in ("from", "to") if s not in cons]
            if missing:
                acts.extend(A.request(domain, s) for s in missing)
                continue
            if cache:
                slots = pending or schema.requestable_slots(domain)
                acts.extend(A.inform(domain, s, cache[s])
                            for s in slots if s in cache)
            continue
        if not queries:
            continue
        final = queries[-1]
        if final.result_count == 0:
            acts.append(A.nooffer(domain))
            continue
        entity = db.entity(final.result_ids[0])
        for slot in state.relaxed.get(domain, {}):
            acts.append(A.inform(domain, slot, _relax_inform_value(db, entity, slot)))
        informed_name = False
        for slot in pending:
            if slot == "name":
                if final.result_count > 1:
                    acts.extend(A.recommend(domain, db.entity(i).values["name"])
                                for i in final.result_ids[:MAX_RECOMMEND])
                else:
                    acts.append(A.inform(domain, "name", entity.values["name"]))
                informed_name = True
            else:
                acts.append(A.inform(domain, slot, dbm.value_of(db, entity, slot)))
        if not pending and not informed_name:
            # The user only stated constraints: put names on the table.
            if "name" in state.constraints.get(domain, {}):
                acts.append(A.inform(domain, "name", entity.values["name"]))
            elif final.result_count > 1:
                acts.extend(A.recommend(domain, db.entity(i).values["name"])
                            for i in final.result_ids[:MAX_RECOMMEND])
            else:
                acts.append(A.inform(domain, "name", entity.values["name"]))
    for src in state.clarify:
        acts.append(A.request(src, "name"))
    if "thank" in state.general:
        acts.append(A.general("welcome"))
    if not acts:
        acts.append(A.general("welcome"))
    return acts


# ---------------------------------------------------------------------------
# Wizards.

_PLATE_LETTERS = string.ascii_uppercase.replace("I", "").replace("O", "")


def _entity_by_name(db: dbm.Database, name: str) -> dbm.Entity | None:
    for domain in schema.VENUE_DOMAINS:
        e = db.find_by_name(domain, name)
        if e is not None:
            return e
    return None


class RuleWizard:
    """Database-backed wizard: DST update, search with relaxation, respond."""

    def __init__(self, db: dbm.Database, seed: int = 0):
        self.db = db
        self.rng = random.Random(seed)

    def new_state(self) -> SystemState:
        return SystemState()

    def update(self, state: SystemState, user_acts) -> None:
        rule_dst_update(state, user_acts)

    def respond(self, state: SystemState, user_acts,
                update: bool = True) -> tuple[list[A.DialogueAct], dict]:
        """Advance one system turn; returns (acts, state snapshot)."""
        if update:
            self.update(state, user_acts)
        for domain in state.touched:
            if domain in schema.VENUE_DOMAINS:
                self._search(state, domain)
            else:
                self._prepare_traffic(state, domain)
        snap = state.snapshot()
        return compose_acts(self.db, state), snap

    def _search(self, state: SystemState, domain: str) -> None:
        queries = search_with_relaxation(
            self.db, domain, state.constraints.get(domain, {}),
            state.near.get(domain))
        state.queries[domain] = queries
        final = queries[-1]
        state.relaxed[domain] = dict(final.relaxed)
        if final.result_ids:
            state.selected[domain] = final.result_ids[0]

    def _prepare_traffic(self, state: SystemState, domain: str) -> None:
        cons = state.constraints.get(domain, {})
        state.queries[domain] = [Query(constraints=dict(cons), result_count=1)]
        if "from" not in cons or "to" not in cons:
            return
        if domain == "taxi":
            if domain not in state.traffic:
                state.traffic[domain] = {
                    "car type": self.rng.choice(V.CAR_TYPES),
                    "plate number": "%s%s-%04d%s" % (
                        self.rng.choice(_PLATE_LETTERS),
                        self.rng.choice(_PLATE_LETTERS),
                        self.rng.randrange(10_000),
                        self.rng.choice(_PLATE_LETTERS)),
                }
            return
        stations = {}
        for slot, key in (("from station", "from"), ("to station", "to")):
            e = _entity_by_name(self.db, cons[key])
            stations[slot] = (dbm.nearest_station(self.db, e.id)
                              if e is not None else "none")
            if e is None:
                state.warnings += 1
        state.traffic[domain] = stations


class OracleWizard(RuleWizard):
    """A wizard that answers from the goal's hidden witnesses.

    Search is replaced by looking up the witness of the sub-goal under
    discussion, so constraints are satisfied by construction and the policy
    never answers NoOffer. Everything else (state, snapshots, act
    composition) is shared with RuleWizard.
    """

    def __init__(self, db: dbm.Database, goal, seed: int = 0):
        super().__init__(db, seed)
        self.goal = goal
        self.answered: dict[int, set[str]] = {sg.id: set() for sg in goal.subgoals}

    def _subgoal_for(self, state: SystemState, domain: str):
        sgs = [sg for sg in self.goal.subgoals if sg.domain == domain]
        if not sgs:
            return None
        pending = state.pending.get(domain, [])
        for sg in sgs:
            blanks = {t.slot for t in sg.tuples if t.is_blank()}
            hot = [s for s in pending if s in blanks and s not in self.answered[sg.id]]
            if hot:
                return sg
        for sg in sgs:
            blanks = {t.slot for t in sg.tuples if t.is_blank()}
            if blanks - self.answered[sg.id]:
                return sg
        return sgs[-1]

    def _search(self, state: SystemState, domain: str) -> None:
        sg = self._subgoal_for(state, domain)
        cons = state.constraints.get(domain, {})
        near = state.near.get(domain)
        if sg is None or sg.witness_id is None:
            super()._search(state, domain)
            return
        state.queries[domain] = [Query(
            constraints=dict(cons), near=near,
            result_ids=[sg.witness_id], result_count=1)]
        state.relaxed[domain] = {}
        state.selected[domain] = sg.witness_id
        pending = state.pending.get(domain, [])
        for slot in pending:
            self.answered[sg.id].add(slot)
        if not pending:
            # Composition will volunteer the name when nothing was asked.
            self.answered[sg.id].add("name")
