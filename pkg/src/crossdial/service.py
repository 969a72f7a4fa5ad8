"""HTTP session service: a human plays one side of a live dialogue.

The counterpart is always the rule agent. A human *user* expresses semantic
tuples from a generated goal and the rule wizard answers; a human *wizard*
reads simulated user turns, searches the database, selects entities and
submits dialogue acts. The server owns all dialogue state; clients re-fetch
after every call and never mutate state locally.

Endpoints (JSON over HTTP; every response carries the payload version):

    POST /sessions                open a session {role, seed?, goal_type?, goal?}
    GET  /sessions/{id}/state     role-visible view plus full transcript
    POST /sessions/{id}/query     wizard only: run one database search tab
    POST /sessions/{id}/turn      submit the human side of the next turn
    GET  /sessions/{id}/export    corpus document holding the session record
    GET  /schema                  domain/slot/intent vocabulary for form building

Turn payloads: a human user posts {"selected": [[subgoal, domain, slot,
value], ...]} (empty list closes the dialogue); a human wizard posts
{"acts": [[intent, domain, slot, value], ...], "entities": {domain: id}}.
"""

from __future__ import annotations

import random
import threading
import uuid

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import acts as A
from . import annotation
from . import corpus as C
from . import database as dbm
from . import goals as G
from . import nlg
from . import schema
from . import user as U
from . import wizard as W
from .harness import sample_goals_by_type

ROLES = ("user", "wizard")


class OpenSessionRequest(BaseModel):
    role: str
    seed: int = 0
    goal_type: str | None = None
    goal: dict | None = None


class TurnRequest(BaseModel):
    selected: list[list] | None = None      # human-as-user tuple rows
    acts: list[list] | None = None          # human-as-wizard act rows
    entities: dict[str, str] | None = None  # human-as-wizard selections


class QueryRequest(BaseModel):
    domain: str
    constraints: list[list] = []
    near: str | None = None


def _bad(detail: str) -> HTTPException:
    return HTTPException(status_code=400, detail=detail)


class LiveSession:
    """One dialogue with a human on the `role` side and agents on the other."""

    def __init__(self, db: dbm.Database, role: str, goal: G.UserGoal,
                 seed: int = 0):
        self.id = uuid.uuid4().hex
        self.db = db
        self.role = role
        self.goal = goal
        self.seed = seed
        self.lock = threading.Lock()
        self.turns: list[C.Turn] = []
        self.finished = False
        self.user_terminated = False
        self.tabs: list[dict] = []
        self.store = nlg.seed_store()
        self.rng = random.Random(seed * 4 + 3)
        self.sim = U.UserSimulator(db, seed=seed * 4 + 1)
        self.ustate = self.sim.init_state(goal)
        self.wiz = W.RuleWizard(db, seed=seed * 4 + 2)
        self.wstate = self.wiz.new_state()
        if role == "wizard":
            self._advance_user()

    # -- rendering ---------------------------------------------------------

    def _render(self, acts, speaker: str) -> str:
        # Live transcripts must survive any well-formed act combination.
        try:
            return nlg.generate(acts, speaker, self.store, self.rng)
        except nlg.NLGError:
            return " ".join(str(a.as_list()) for a in acts)

    # -- human plays the user ---------------------------------------------

    def _pick_tuples(self, rows) -> list[G.SemanticTuple]:
        chosen: list[G.SemanticTuple] = []
        for row in rows:
            if not isinstance(row, (list, tuple)) or len(row) < 3:
                raise _bad(f"malformed tuple selection {row!r}")
            # Selections address the live dialogue state, not the frozen goal.
            sg = next((sg for sg in self.ustate.subgoals
                       if sg.id == row[0]), None)
            if sg is None:
                raise _bad(f"unknown sub-goal in selection {row!r}")
            t = next((t for t in sg.tuples if t.slot == row[2]), None)
            if t is None or sg.domain != row[1]:
                raise _bad(f"selection {row!r} matches no goal tuple")
            if t not in chosen:
                chosen.append(t)
        return chosen

    def user_turn(self, rows) -> None:
        if rows is None:
            raise _bad("human-as-user turns need a 'selected' list")
        self.ustate.turn += 1
        if not rows:
            acts = [A.general("thank"), A.general("bye")]
            selected: list = []
        else:
            chosen = self._pick_tuples(rows)
            self.sim._resolve_entity_refs(self.ustate, chosen)
            for t in chosen:
                t.expressed = True
            acts = annotation.derive_user_das(
                chosen, self.ustate.domain_of_subgoal())
            selected = [t.as_row() for t in chosen]
        self.turns.append(C.Turn(
            role="user", acts=acts, utterance=self._render(acts, "user"),
            user_state=self.ustate.rows(), selected=selected))
        sys_acts, snap = self.wiz.respond(self.wstate, acts)
        self.turns.append(C.Turn(
            role="sys", acts=sys_acts, utterance=self._render(sys_acts, "sys"),
            sys_state=snap))
        if not rows:
            self.finished = True
            return
        # NoOffer stays visible in the transcript, but adapting the goal is
        # the human's call, so it must not trigger the simulator compromise.
        self.sim.receive(self.ustate,
                         [a for a in sys_acts if a.intent != A.NOOFFER])

    # -- human plays the wizard -------------------------------------------

    def _advance_user(self) -> None:
        out = self.sim.respond(self.ustate)
        self.turns.append(C.Turn(
            role="user", acts=out.acts,
            utterance=self._render(out.acts, "user"),
            user_state=self.ustate.rows(), selected=out.selected))
        if out.terminated:
            self.user_terminated = True
            return
        W.rule_dst_update(self.wstate, out.acts)
        self.tabs = []
        for domain in self.wstate.touched:
            if domain in schema.VENUE_DOMAINS:
                cons = dict(self.wstate.constraints.get(domain, {}))
                self.run_query(domain, cons, self.wstate.near.get(domain),
                               locked=True)
            else:
                self.wiz._prepare_traffic(self.wstate, domain)

    def run_query(self, domain: str, constraints: dict, near: str | None,
                  locked: bool = False) -> dict:
        if domain not in schema.VENUE_DOMAINS:
            raise _bad(f"no searchable database for domain {domain!r}")
        try:
            cons = W._query_constraints(domain, constraints, near)
            hits = dbm.query(self.db, domain, cons)
        except (dbm.QueryError, KeyError) as e:
            raise _bad(f"bad query: {e}") from None
        q = W.Query(constraints=dict(constraints), near=near,
                    result_ids=[e.id for e in hits], result_count=len(hits))
        self.wstate.queries.setdefault(domain, []).append(q)
        tab = {"domain": domain, "locked": locked, **q.to_dict(),
               "results": [self.db.entity(i).to_dict() for i in q.result_ids]}
        self.tabs.append(tab)
        return tab

    def wizard_turn(self, act_rows, entities) -> None:
        if act_rows is None:
            raise _bad("human-as-wizard turns need an 'acts' list")
        try:
            acts = [A.DialogueAct.from_list(r) for r in act_rows]
        except (ValueError, TypeError, IndexError) as e:
            raise _bad(f"malformed act: {e}") from None
        for domain, eid in (entities or {}).items():
            try:
                ent = self.db.entity(eid)
            except KeyError:
                raise _bad(f"unknown entity id {eid!r}") from None
            if ent.domain != domain:
                raise _bad(f"entity {eid!r} is not in domain {domain!r}")
            self.wstate.selected[domain] = eid
        snap = self.wstate.snapshot()
        self.turns.append(C.Turn(
            role="sys", acts=acts, utterance=self._render(acts, "sys"),
            sys_state=snap))
        if self.user_terminated:
            self.finished = True
            return
        self.sim.receive(self.ustate, acts)
        self._advance_user()

    # -- views ---------------------------------------------------------------

    def view(self) -> dict:
        base = {
            "version": schema.API_VERSION,
            "session_id": self.id,
            "role": self.role,
            "finished": self.finished,
            "transcript": [t.to_dict() for t in self.turns],
        }
        if self.role == "user":
            base["goal"] = {
                "goal_type": self.goal.goal_type,
                "description": self.goal.description,
                "rows": self.ustate.rows(),
            }
        else:
            base["user_terminated"] = self.user_terminated
            base["state"] = {
                "constraints": self.wstate.constraints,
                "near": self.wstate.near,
                "selected": self.wstate.selected,
                "pending": self.wstate.pending,
                "touched": self.wstate.touched,
                "traffic": self.wstate.traffic,
                "clarify": self.wstate.clarify,
                "general": self.wstate.general,
            }
            base["queries"] = self.tabs
        return base

    def record(self) -> C.DialogueRecord:
        meta = {
            "finished": self.finished,
            "failure": None if self.finished else "incomplete",
            "level": "live",
            "wizard": "rule" if self.role == "user" else "human",
            "user": "human" if self.role == "user" else "sim",
            "seed": self.seed,
            "n_turns": len(self.turns),
            "goal_changed": self.ustate.goal_changed,
            "change_log": list(self.ustate.change_log),
            "user_warnings": self.ustate.warnings,
            "sys_warnings": self.wstate.warnings,
        }
        return C.DialogueRecord(id=f"live-{self.id}", goal=self.goal,
                                goal_type=self.goal.goal_type,
                                turns=list(self.turns), metadata=meta)


def _make_goal(db: dbm.Database, req: OpenSessionRequest) -> G.UserGoal:
    if req.goal is not None:
        try:
            return G.UserGoal.from_dict(req.goal)
        except (KeyError, ValueError, TypeError) as e:
            raise _bad(f"bad goal payload: {e}") from None
    if req.goal_type is not None:
        if req.goal_type not in G.GOAL_TYPES:
            raise _bad(f"unknown goal type {req.goal_type!r}")
        buckets = sample_goals_by_type(db, 1, seed=req.seed,
                                       types=(req.goal_type,))
        return buckets[req.goal_type][0]
    return G.generate_goal(db, G.GoalGenConfig(seed=req.seed))


def schema_payload() -> dict:
    domains = {}
    for d in schema.DOMAINS:
        domains[d] = {"slots": [
            {"name": s.name, "kind": s.kind, "informable": s.informable,
             "requestable": s.requestable}
            for s in schema.SLOTS[d]]}
    return {
        "version": schema.API_VERSION,
        "domains": domains,
        "intents": list(A.INTENTS),
        "goal_types": list(G.GOAL_TYPES),
        "general_subtypes": ["greet", "thank", "welcome", "bye"],
        "hotel_services": list(schema.HOTEL_SERVICES),
    }


def create_app(db: dbm.Database | None = None, *, db_seed: int = 0) -> FastAPI:
    """Build the service with its own database and session registry."""
    app = FastAPI(title="crossdial session service",
                  version=schema.API_VERSION)
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])
    app.state.db = db if db is not None else dbm.generate_database(seed=db_seed)
    sessions: dict[str, LiveSession] = {}
    registry_lock = threading.Lock()

    def get_session(session_id: str) -> LiveSession:
        with registry_lock:
            sess = sessions.get(session_id)
        if sess is None:
            raise HTTPException(status_code=404,
                                detail=f"no session {session_id!r}")
        return sess

    @app.get("/schema")
    def get_schema() -> dict:
        return schema_payload()

    @app.post("/sessions", status_code=201)
    def open_session(req: OpenSessionRequest) -> dict:
        if req.role not in ROLES:
            raise _bad(f"role must be one of {ROLES}")
        goal = _make_goal(app.state.db, req)
        sess = LiveSession(app.state.db, req.role, goal, seed=req.seed)
        with registry_lock:
            sessions[sess.id] = sess
        return sess.view()

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str) -> dict:
        sess = get_session(session_id)
        with sess.lock:
            return sess.view()

    @app.post("/sessions/{session_id}/query")
    def post_query(session_id: str, req: QueryRequest) -> dict:
        sess = get_session(session_id)
        with sess.lock:
            if sess.role != "wizard":
                raise _bad("only the wizard side runs database queries")
            if sess.finished:
                raise HTTPException(status_code=409, detail="session finished")
            cons = {}
            for pair in req.constraints:
                if not isinstance(pair, (list, tuple)) or len(pair) != 2:
                    raise _bad(f"constraints must be [slot, value] pairs, "
                               f"got {pair!r}")
                cons[pair[0]] = pair[1]
            tab = sess.run_query(req.domain, cons, req.near)
            return {"version": schema.API_VERSION, "tab": tab,
                    "n_tabs": len(sess.tabs)}

    @app.post("/sessions/{session_id}/turn")
    def post_turn(session_id: str, req: TurnRequest) -> dict:
        sess = get_session(session_id)
        with sess.lock:
            if sess.finished:
                raise HTTPException(status_code=409,
                                    detail="session already finished")
            before = len(sess.turns)
            if sess.role == "user":
                sess.user_turn(req.selected)
            else:
                sess.wizard_turn(req.acts, req.entities)
            out = sess.view()
            out["new_turns"] = out["transcript"][before:]
            return out

    @app.get("/sessions/{session_id}/export")
    def export_session(session_id: str) -> dict:
        sess = get_session(session_id)
        with sess.lock:
            return C.export_corpus([sess.record()])

    return app
