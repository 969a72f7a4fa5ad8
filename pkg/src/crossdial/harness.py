"""End-to-end simulation: user and wizard in a loop, plus batch metrics.

Sessions alternate user-first and stop at a turn cap. At the act level the
two sides exchange dialogue acts directly; at the text level every turn is
rendered to an utterance and the listener re-derives acts with the keyword
annotator, so understanding losses degrade the dialogue exactly the way a
lossy channel would. Batches draw goals from one shared seed stream so runs
are reproducible byte for byte.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import acts as A
from . import annotation
from . import corpus as C
from . import database as dbm
from . import goals as G
from . import nlg
from . import user as U
from . import wizard as W

LEVELS = ("da", "nl")
WIZARDS = ("rule", "oracle")


class SimConfigError(ValueError):
    pass


@dataclass
class SimConfig:
    level: str = "da"
    wizard: str = "rule"
    max_turns: int = 40
    seed: int = 0
    use_templates: bool = True

    def __post_init__(self):
        if self.level not in LEVELS:
            raise SimConfigError(f"unknown level {self.level!r}")
        if self.wizard not in WIZARDS:
            raise SimConfigError(f"unknown wizard {self.wizard!r}")
        if self.max_turns < 2:
            raise SimConfigError("max_turns must allow at least one exchange")
        if self.wizard == "oracle" and self.level != "da":
            raise SimConfigError("the oracle wizard only runs at act level")


def _make_wizard(db, goal, cfg: SimConfig):
    if cfg.wizard == "oracle":
        return W.OracleWizard(db, goal, seed=cfg.seed * 4 + 2)
    return W.RuleWizard(db, seed=cfg.seed * 4 + 2)


def run_session(db: dbm.Database, goal: G.UserGoal, cfg: SimConfig,
                store: nlg.TemplateStore | None = None,
                lexicon: annotation.KeywordLexicon | None = None,
                record_id: str | None = None) -> C.DialogueRecord:
    """Simulate one dialogue and return its full record.

    The record always stores each speaker's own acts; at the text level the
    other side hears whatever the keyword annotator recovers from the
    rendered utterance, so logged acts and transmitted acts can differ.
    """
    nl = cfg.level == "nl"
    if nl and lexicon is None:
        lexicon = annotation.build_lexicon(db)
    if nl and store is None and cfg.use_templates:
        store = nlg.seed_store()
    sim = U.UserSimulator(db, seed=cfg.seed * 4 + 1)
    wiz = _make_wizard(db, goal, cfg)
    nlg_rng = random.Random(cfg.seed * 4 + 3)
    ustate = sim.init_state(goal)
    wstate = wiz.new_state()
    turns: list[C.Turn] = []
    finished = False
    failure = None

    while len(turns) + 2 <= cfg.max_turns:
        # User speaks.
        try:
            out = sim.respond(ustate)
        except U.UserPolicyError as e:
            failure = f"user-error: {e}"
            break
        user_utter = None
        heard_by_wizard = out.acts
        if nl:
            try:
                user_utter = nlg.generate(out.acts, "user", store, nlg_rng)
            except nlg.NLGError as e:
                failure = f"nlg-miss: {e}"
                break
            heard_by_wizard = annotation.derive_system_das(
                user_utter, prev_domain=wstate.active_domain(), lexicon=lexicon)
        turns.append(C.Turn(role="user", acts=out.acts, utterance=user_utter,
                            user_state=ustate.rows(), selected=out.selected))

        # Wizard answers.
        try:
            sys_acts, snap = wiz.respond(wstate, heard_by_wizard)
        except W.DSTError as e:
            failure = f"policy-error: {e}"
            break
        sys_utter = None
        heard_by_user = sys_acts
        if nl:
            try:
                sys_utter = nlg.generate(sys_acts, "sys", store, nlg_rng)
            except nlg.NLGError as e:
                failure = f"nlg-miss: {e}"
                break
            active = sim.active_subgoal(ustate)
            candidates = [db.entity(i) for i in snap["selected"].values()]
            heard_by_user = annotation.derive_system_das(
                sys_utter, selected_entities=candidates,
                prev_domain=active.domain if active else None, lexicon=lexicon)
        turns.append(C.Turn(role="sys", acts=sys_acts, utterance=sys_utter,
                            sys_state=snap))
        if out.terminated:
            finished = True
            break
        sim.receive(ustate, heard_by_user)

    if not finished and failure is None:
        failure = "max-turns"
    meta = {
        "finished": finished,
        "failure": failure,
        "level": cfg.level,
        "wizard": cfg.wizard,
        "seed": cfg.seed,
        "n_turns": len(turns),
        "goal_changed": ustate.goal_changed,
        "change_log": list(ustate.change_log),
        "user_warnings": ustate.warnings,
        "sys_warnings": wstate.warnings,
    }
    return C.DialogueRecord(
        id=record_id or f"sim-{cfg.level}-{cfg.wizard}-{cfg.seed}",
        goal=goal, goal_type=goal.goal_type, turns=turns, metadata=meta)


# ---------------------------------------------------------------------------
# Exact re-annotation from logged state.

def reannotate_record(db: dbm.Database, record: C.DialogueRecord) -> C.DialogueRecord:
    """Re-derive every turn's acts from its logged state.

    User acts come from the expressed tuple rows, system acts from replaying
    act composition over the state snapshot. Dialogues produced by
    run_session round-trip exactly.
    """
    domains = {sg.id: sg.domain for sg in record.goal.subgoals}
    new_turns = []
    for turn in record.turns:
        if turn.role == "user":
            if turn.selected:
                acts = annotation.derive_user_das(turn.selected, domains)
            else:
                # Only the closing turn expresses no goal tuples.
                acts = [A.general("thank"), A.general("bye")]
        else:
            if turn.sys_state is None:
                raise C.CorpusFormatError(
                    f"dialogue {record.id}: system turn without state snapshot")
            state = W.SystemState.from_snapshot(turn.sys_state)
            acts = W.compose_acts(db, state)
        new_turns.append(C.Turn(
            role=turn.role, acts=acts, utterance=turn.utterance,
            user_state=turn.user_state, selected=turn.selected,
            sys_state=turn.sys_state))
    return C.DialogueRecord(id=record.id, goal=record.goal,
                            goal_type=record.goal_type, turns=new_turns,
                            metadata=dict(record.metadata))


def annotate_with_keywords(db: dbm.Database, record: C.DialogueRecord,
                           lexicon: annotation.KeywordLexicon | None = None
                           ) -> C.DialogueRecord:
    """Annotate a record's utterances with the keyword annotator."""
    lexicon = lexicon or annotation.build_lexicon(db)
    new_turns = []
    prev_domain = None
    for turn in record.turns:
        if not turn.utterance:
            raise C.CorpusFormatError(
                f"dialogue {record.id}: turn without utterance cannot be annotated")
        candidates = None
        if turn.role == "sys" and turn.sys_state:
            candidates = [db.entity(i)
                          for i in turn.sys_state.get("selected", {}).values()]
        acts = annotation.derive_system_das(
            turn.utterance, selected_entities=candidates,
            prev_domain=prev_domain, lexicon=lexicon)
        domains = {a[1] for a in turn.acts
                   if a[0] in (A.INFORM, A.REQUEST, A.SELECT)}
        if domains:
            prev_domain = sorted(domains)[0]
        new_turns.append(C.Turn(
            role=turn.role, acts=acts, utterance=turn.utterance,
            user_state=turn.user_state, selected=turn.selected,
            sys_state=turn.sys_state))
    return C.DialogueRecord(id=record.id, goal=record.goal,
                            goal_type=record.goal_type, turns=new_turns,
                            metadata=dict(record.metadata))


# ---------------------------------------------------------------------------
# Batch runs.

@dataclass
class BatchReport:
    per_type: dict[str, dict]
    overall: dict
    config: dict
    records: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"per_type": self.per_type, "overall": self.overall,
                "config": self.config}


def sample_goals_by_type(db: dbm.Database, n_per_type: int, seed: int = 0,
                         types=G.GOAL_TYPES,
                         goal_cfg: G.GoalGenConfig | None = None
                         ) -> dict[str, list[G.UserGoal]]:
    """Fill one bucket per goal type from a single shared seed stream.

    Goal k in the stream uses generation seed `seed + k` and lands in its
    type's bucket if that bucket still has room, so the draw is deterministic
    and identical across runs regardless of which types are requested.
    """
    buckets: dict[str, list[G.UserGoal]] = {t: [] for t in types}
    k = 0
    guard = 0
    base = goal_cfg or G.GoalGenConfig()
    while any(len(v) < n_per_type for v in buckets.values()):
        guard += 1
        if guard > n_per_type * 2000:
            missing = [t for t, v in buckets.items() if len(v) < n_per_type]
            raise G.GoalGenerationError(
                f"could not fill goal buckets for types {missing}")
        cfg = G.GoalGenConfig(
            p_domain=base.p_domain, p_cross=base.p_cross, p_taxi=base.p_taxi,
            p_metro=base.p_metro, max_subgoals=base.max_subgoals,
            seed=seed + k, retry_budget=base.retry_budget,
            name_informable_prob=base.name_informable_prob,
            informable_probs=base.informable_probs,
            requestable_probs=base.requestable_probs)
        goal = G.generate_goal(db, cfg)
        k += 1
        bucket = buckets.get(goal.goal_type)
        if bucket is not None and len(bucket) < n_per_type:
            bucket.append(goal)
    return buckets


def finish_rate(db: dbm.Database, n_per_type: int, cfg: SimConfig,
                types=G.GOAL_TYPES, keep_records: bool = False,
                goal_cfg: G.GoalGenConfig | None = None) -> BatchReport:
    """Finish rate per goal type over freshly sampled goals.

    Session i of type t runs with a seed derived from (cfg.seed, t, i), so
    two calls with the same arguments produce identical records.
    """
    if n_per_type < 1:
        raise ValueError("n_per_type must be at least 1")
    buckets = sample_goals_by_type(db, n_per_type, seed=cfg.seed * 1_000_003,
                                   types=types, goal_cfg=goal_cfg)
    store = nlg.seed_store() if cfg.level == "nl" and cfg.use_templates else None
    lexicon = annotation.build_lexicon(db) if cfg.level == "nl" else None
    per_type: dict[str, dict] = {}
    records = []
    total_fin = total = 0
    for t_idx, t in enumerate(types):
        fin = 0
        turns_sum = 0
        failures: dict[str, int] = {}
        for i, goal in enumerate(buckets[t]):
            scfg = SimConfig(level=cfg.level, wizard=cfg.wizard,
                             max_turns=cfg.max_turns,
                             seed=cfg.seed * 9_000_001 + t_idx * 1_000_003 + i,
                             use_templates=cfg.use_templates)
            rec = run_session(db, goal, scfg, store=store, lexicon=lexicon,
                              record_id=f"{cfg.level}-{cfg.wizard}-{t}-{i:05d}")
            if rec.metadata["finished"]:
                fin += 1
            else:
                reason = (rec.metadata["failure"] or "unknown").split(":")[0]
                failures[reason] = failures.get(reason, 0) + 1
            turns_sum += rec.metadata["n_turns"]
            if keep_records:
                records.append(rec)
        n = len(buckets[t])
        per_type[t] = {
            "n": n,
            "finished": fin,
            "finish_rate": fin / n if n else 0.0,
            "avg_turns": turns_sum / n if n else 0.0,
            "failures": dict(sorted(failures.items())),
        }
        total_fin += fin
        total += n
    overall = {"n": total, "finished": total_fin,
               "finish_rate": total_fin / total if total else 0.0}
    config = {"level": cfg.level, "wizard": cfg.wizard,
              "max_turns": cfg.max_turns, "seed": cfg.seed,
              "n_per_type": n_per_type, "types": list(types)}
    return BatchReport(per_type=per_type, overall=overall, config=config,
                       records=records)
