"""User goal generation.

A goal is an ordered list of sub-goals, each a bundle of semantic tuples
[subgoal_id, domain, slot, value, expressed]. Values encode three tuple kinds:

* ""              blank: a requestable slot the user must get filled,
* "near (id=k)"   a nearby reference to sub-goal k (venue name slots),
* "(id=k)"        an at-entity reference to sub-goal k (taxi/metro from/to),
* anything else   a concrete informable constraint.

Generation runs in four steps: independent venue sub-goals, nearby sub-goals
spawned off anchors that want a "nearby X" answer, taxi/metro sub-goals
commuting between two earlier venue sub-goals, and a reordering pass that
pulls every referrer as close after its referent as dependencies allow.
Sub-goal ids are renumbered to final positions, so a reference always points
backwards. Each sub-goal keeps a hidden witness entity that proves its
constraints satisfiable; the oracle wizard answers from these.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field
from importlib import resources

from . import database as dbm
from . import schema
from . import values as V

BLANK = ""

GOAL_TYPES = ("S", "M", "M+T", "CM", "CM+T")

_REF_RE = re.compile(r"^(near )?\(id=(\d+)\)$")


class GoalGenerationError(RuntimeError):
    pass


class GoalTemplateError(KeyError):
    pass


def make_nearby_ref(subgoal_id: int) -> str:
    return f"near (id={subgoal_id})"


def make_entity_ref(subgoal_id: int) -> str:
    return f"(id={subgoal_id})"


def parse_ref(value: str) -> tuple[str, int] | None:
    """('nearby'|'at-entity', target id) when the value is a reference."""
    if not isinstance(value, str):
        return None
    m = _REF_RE.match(value)
    if not m:
        return None
    return ("nearby" if m.group(1) else "at-entity", int(m.group(2)))


@dataclass
class SemanticTuple:
    subgoal_id: int
    domain: str
    slot: str
    value: str
    expressed: bool = False

    def is_blank(self) -> bool:
        return self.value == BLANK

    def ref(self) -> tuple[str, int] | None:
        return parse_ref(self.value)

    def as_row(self) -> list:
        return [self.subgoal_id, self.domain, self.slot, self.value, self.expressed]

    @classmethod
    def from_row(cls, row) -> "SemanticTuple":
        if len(row) != 5:
            raise ValueError(f"semantic tuple row needs 5 fields, got {row!r}")
        return cls(int(row[0]), str(row[1]), str(row[2]), str(row[3]), bool(row[4]))


@dataclass
class SubGoal:
    id: int
    domain: str
    tuples: list[SemanticTuple]
    witness_id: str | None = None

    def blanks(self) -> list[SemanticTuple]:
        return [t for t in self.tuples if t.is_blank()]

    def has_blank(self, slot: str) -> bool:
        return any(t.slot == slot and t.is_blank() for t in self.tuples)


@dataclass
class UserGoal:
    subgoals: list[SubGoal]
    description: str = ""
    goal_type: str = ""

    def tuples(self) -> list[SemanticTuple]:
        return [t for sg in self.subgoals for t in sg.tuples]

    def subgoal(self, subgoal_id: int) -> SubGoal:
        for sg in self.subgoals:
            if sg.id == subgoal_id:
                return sg
        raise KeyError(f"no sub-goal {subgoal_id}")

    def witnesses(self) -> dict[int, str]:
        return {sg.id: sg.witness_id for sg in self.subgoals if sg.witness_id}

    def to_dict(self) -> dict:
        return {
            "tuples": [t.as_row() for t in self.tuples()],
            "description": self.description,
            "goal_type": self.goal_type,
            "witnesses": {str(k): v for k, v in self.witnesses().items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UserGoal":
        tuples = [SemanticTuple.from_row(r) for r in d["tuples"]]
        subgoals: list[SubGoal] = []
        witnesses = {int(k): v for k, v in d.get("witnesses", {}).items()}
        for t in tuples:
            if not subgoals or subgoals[-1].id != t.subgoal_id:
                subgoals.append(SubGoal(t.subgoal_id, t.domain, [],
                                        witnesses.get(t.subgoal_id)))
            subgoals[-1].tuples.append(t)
        return cls(subgoals, d.get("description", ""), d.get("goal_type", ""))


# ---------------------------------------------------------------------------
# Configuration. The probability constants were fitted by the grid search in
# scripts/calibrate_goal_config.py against the target corpus averages
# (3.24 sub-goals and 14.8 semantic tuples per goal) and then frozen.

DEFAULT_P_DOMAIN = {"attraction": 0.58, "restaurant": 0.58, "hotel": 0.58}

DEFAULT_P_CROSS = {
    (a, b): 0.44
    for a in schema.VENUE_DOMAINS for b in schema.VENUE_DOMAINS
    if (a, b) != ("hotel", "hotel")
}

DEFAULT_P_TRAFFIC = 0.32

# Chance that a core informable slot is constrained in a fresh sub-goal.
DEFAULT_INFORMABLE_PROBS = {
    "attraction": {"rating": 0.27, "fee": 0.45, "duration": 0.18},
    "restaurant": {"rating": 0.27, "cost": 0.405, "dishes": 0.405},
    "hotel": {"rating": 0.315, "price": 0.45, "type": 0.27, "@service": 0.315},
}

# Chance that a requestable slot is added as a blank tuple (skipped when the
# same slot was just constrained). "@service" requests one random service.
DEFAULT_REQUESTABLE_PROBS = {
    "attraction": {"rating": 0.325, "fee": 0.26, "duration": 0.195,
                   "address": 0.39, "phone": 0.39,
                   "nearby attractions": 0.39, "nearby restaurants": 0.39,
                   "nearby hotels": 0.39},
    "restaurant": {"rating": 0.325, "cost": 0.26, "dishes": 0.26,
                   "address": 0.39, "phone": 0.39, "open": 0.325,
                   "nearby attractions": 0.39, "nearby restaurants": 0.39,
                   "nearby hotels": 0.39},
    "hotel": {"rating": 0.39, "price": 0.26, "type": 0.195,
              "address": 0.39, "phone": 0.39, "@service": 0.26,
              "nearby attractions": 0.39, "nearby restaurants": 0.39},
}

DEFAULT_NAME_INFORMABLE_PROB = 0.05
MAX_EXTRA_REQUESTS = 3


@dataclass
class GoalGenConfig:
    p_domain: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_P_DOMAIN))
    p_cross: dict[tuple[str, str], float] = field(
        default_factory=lambda: dict(DEFAULT_P_CROSS))
    p_taxi: float = DEFAULT_P_TRAFFIC
    p_metro: float = DEFAULT_P_TRAFFIC
    max_subgoals: int = 5
    seed: int = 0
    retry_budget: int = 100
    name_informable_prob: float = DEFAULT_NAME_INFORMABLE_PROB
    informable_probs: dict = field(
        default_factory=lambda: {d: dict(v) for d, v in DEFAULT_INFORMABLE_PROBS.items()})
    requestable_probs: dict = field(
        default_factory=lambda: {d: dict(v) for d, v in DEFAULT_REQUESTABLE_PROBS.items()})


# ---------------------------------------------------------------------------
# Sampling helpers.

def _marginal_value(db: dbm.Database, rng: random.Random, domain: str, slot: str) -> str:
    """A value for `slot` drawn from a random entity of the domain."""
    ent = rng.choice(db.entities(domain))
    v = ent.values.get(slot)
    if slot == "dishes":
        v = rng.choice(v)
    return V.to_act_value(v)


def _consistent_value(witness: dbm.Entity, rng: random.Random, slot: str,
                      grid: list[float] | None) -> str | None:
    """A constraint value the witness itself satisfies."""
    v = witness.values.get(slot)
    if slot == "dishes":
        return V.to_act_value(rng.choice(v))
    spec = schema.slot_spec(witness.domain, slot)
    if spec.kind == schema.NUMERIC:
        n = V.parse_number(v)
        if n is None:
            return None
        if schema.NUMERIC_DIRECTIONS.get(slot) == "at-least":
            opts = [g for g in (grid or []) if g <= n] or [n]
        else:
            opts = [g for g in (grid or []) if g >= n] or [n]
            if V.to_act_value(v) == "free":
                return "free"
        return V.to_act_value(rng.choice(opts))
    return V.to_act_value(v)


def constraints_of(subgoal: SubGoal) -> list[dbm.Constraint]:
    """Constraints from the concrete informable tuples of a sub-goal."""
    return [dbm.constraint_for(subgoal.domain, t.slot, t.value)
            for t in subgoal.tuples if not t.is_blank() and t.ref() is None]


def _sample_informables(db: dbm.Database, cfg: GoalGenConfig, rng: random.Random,
                        domain: str) -> list[tuple[str, str]]:
    pairs: list[tuple[str, str]] = []
    for slot, p in cfg.informable_probs[domain].items():
        if rng.random() >= p:
            continue
        if slot == "@service":
            svc = rng.choice(schema.HOTEL_SERVICES)
            pairs.append((svc, "yes"))
        else:
            pairs.append((slot, _marginal_value(db, rng, domain, slot)))
    return pairs


def _sample_requests(cfg: GoalGenConfig, rng: random.Random, domain: str,
                     taken: set[str]) -> list[str]:
    slots: list[str] = []
    for slot, p in cfg.requestable_probs[domain].items():
        if rng.random() >= p:
            continue
        if slot == "@service":
            pool = [s for s in schema.HOTEL_SERVICES if s not in taken]
            if pool:
                slots.append(rng.choice(pool))
            continue
        if slot not in taken:
            slots.append(slot)
    non_nearby = [s for s in slots if s not in schema.NEARBY_SLOTS.values()]
    nearby = [s for s in slots if s in schema.NEARBY_SLOTS.values()]
    return non_nearby[:MAX_EXTRA_REQUESTS] + nearby


def _gen_independent(db: dbm.Database, cfg: GoalGenConfig, rng: random.Random,
                     domain: str, sg_id: int) -> SubGoal:
    name_informable = rng.random() < cfg.name_informable_prob
    for _ in range(cfg.retry_budget):
        if name_informable:
            witness = rng.choice(db.entities(domain))
            informs = [("name", witness.values["name"])]
        else:
            informs = _sample_informables(db, cfg, rng, domain)
            constraints = [dbm.constraint_for(domain, s, v) for s, v in informs]
            witness = dbm.pick_witness(db, domain, constraints, rng)
            if witness is None:
                continue
        tuples = [SemanticTuple(sg_id, domain, s, v) for s, v in informs]
        if not name_informable:
            tuples.append(SemanticTuple(sg_id, domain, "name", BLANK))
        taken = {s for s, _ in informs}
        requests = _sample_requests(cfg, rng, domain, taken)
        if name_informable and not requests:
            pool = [s.name for s in schema.requestable_slots(domain)
                    if s.name not in taken and s.name != "name"]
            requests = [rng.choice(pool)]
        tuples.extend(SemanticTuple(sg_id, domain, s, BLANK) for s in requests)
        return SubGoal(sg_id, domain, tuples, witness.id)
    raise GoalGenerationError(
        f"no satisfiable constraint set found for {domain} after "
        f"{cfg.retry_budget} attempts")


def _gen_cross(db: dbm.Database, cfg: GoalGenConfig, rng: random.Random,
               anchor: SubGoal, target: str, sg_id: int) -> SubGoal | None:
    anchor_witness = db.entity(anchor.witness_id)
    candidates = anchor_witness.nearby.get(target, [])
    if not candidates:
        return None
    witness = db.entity(rng.choice(candidates))
    tuples = [SemanticTuple(sg_id, target, "name", make_nearby_ref(anchor.id))]
    grids = {}
    for slot, p in cfg.informable_probs[target].items():
        if rng.random() >= p:
            continue
        if slot == "@service":
            yes = [s for s in schema.HOTEL_SERVICES if witness.values.get(s) is True]
            if not yes:
                continue
            tuples.append(SemanticTuple(sg_id, target, rng.choice(yes), "yes"))
            continue
        if slot not in grids:
            spec = schema.slot_spec(target, slot)
            grids[slot] = (dbm.numeric_grid(db, target, slot)
                           if spec.kind == schema.NUMERIC else None)
        value = _consistent_value(witness, rng, slot, grids[slot])
        if value is not None:
            tuples.append(SemanticTuple(sg_id, target, slot, value))
    taken = {t.slot for t in tuples}
    requests = _sample_requests(cfg, rng, target, taken)
    tuples.extend(SemanticTuple(sg_id, target, s, BLANK) for s in requests)
    if not any(t.is_blank() for t in tuples):
        pool = [s.name for s in schema.requestable_slots(target)
                if s.name not in taken]
        tuples.append(SemanticTuple(sg_id, target, rng.choice(pool), BLANK))
    return SubGoal(sg_id, target, tuples, witness.id)


def _gen_traffic(domain: str, sg_id: int, src: SubGoal, dst: SubGoal) -> SubGoal:
    tuples = [
        SemanticTuple(sg_id, domain, "from", make_entity_ref(src.id)),
        SemanticTuple(sg_id, domain, "to", make_entity_ref(dst.id)),
    ]
    if domain == schema.TAXI:
        tuples.append(SemanticTuple(sg_id, domain, "car type", BLANK))
        tuples.append(SemanticTuple(sg_id, domain, "plate number", BLANK))
    else:
        tuples.append(SemanticTuple(sg_id, domain, "from station", BLANK))
        tuples.append(SemanticTuple(sg_id, domain, "to station", BLANK))
    return SubGoal(sg_id, domain, tuples)


# ---------------------------------------------------------------------------
# Reordering and renumbering.

def _direct_refs(sg: SubGoal) -> set[int]:
    return {r[1] for t in sg.tuples if (r := t.ref()) is not None}


def reorder_subgoals(subgoals: list[SubGoal]) -> list[SubGoal]:
    """Referrers move as close after their referents as dependencies allow.

    Greedy emission: prefer a ready sub-goal that references the most recently
    emitted one; otherwise keep the original order. Stable for independent
    sub-goals.
    """
    pos = {sg.id: i for i, sg in enumerate(subgoals)}
    deps = {sg.id: _direct_refs(sg) for sg in subgoals}
    remaining = list(subgoals)
    out: list[SubGoal] = []
    done: set[int] = set()
    while remaining:
        ready = [sg for sg in remaining if deps[sg.id] <= done]
        if not ready:
            raise GoalGenerationError("cyclic sub-goal references")
        last = out[-1].id if out else None
        preferred = [sg for sg in ready if last is not None and last in deps[sg.id]]
        pick = min(preferred or ready, key=lambda sg: pos[sg.id])
        out.append(pick)
        done.add(pick.id)
        remaining.remove(pick)
    return out


def _renumber(subgoals: list[SubGoal]) -> list[SubGoal]:
    mapping = {sg.id: i + 1 for i, sg in enumerate(subgoals)}
    for sg in subgoals:
        sg.id = mapping[sg.id]
        for t in sg.tuples:
            t.subgoal_id = sg.id
            r = t.ref()
            if r is not None:
                kind, target = r
                t.value = (make_nearby_ref(mapping[target]) if kind == "nearby"
                           else make_entity_ref(mapping[target]))
    return subgoals


# ---------------------------------------------------------------------------
# Top-level generation.

def generate_goal(db: dbm.Database, cfg: GoalGenConfig | None = None) -> UserGoal:
    """Generate one goal. Deterministic for a fixed (db, cfg.seed)."""
    cfg = cfg or GoalGenConfig()
    rng = random.Random(cfg.seed)

    subgoals: list[SubGoal] = []
    for _ in range(cfg.retry_budget):
        subgoals = []
        next_id = 1
        for domain in schema.VENUE_DOMAINS:
            if rng.random() < cfg.p_domain.get(domain, 0.0):
                subgoals.append(_gen_independent(db, cfg, rng, domain, next_id))
                next_id += 1
        if subgoals:
            break
    if not subgoals:
        raise GoalGenerationError(
            f"step 1 produced no sub-goals in {cfg.retry_budget} attempts "
            "(are all p_domain zero?)")

    # Step 2: nearby sub-goals, breadth-first over anchors, one per
    # (anchor, target domain) pair, only when the anchor wants a nearby list.
    i = 0
    next_id = len(subgoals) + 1
    while i < len(subgoals):
        anchor = subgoals[i]
        i += 1
        if anchor.domain not in schema.VENUE_DOMAINS or anchor.witness_id is None:
            continue
        for target in schema.VENUE_DOMAINS:
            if len(subgoals) >= cfg.max_subgoals:
                break
            p = cfg.p_cross.get((anchor.domain, target), 0.0)
            if p <= 0 or not anchor.has_blank(schema.NEARBY_SLOTS[target]):
                continue
            if rng.random() >= p:
                continue
            sg = _gen_cross(db, cfg, rng, anchor, target, next_id)
            if sg is not None:
                subgoals.append(sg)
                next_id += 1

    # Step 3: traffic between two distinct earlier venue sub-goals.
    har = [sg for sg in subgoals if sg.domain in schema.VENUE_DOMAINS]
    if len(har) >= 2:
        for domain, p in ((schema.TAXI, cfg.p_taxi), (schema.METRO, cfg.p_metro)):
            if len(subgoals) >= cfg.max_subgoals:
                break
            if rng.random() < p:
                src, dst = rng.sample(har, 2)
                subgoals.append(_gen_traffic(domain, next_id, src, dst))
                next_id += 1

    subgoals = _renumber(reorder_subgoals(subgoals))
    goal = UserGoal(subgoals)
    goal.goal_type = classify_goal_type(goal)
    goal.description = render_description(goal)
    return goal


def classify_goal_type(goal: UserGoal) -> str:
    har = [sg for sg in goal.subgoals if sg.domain in schema.VENUE_DOMAINS]
    traffic = any(sg.domain in schema.TRAFFIC_DOMAINS for sg in goal.subgoals)
    cross = any(t.ref() is not None for sg in har for t in sg.tuples)
    if cross:
        return "CM+T" if traffic else "CM"
    if traffic:
        return "M+T"
    return "M" if len(har) >= 2 else "S"


def validate_goal(goal: UserGoal, max_subgoals: int = 5) -> list[str]:
    """Structural violations; empty list means the goal is well-formed."""
    problems = []
    if not goal.subgoals:
        problems.append("goal has no sub-goals")
    if len(goal.subgoals) > max_subgoals:
        problems.append(f"{len(goal.subgoals)} sub-goals exceeds {max_subgoals}")
    ids = [sg.id for sg in goal.subgoals]
    if ids != list(range(1, len(ids) + 1)):
        problems.append(f"sub-goal ids {ids} are not 1..n in order")
    position = {sg.id: i for i, sg in enumerate(goal.subgoals)}
    for sg in goal.subgoals:
        if sg.domain not in schema.DOMAINS:
            problems.append(f"unknown domain {sg.domain!r}")
            continue
        for t in sg.tuples:
            if t.subgoal_id != sg.id:
                problems.append(f"tuple {t.slot!r} carries id {t.subgoal_id}, "
                                f"sub-goal is {sg.id}")
            if not schema.has_slot(sg.domain, t.slot):
                problems.append(f"unknown slot {t.slot!r} in {sg.domain}")
                continue
            spec = schema.slot_spec(sg.domain, t.slot)
            r = t.ref()
            if r is not None:
                kind, target = r
                if not spec.cross_domain_capable:
                    problems.append(f"reference on non-cross slot {t.slot!r}")
                if target not in position:
                    problems.append(f"reference to missing sub-goal {target}")
                elif position[target] >= position[sg.id]:
                    problems.append(
                        f"referent {target} does not precede referrer {sg.id}")
                elif goal.subgoal(target).domain not in schema.VENUE_DOMAINS:
                    problems.append(f"reference targets non-venue sub-goal {target}")
            elif t.is_blank() and not spec.requestable:
                problems.append(f"blank tuple on non-requestable slot {t.slot!r}")
            elif not t.is_blank() and not spec.informable:
                problems.append(f"value on non-informable slot {t.slot!r}")
        if sg.domain in schema.VENUE_DOMAINS and not sg.blanks():
            problems.append(f"venue sub-goal {sg.id} has no requestable tuple")
        if sg.domain in schema.TRAFFIC_DOMAINS:
            refs = [t.ref() for t in sg.tuples if t.slot in ("from", "to")]
            targets = [r[1] for r in refs if r is not None]
            if len(targets) != 2 or len(set(targets)) != 2:
                problems.append(f"traffic sub-goal {sg.id} must reference two "
                                "distinct sub-goals")
    return problems


# ---------------------------------------------------------------------------
# Natural-language description.

_TEMPLATES: dict | None = None


def _templates() -> dict:
    global _TEMPLATES
    if _TEMPLATES is None:
        text = resources.files("crossdial.data").joinpath(
            "description_templates.json").read_text(encoding="utf-8")
        _TEMPLATES = json.loads(text)
    return _TEMPLATES


def _lookup(section: dict, domain: str, slot: str, *, suffix: str = "") -> str:
    spec = schema.slot_spec(domain, slot)
    keys = [f"{domain}.{slot}{suffix}", f"{domain}.{slot}"]
    if spec.kind == schema.BOOLEAN_SERVICE:
        keys.append(f"{domain}.@service")
    for key in keys:
        if key in section:
            return section[key]
    raise GoalTemplateError(f"{domain}.{slot}{suffix}")


def render_description(goal: UserGoal, templates: dict | None = None) -> str:
    tpl = templates or _templates()
    sentences = []
    domain_of = {sg.id: sg.domain for sg in goal.subgoals}
    for sg in goal.subgoals:
        lead = tpl["lead"].get(sg.domain)
        if lead is None:
            raise GoalTemplateError(f"lead.{sg.domain}")
        informs, requests = [], []
        for t in sg.tuples:
            r = t.ref()
            if r is not None:
                _, target = r
                text = _lookup(tpl["cross"], sg.domain, t.slot)
                informs.append(text.format(ref=target,
                                           ref_domain=domain_of[target]))
            elif t.is_blank():
                requests.append(_lookup(tpl["request"], sg.domain, t.slot)
                                .format(slot=t.slot))
            else:
                suffix = ".free" if t.value == "free" else ""
                text = _lookup(tpl["inform"], sg.domain, t.slot, suffix=suffix)
                informs.append(text.format(value=t.value, slot=t.slot))
        sentence = f"Sub-goal {sg.id}: {lead}"
        if informs:
            sentence += " " + " and ".join(informs)
        if requests:
            sentence += "; find out " + ", ".join(requests)
        sentences.append(sentence + ".")
    return " ".join(sentences)
