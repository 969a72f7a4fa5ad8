"""Dialogue records: serialization, statistics, and the public-release importer.

A record is a goal plus alternating turns. User turns carry the expressed
tuple rows and the full tuple state after the turn; system turns carry the
wizard state snapshot (every executed query included). Export and import are
exact inverses so corpora can be shipped, diffed, and re-annotated.
"""

from __future__ import annotations

import json
import re
import zipfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from . import goals as G
from . import schema
from . import values as V


class CorpusFormatError(ValueError):
    pass


@dataclass
class Turn:
    role: str                                   # "user" | "sys"
    acts: list = field(default_factory=list)    # [intent, domain, slot, value] rows
    utterance: str | None = None
    user_state: list | None = None              # tuple rows after the turn
    selected: list | None = None                # tuple rows expressed this turn
    sys_state: dict | None = None               # wizard snapshot

    def __post_init__(self):
        self.acts = [a.as_list() if hasattr(a, "as_list") else list(a)
                     for a in self.acts]

    def state_snapshot(self):
        return self.user_state if self.role == "user" else self.sys_state

    def to_dict(self) -> dict:
        return {
            "role": self.role,
            "acts": [list(a) for a in self.acts],
            "utterance": self.utterance,
            "user_state": self.user_state,
            "selected": self.selected,
            "sys_state": self.sys_state,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Turn":
        if data.get("role") not in ("user", "sys"):
            raise CorpusFormatError(f"bad turn role {data.get('role')!r}")
        return cls(role=data["role"], acts=data.get("acts", []),
                   utterance=data.get("utterance"),
                   user_state=data.get("user_state"),
                   selected=data.get("selected"),
                   sys_state=data.get("sys_state"))


@dataclass
class DialogueRecord:
    id: str
    goal: G.UserGoal
    goal_type: str
    turns: list[Turn] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "goal_type": self.goal_type,
            "goal": self.goal.to_dict(),
            "turns": [t.to_dict() for t in self.turns],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DialogueRecord":
        try:
            return cls(
                id=str(data["id"]),
                goal=G.UserGoal.from_dict(data["goal"]),
                goal_type=data["goal_type"],
                turns=[Turn.from_dict(t) for t in data["turns"]],
                metadata=dict(data.get("metadata", {})))
        except KeyError as e:
            raise CorpusFormatError(f"dialogue record missing field {e}") from None


def export_corpus(records) -> dict:
    return {
        "schema_version": schema.CORPUS_SCHEMA_VERSION,
        "dialogues": [r.to_dict() for r in records],
    }


def import_corpus(data: dict) -> list[DialogueRecord]:
    if not isinstance(data, dict) or "dialogues" not in data:
        raise CorpusFormatError("not a corpus export: missing 'dialogues'")
    version = data.get("schema_version")
    if version != schema.CORPUS_SCHEMA_VERSION:
        raise CorpusFormatError(f"unsupported corpus schema {version!r}")
    return [DialogueRecord.from_dict(d) for d in data["dialogues"]]


def save_corpus(records, path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(export_corpus(records), f, ensure_ascii=False,
                  sort_keys=True, indent=1)


def load_corpus(path) -> list[DialogueRecord]:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise CorpusFormatError(f"corpus file is not valid JSON: {e}") from None
    return import_corpus(data)


# ---------------------------------------------------------------------------
# Statistics.

def bucket_by_goal_type(records) -> dict[str, list[DialogueRecord]]:
    buckets: dict[str, list[DialogueRecord]] = {t: [] for t in G.GOAL_TYPES}
    for r in records:
        buckets.setdefault(r.goal_type, []).append(r)
    return buckets


def _avg(xs) -> float:
    xs = list(xs)
    return sum(xs) / len(xs) if xs else 0.0


def _n_queries(turn: Turn) -> int:
    queries = (turn.sys_state or {}).get("queries", {})
    return sum(len(qs) for qs in queries.values())


def compute_stats(records) -> dict:
    """Corpus-level statistics; utterance metrics are skipped for act-only data.

    NoOffer and goal-change rates are per dialogue, the multi-query rate is
    per system turn, and act/token averages are per turn.
    """
    records = list(records)

    def block(rs) -> dict:
        turns = [t for r in rs for t in r.turns]
        sys_turns = [t for t in turns if t.role == "sys"]
        tokens = [V.tokenize(t.utterance) for t in turns if t.utterance]
        return {
            "n_dialogues": len(rs),
            "avg_turns": _avg(len(r.turns) for r in rs),
            "avg_subgoals": _avg(len(r.goal.subgoals) for r in rs),
            "avg_tuples": _avg(len(r.goal.tuples()) for r in rs),
            "avg_acts_per_turn": _avg(len(t.acts) for t in turns),
            "avg_tokens_per_utterance": _avg(len(ts) for ts in tokens),
            "nooffer_rate": _avg(
                1.0 if any(a[0] == "NoOffer" for t in r.turns for a in t.acts)
                else 0.0 for r in rs),
            "goal_change_rate": _avg(
                1.0 if r.metadata.get("goal_changed") else 0.0 for r in rs),
            "multi_query_rate": _avg(
                1.0 if _n_queries(t) > 1 else 0.0 for t in sys_turns),
            "finish_rate": _avg(
                1.0 if r.metadata.get("finished") else 0.0 for r in rs),
        }

    tokens = [V.tokenize(t.utterance)
              for r in records for t in r.turns if t.utterance]
    intent_counts = Counter(
        a[0] for r in records for t in r.turns for a in t.acts)
    stats = block(records)
    stats.update({
        "tokenizer": "cjk-char+whitespace",
        "vocab_size": len({w for ts in tokens for w in ts}),
        "intent_counts": dict(sorted(intent_counts.items())),
        "by_type": {t: block(rs)
                    for t, rs in bucket_by_goal_type(records).items() if rs},
    })
    return stats


def turn_count_histogram(records) -> list[tuple[int, int]]:
    counts = Counter(len(r.turns) for r in records)
    return sorted(counts.items())


# ---------------------------------------------------------------------------
# Importer for the published CrossWOZ release.

_CW_DOMAINS = {
    "景点": "attraction",
    "餐馆": "restaurant",
    "酒店": "hotel",
    "出租": "taxi",
    "地铁": "metro",
}

_CW_SLOTS = {
    "名称": "name",
    "评分": "rating",
    "门票": "fee",
    "游玩时间": "duration",
    "地址": "address",
    "电话": "phone",
    "周边景点": "nearby attractions",
    "周边餐馆": "nearby restaurants",
    "周边酒店": "nearby hotels",
    "人均消费": "cost",
    "推荐菜": "dishes",
    "营业时间": "open",
    "价格": "price",
    "酒店类型": "type",
    "酒店设施": "services",
    "出发地": "from",
    "目的地": "to",
    "车型": "car type",
    "车牌": "plate number",
    "出发地附近地铁站": "from station",
    "目的地附近地铁站": "to station",
}

_CW_TYPES = {
    "单领域": "S",
    "独立多领域": "M",
    "独立多领域+交通": "M+T",
    "不独立多领域": "CM",
    "不独立多领域+交通": "CM+T",
}

_CW_REF = re.compile(r"id\s*=\s*(\d+)")


def _cw_slot(slot: str) -> str:
    if slot.startswith("酒店设施-"):
        # Facility constraints name one facility; keep it as the value side.
        return "services"
    return _CW_SLOTS.get(slot, slot)


def _cw_value(slot_en: str, value) -> str:
    """Normalize cross-references to the canonical markers."""
    value = "" if value is None else str(value)
    m = _CW_REF.search(value)
    if m is None:
        return value
    k = int(m.group(1))
    if slot_en in ("from", "to"):
        return G.make_entity_ref(k)
    return G.make_nearby_ref(k)


def _cw_goal(raw_rows, description: str, goal_type: str) -> G.UserGoal:
    tuples = []
    for row in raw_rows:
        sub_id, domain, slot, value, expressed = row
        slot_en = _cw_slot(str(slot))
        if str(slot).startswith("酒店设施-") and not value:
            value = str(slot).split("-", 1)[1]
        tuples.append(G.SemanticTuple(
            subgoal_id=int(sub_id),
            domain=_CW_DOMAINS.get(str(domain), str(domain)),
            slot=slot_en,
            value=_cw_value(slot_en, value),
            expressed=bool(expressed)))
    subgoals = []
    for t in tuples:
        if not subgoals or subgoals[-1].id != t.subgoal_id:
            subgoals.append(G.SubGoal(id=t.subgoal_id, domain=t.domain, tuples=[]))
        subgoals[-1].tuples.append(t)
    return G.UserGoal(subgoals=subgoals, description=description,
                      goal_type=goal_type)


def _cw_acts(raw_acts) -> list[list[str]]:
    out = []
    for act in raw_acts or []:
        intent, domain, slot, value = (list(act) + ["", "", "", ""])[:4]
        slot_en = _cw_slot(str(slot))
        out.append([str(intent), _CW_DOMAINS.get(str(domain), str(domain)),
                    slot_en, _cw_value(slot_en, value)])
    return out


def import_crosswoz(data: dict) -> list[DialogueRecord]:
    """Convert the published CrossWOZ release format into dialogue records.

    Domain, slot, and goal-type labels are translated; utterances and slot
    values stay in the original language. Cross-references written with the
    release's "id=k" notation are normalized to the canonical markers. Raw
    per-dialogue fields that have no counterpart here land in metadata.
    """
    records = []
    for dialogue_id, d in data.items():
        if not isinstance(d, dict) or "messages" not in d:
            raise CorpusFormatError(f"dialogue {dialogue_id!r}: no messages")
        goal_type = _CW_TYPES.get(d.get("type", ""), d.get("type", ""))
        description = " ".join(d.get("task description", []))
        goal = _cw_goal(d.get("goal", []), description, goal_type)
        turns = []
        for msg in d["messages"]:
            role = "user" if msg.get("role") == "usr" else "sys"
            user_state = None
            if role == "user" and "user_state" in msg:
                user_state = [[int(r[0]), _CW_DOMAINS.get(str(r[1]), str(r[1])),
                               _cw_slot(str(r[2])),
                               _cw_value(_cw_slot(str(r[2])), r[3]), bool(r[4])]
                              for r in msg["user_state"]]
            sys_state = None
            if role == "sys":
                sys_state = {k: msg[k] for k in ("sys_state", "sys_state_init")
                             if k in msg} or None
            turns.append(Turn(
                role=role, acts=_cw_acts(msg.get("dialog_act")),
                utterance=msg.get("content"),
                user_state=user_state, sys_state=sys_state))
        records.append(DialogueRecord(
            id=str(dialogue_id), goal=goal, goal_type=goal_type, turns=turns,
            metadata={"source": "crosswoz",
                      "source_type": d.get("type"),
                      "final_goal": d.get("final_goal"),
                      "sys_usr": d.get("sys-usr")}))
    return records


def load_crosswoz_file(path) -> list[DialogueRecord]:
    """Load a release file, transparently unwrapping a one-file zip."""
    path = str(path)
    if path.endswith(".zip"):
        with zipfile.ZipFile(path) as zf:
            names = [n for n in zf.namelist() if n.endswith(".json")]
            if not names:
                raise CorpusFormatError(f"{path}: no JSON member in archive")
            with zf.open(names[0]) as f:
                return import_crosswoz(json.load(f))
    with open(path, encoding="utf-8") as f:
        return import_crosswoz(json.load(f))
