"""Template natural-language generation and BLEU scoring.

Generation prefers human-authored templates keyed by the exact multiset of a
turn's acts; delexicalization turns logged utterances into such templates.
When no template matches, built-in per-act renderers take over. The renderers
are written against the keyword annotator's patterns, so rendered text
round-trips through understanding with only natural losses (domain ambiguity,
span collisions), never by construction.
"""

from __future__ import annotations

import json
import random
import re
from collections import Counter
from importlib import resources
from pathlib import Path

from . import acts as A
from . import values as V

NLG_SCHEMA_VERSION = "1.0"


class NLGError(ValueError):
    pass


class DelexError(NLGError):
    pass


def _sorted_acts(acts) -> list[A.DialogueAct]:
    acts = [a if isinstance(a, A.DialogueAct) else A.DialogueAct.from_list(a)
            for a in acts]
    return sorted(acts, key=lambda a: (a.intent, a.domain, a.slot))


def store_key(acts) -> str:
    """Canonical key for a turn's act multiset; values are abstracted away."""
    return ";".join(f"{a.intent}+{a.domain}+{a.slot}" for a in _sorted_acts(acts))


def _placeholder(slot: str, n: int) -> str:
    token = "$" + slot.replace(" ", "_").replace("-", "_")
    return token if n == 1 else f"{token}_{n}"


def _act_values(acts) -> list[tuple[A.DialogueAct, str]]:
    """(act, placeholder) pairs for every act that carries a real value."""
    counts: Counter = Counter()
    out = []
    for act in _sorted_acts(acts):
        if act.intent in (A.REQUEST, A.NOOFFER, A.GENERAL):
            continue
        slot = act.slot
        counts[slot] += 1
        out.append((act, _placeholder(slot, counts[slot])))
    return out


def delexicalize(utterance: str, acts) -> str:
    """Replace act values in the utterance with $slot placeholders.

    Values are matched case-insensitively, longest first; the n-th act with
    the same slot gets a _n suffix. A value that does not appear in the text
    raises DelexError (such turns cannot become templates).
    """
    pairs = _act_values(acts)
    result = utterance
    for act, token in sorted(pairs, key=lambda p: -len(p[0].value)):
        value = act.value
        if not value or value == A.NONE:
            continue
        m = re.search(re.escape(value), result, flags=re.IGNORECASE)
        if m is None:
            raise DelexError(f"value {value!r} not found in utterance")
        result = result[:m.start()] + token + result[m.end():]
    return result


def fill(template: str, acts) -> str:
    mapping = {token: act.value for act, token in _act_values(acts)}
    def sub(m: re.Match) -> str:
        token = m.group(0)
        if token in mapping:
            return mapping[token]
        raise NLGError(f"template placeholder {token} has no act value")
    return re.sub(r"\$[a-z_]+\d*", sub, template)


class TemplateStore:
    """Delexicalized templates per speaker, keyed by act multiset."""

    def __init__(self):
        self.templates: dict[str, dict[str, list[str]]] = {"user": {}, "sys": {}}
        self.skipped = 0

    def add(self, speaker: str, acts, template: str) -> None:
        bucket = self.templates[speaker].setdefault(store_key(acts), [])
        if template not in bucket:
            bucket.append(template)

    def lookup(self, speaker: str, acts) -> list[str] | None:
        return self.templates.get(speaker, {}).get(store_key(acts))

    def extract(self, records) -> "TemplateStore":
        """Harvest templates from dialogue records with utterances."""
        for rec in records:
            for turn in rec.turns:
                if not turn.utterance or not turn.acts:
                    continue
                speaker = "user" if turn.role == "user" else "sys"
                try:
                    self.add(speaker, turn.acts, delexicalize(turn.utterance, turn.acts))
                except DelexError:
                    self.skipped += 1
        return self

    def size(self) -> int:
        return sum(len(v) for side in self.templates.values() for v in side.values())

    def to_dict(self) -> dict:
        return {"schema_version": NLG_SCHEMA_VERSION, "templates": self.templates}

    @classmethod
    def from_dict(cls, data: dict) -> "TemplateStore":
        if data.get("schema_version") != NLG_SCHEMA_VERSION:
            raise NLGError(
                f"unsupported template schema {data.get('schema_version')!r}")
        store = cls()
        for speaker in ("user", "sys"):
            store.templates[speaker] = {
                k: list(v) for k, v in data.get("templates", {}).get(speaker, {}).items()}
        return store

    def save(self, path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, ensure_ascii=False, indent=1)

    @classmethod
    def load(cls, path) -> "TemplateStore":
        with open(path, encoding="utf-8") as f:
            return cls.from_dict(json.load(f))


_SEED_STORE: TemplateStore | None = None


def seed_store() -> TemplateStore:
    """The small built-in store shipped with the package."""
    global _SEED_STORE
    if _SEED_STORE is None:
        text = resources.files("crossdial.data").joinpath(
            "nlg_templates.json").read_text(encoding="utf-8")
        _SEED_STORE = TemplateStore.from_dict(json.loads(text))
    return _SEED_STORE


# ---------------------------------------------------------------------------
# Built-in renderers, one clause per act.

def _article(word: str) -> str:
    return "an" if word[:1].lower() in "aeiou" else "a"


def _render_user_inform(act: A.DialogueAct) -> str:
    d, s, v = act.domain, act.slot, act.value
    if s == "name":
        return f"Tell me about {v}."
    if s == "rating":
        return f"I want the {d} rated {v} or higher."
    if s == "fee":
        if v == "free":
            return "The attraction should have free admission."
        return f"The attraction should have an admission fee of at most {v} yuan."
    if s == "duration":
        return f"The attraction visit should take within {v} hours."
    if s == "cost":
        return f"The restaurant should have a per-person cost of at most {v} yuan."
    if s == "price":
        return f"The hotel should be priced at most {v} yuan per night."
    if s == "type":
        return f"I want {_article(v)} {v}."
    if s == "dishes":
        return f"The restaurant should serve {v}."
    if s == "from":
        return f"The {d} departs from {v}."
    if s == "to":
        return f"The {d} heads to {v}."
    # Hotel service constraint.
    return f"The hotel should offer {s}."


def _render_user_request(act: A.DialogueAct) -> str:
    d, s = act.domain, act.slot
    fixed = {
        "name": f"Please recommend {_article(d)} {d}.",
        "rating": f"What is the {d}'s rating?",
        "fee": "What is the attraction's admission fee?",
        "duration": "How long a visit does the attraction take?",
        "cost": "What is the restaurant's per-person cost?",
        "price": "What is the hotel's price per night?",
        "type": "What is the hotel's type?",
        "dishes": "What are the restaurant's signature dishes?",
        "open": "What are the restaurant's opening hours?",
        "address": f"What is the {d}'s address?",
        "phone": f"What is the {d}'s phone number?",
        "car type": "What car type will the taxi be?",
        "plate number": "What is the taxi's plate number?",
        "from station": "Which departure station should I use for the metro?",
        "to station": "Which arrival station is it for the metro?",
    }
    if s in fixed:
        return fixed[s]
    if s.startswith("nearby "):
        return f"What {s} does the {d} have?"
    return f"Does the hotel offer {s}?"


def _render_sys_request(act: A.DialogueAct) -> str:
    d, s = act.domain, act.slot
    if s == "from":
        return f"Where does the {d} depart from?"
    if s == "to":
        return f"Where is the {d} headed?"
    if s == "name":
        return f"Which {d} do you mean?"
    return f"Could you tell me the {s}?"


def _render_sys_inform(act: A.DialogueAct) -> str:
    d, s, v = act.domain, act.slot, act.value
    if s == "name":
        return f"{v} is a good fit."
    if s == "rating":
        return f"Its rating is {v}."
    if s == "fee":
        return "Admission is free." if v == "free" else f"The admission fee is {v} yuan."
    if s == "duration":
        return f"A visit takes about {v} hours."
    if s == "cost":
        return f"The per-person cost is around {v} yuan."
    if s == "price":
        return f"The price is {v} yuan per night."
    if s == "type":
        return f"It is {_article(v)} {v}."
    if s == "dishes":
        return f"Signature dishes include {v}."
    if s == "open":
        return f"It is open {v}."
    if s == "address":
        return f"The address is {v}."
    if s == "phone":
        return f"The phone number is {v}."
    if s.startswith("nearby "):
        if v == "none":
            return f"There are no {s} worth noting."
        return f"Nearby {s.split(' ', 1)[1]} include {v}."
    if s == "car type":
        return f"The car type is {_article(v)} {v}."
    if s == "plate number":
        return f"The plate number is {v}."
    if s == "from station":
        return f"Board at {v} for the {d}."
    if s == "to station":
        return f"Get off at {v}."
    # Hotel service answer.
    return f"It offers {s}." if v == "yes" else f"It does not offer {s}."


def _render_act(act: A.DialogueAct, speaker: str) -> str:
    if act.intent == A.GENERAL:
        return {"greet": "Hello.", "thank": "Thank you.",
                "bye": "Goodbye.", "welcome": "You're welcome."}.get(
                    act.domain, "Hello.")
    if act.intent == A.NOOFFER:
        return f"Sorry, I could not find a matching {act.domain}."
    if act.intent == A.SELECT:
        which = f"previous {act.value}" if act.domain == act.value else act.value
        return f"I am looking for {_article(act.domain)} {act.domain} near the {which}."
    if act.intent == A.REQUEST:
        return (_render_user_request(act) if speaker == "user"
                else _render_sys_request(act))
    if act.intent == A.RECOMMEND:
        return f"You could try {act.value}."
    if act.intent == A.INFORM:
        return (_render_user_inform(act) if speaker == "user"
                else _render_sys_inform(act))
    raise NLGError(f"cannot render intent {act.intent!r}")


def _render_turn(acts: list[A.DialogueAct], speaker: str) -> str:
    clauses: list[str] = []
    i = 0
    while i < len(acts):
        act = acts[i]
        if act.intent == A.RECOMMEND:
            names = []
            while i < len(acts) and acts[i].intent == A.RECOMMEND:
                names.append(acts[i].value)
                i += 1
            if len(names) == 1:
                clauses.append(f"You could try {names[0]}.")
            else:
                clauses.append("You could try %s or %s."
                               % (", ".join(names[:-1]) + ",", names[-1]))
            continue
        clauses.append(_render_act(act, speaker))
        i += 1
    return " ".join(clauses)


def generate(acts, speaker: str, store: TemplateStore | None = None,
             rng: random.Random | None = None) -> str:
    """Render one turn of acts to text.

    A store hit on the full act multiset wins; otherwise each act falls back
    to its built-in renderer (consecutive Recommends merge into one list
    sentence). `rng` only picks among template variants.
    """
    if speaker not in ("user", "sys"):
        raise NLGError(f"unknown speaker {speaker!r}")
    acts = [a if isinstance(a, A.DialogueAct) else A.DialogueAct.from_list(a)
            for a in acts]
    if not acts:
        raise NLGError("cannot render an empty act list")
    # Same-domain selects need the renderer's disambiguating phrasing; a
    # template's "near the restaurant" would read as a self-reference.
    plain = not any(a.intent == A.SELECT and a.domain == a.value for a in acts)
    if store is not None and plain:
        variants = store.lookup(speaker, acts)
        if variants:
            chosen = variants[0] if rng is None else rng.choice(variants)
            return fill(chosen, acts)
    return _render_turn(acts, speaker)


# ---------------------------------------------------------------------------
# BLEU.

def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu(hypotheses: list[str], references: list[list[str]],
         max_n: int = 4) -> float:
    """Corpus BLEU with modified n-gram precision and closest-reference
    brevity penalty (ties broken toward the shorter reference)."""
    import math
    if len(hypotheses) != len(references):
        raise ValueError("hypothesis/reference count mismatch")
    if not hypotheses:
        raise ValueError("empty corpus")
    clipped = [0] * max_n
    totals = [0] * max_n
    hyp_len = ref_len = 0
    for hyp, refs in zip(hypotheses, references):
        if not refs:
            raise ValueError("every hypothesis needs at least one reference")
        h = V.tokenize(hyp)
        rs = [V.tokenize(r) for r in refs]
        hyp_len += len(h)
        ref_len += min((abs(len(r) - len(h)), len(r)) for r in rs)[1]
        for n in range(1, max_n + 1):
            hc = _ngrams(h, n)
            if not hc:
                continue
            best = Counter()
            for r in rs:
                rc = _ngrams(r, n)
                for g in hc:
                    best[g] = max(best[g], rc.get(g, 0))
            totals[n - 1] += sum(hc.values())
            clipped[n - 1] += sum(min(c, best[g]) for g, c in hc.items())
    if any(t == 0 for t in totals):
        return 0.0
    if any(c == 0 for c in clipped):
        return 0.0
    log_prec = sum(math.log(c / t) for c, t in zip(clipped, totals)) / max_n
    bp = 1.0 if hyp_len > ref_len else math.exp(1 - ref_len / max(hyp_len, 1))
    return bp * math.exp(log_prec)


def sentence_bleu(hypothesis: str, references: list[str], max_n: int = 4) -> float:
    return bleu([hypothesis], [references], max_n=max_n)
