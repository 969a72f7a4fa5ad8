"""Dialogue-act annotation and agreement metrics.

Two directions of annotation live here. The exact direction derives acts from
logged state: user acts follow mechanically from the semantic tuples a turn
expressed. The approximate direction derives acts from text with keyword
matching (longest match first, each character span consumed once); it doubles
as the understanding stand-in for natural-language simulation.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from importlib import resources

from . import acts as A
from . import database as dbm
from . import goals as G
from . import schema
from . import values as V


def derive_user_das(tuples, referent_domains=None) -> list[A.DialogueAct]:
    """Acts for the semantic tuples a user turn expressed, in order.

    Concrete values become Inform, blanks become Request (value "none"), and
    unresolved references become Select acts whose value names the referent
    sub-goal's domain (looked up in `referent_domains`).
    """
    out = []
    for t in tuples:
        if not isinstance(t, G.SemanticTuple):
            t = G.SemanticTuple.from_row(t)
        r = t.ref()
        if r is not None:
            _, target = r
            if referent_domains is None or target not in referent_domains:
                raise ValueError(
                    f"cannot derive Select: no referent domain for sub-goal {target}")
            out.append(A.select(t.domain, referent_domains[target]))
        elif t.is_blank():
            out.append(A.request(t.domain, t.slot))
        else:
            out.append(A.inform(t.domain, t.slot, t.value))
    return out


# ---------------------------------------------------------------------------
# Keyword lexicon and text annotation.

@dataclass
class KeywordLexicon:
    """Surface forms for keyword annotation, mostly harvested from a database."""
    keywords: dict = field(default_factory=dict)
    names: dict[str, str] = field(default_factory=dict)        # lowered name -> domain
    dishes: list[str] = field(default_factory=list)
    stations: list[str] = field(default_factory=list)
    hotel_types: list[str] = field(default_factory=list)
    car_types: list[str] = field(default_factory=list)

    def surface_slots(self, domain: str) -> list[tuple[str, str]]:
        """(surface, slot) pairs for a domain, longest surface first."""
        table = self.keywords.get("slot_surfaces", {}).get(domain, {})
        pairs = [(s, slot) for slot, surfaces in table.items() for s in surfaces]
        return sorted(pairs, key=lambda p: -len(p[0]))


_KEYWORDS: dict | None = None


def _keywords() -> dict:
    global _KEYWORDS
    if _KEYWORDS is None:
        text = resources.files("crossdial.data").joinpath(
            "lexicon.json").read_text(encoding="utf-8")
        _KEYWORDS = json.loads(text)
    return _KEYWORDS


def build_lexicon(db: dbm.Database | None = None) -> KeywordLexicon:
    lex = KeywordLexicon(keywords=_keywords())
    lex.hotel_types = list(V.HOTEL_TYPES)
    lex.car_types = list(V.CAR_TYPES)
    lex.dishes = list(V.DISHES)
    if db is not None:
        for domain in schema.VENUE_DOMAINS:
            for e in db.entities(domain):
                lex.names[e.values["name"].lower()] = domain
        lex.stations = sorted(set(db.metro_stations.values()))
    return lex


def _consume(mask: list[bool], start: int, end: int) -> bool:
    if any(mask[start:end]):
        return False
    for i in range(start, end):
        mask[i] = True
    return True


def _find_all(low: str, needle: str) -> list[int]:
    hits, i = [], low.find(needle)
    while i != -1:
        hits.append(i)
        i = low.find(needle, i + 1)
    return hits


def _domain_at(low: str, pos: int, domain_words: dict, default: str | None,
               mask: list[bool] | None = None) -> str | None:
    """Domain whose word most recently precedes pos, else nearest after, else default.

    Consumed spans do not count: a domain word inside an already-claimed
    entity name is part of the name, not a domain mention.
    """
    best, best_dist = None, None
    for domain, words in domain_words.items():
        for w in words:
            for i in _find_all(low, w):
                if mask is not None and any(mask[i:i + len(w)]):
                    continue
                dist = pos - i if i <= pos else (i - pos) + 10_000
                if best_dist is None or dist < best_dist:
                    best, best_dist = domain, dist
    return best or default


def derive_system_das(utterance: str, selected_entities=None, prev_domain=None,
                      lexicon: KeywordLexicon | None = None) -> list[A.DialogueAct]:
    """Annotate an utterance with keyword matching.

    `selected_entities` (a list of Entity) grounds slot-value Informs the way
    a wizard's current selection would; without them only lexicon-wide
    surfaces (names, dishes, stations, numbers) are recoverable. Matching is
    longest-value-first and every matched character span is consumed once, so
    overlapping readings cannot double-fire. Deliberately lossy: anything the
    keyword rules cannot ground is dropped.
    """
    lex = lexicon or build_lexicon()
    kw = lex.keywords
    low = utterance.lower()
    mask = [False] * len(low)
    out: list[A.DialogueAct] = []
    domain_words = kw["domain_words"]
    sentences = re.split(r"[.;!?]", low)

    def domain_at(pos: int) -> str | None:
        return _domain_at(low, pos, domain_words, prev_domain, mask)

    # General intents first: they are short fixed phrases.
    for subtype in ("bye", "thank", "greet", "welcome"):
        for phrase in kw["general"].get(subtype, ()):
            for i in _find_all(low, phrase):
                if _consume(mask, i, i + len(phrase)):
                    out.append(A.general(subtype))
                    break

    for phrase in kw["nooffer"]:
        for i in _find_all(low, phrase):
            if _consume(mask, i, i + len(phrase)):
                out.append(A.nooffer(domain_at(i) or "attraction"))

    # Select: "... near the <domain>" style references.
    for marker in kw["near_markers"]:
        for i in _find_all(low, marker):
            after = low[i + len(marker):i + len(marker) + 32].lstrip()
            # "near the previous X" marks a reference to another entity of
            # the same domain; without the qualifier, same-domain readings
            # are self-references and dropped.
            qualified = False
            for q in ("previous ", "that ", "same "):
                if after.startswith(q):
                    after = after[len(q):]
                    qualified = True
            src = next((d for d, ws in domain_words.items()
                        if any(after.startswith(w) for w in ws)), None)
            if src and _consume(mask, i, i + len(marker)):
                target = domain_at(max(0, i - 4)) or prev_domain
                if target and (target != src or qualified):
                    out.append(A.select(target, src))

    name_pool: dict[str, str] = {}
    if selected_entities:
        for e in selected_entities:
            name_pool[e.values["name"].lower()] = e.domain
    name_pool.update(lex.names)
    has_marker = any(mk in low for mk in kw["request_markers"])
    recommendish = any(m in low for m in kw["recommend_markers"])

    # Nearby lists: one pattern covers the request, the list answer, and the
    # empty answer, keyed on what follows the phrase.
    nearby_matches = list(re.finditer(r"nearby (attraction|restaurant|hotel)s", low))
    # The phrases themselves contain domain words, so hide every phrase span
    # before looking for holder domains.
    nearby_ctx = low
    for m in nearby_matches:
        nearby_ctx = (nearby_ctx[:m.start()] + " " * (m.end() - m.start())
                      + nearby_ctx[m.end():])
    for m in nearby_matches:
        if not _consume(mask, *m.span()):
            continue
        slot = f"nearby {m.group(1)}s"
        tail = re.split(r"[.;!?]", low[m.end():])[0]
        listed = []
        for name in sorted(name_pool, key=len, reverse=True):
            j = tail.find(name)
            if j != -1 and _consume(mask, m.end() + j, m.end() + j + len(name)):
                listed.append((j, utterance[m.end() + j:m.end() + j + len(name)]))
        holder = _domain_at(nearby_ctx, m.start(), domain_words, None, mask)
        if holder is None or not schema.has_slot(holder, slot):
            holder = prev_domain if (
                prev_domain and schema.has_slot(prev_domain, slot)) else "attraction"
        if listed:
            out.append(A.inform(holder, slot, ", ".join(n for _, n in sorted(listed))))
        elif "none" in tail or " no " in low[max(0, m.start() - 12):m.start() + 1] \
                or low.startswith("no "):
            out.append(A.inform(holder, slot, "none"))
        elif has_marker:
            out.append(A.request(holder, slot))

    # Traffic endpoints: "from <name> to <name>", or one endpoint at a time.
    traffic_domain = "metro" if ("metro" in low or "subway" in low) else "taxi"
    for m in re.finditer(r"from ([a-z0-9'\- ]+?) to ([a-z0-9'\- ]+?)(?=[,.;!?]|$| and | for )", low):
        a, b = m.group(1).strip(), m.group(2).strip()
        if a in name_pool and b in name_pool and _consume(mask, *m.span()):
            out.append(A.inform(traffic_domain, "from",
                                utterance[m.start(1):m.start(1) + len(a)]))
            out.append(A.inform(traffic_domain, "to",
                                utterance[m.start(2):m.start(2) + len(b)]))
    for pattern, slot in ((r"departs from ([a-z0-9'\- ]+?)(?=[,.;!?]|$)", "from"),
                          (r"heads to ([a-z0-9'\- ]+?)(?=[,.;!?]|$)", "to")):
        for m in re.finditer(pattern, low):
            a = m.group(1).strip()
            if a in name_pool and _consume(mask, *m.span()):
                out.append(A.inform(traffic_domain, slot,
                                    utterance[m.start(1):m.start(1) + len(a)]))

    # Metro stations, assigned to from/to by cue word else by position.
    station_hits = []
    for station in sorted(lex.stations, key=len, reverse=True):
        s = station.lower()
        for i in _find_all(low, s):
            if _consume(mask, i, i + len(s)):
                station_hits.append((i, station))
    for rank, (i, station) in enumerate(sorted(station_hits)):
        head = low[max(0, i - 60):i]
        if "departure" in head or "board at" in head:
            slot = "from station"
        elif "arrival" in head or "destination" in head or "get off" in head:
            slot = "to station"
        else:
            slot = "from station" if rank == 0 else "to station"
        out.append(A.inform("metro", slot, station))

    # Entity names in utterance order: several names (or one plus a
    # recommendation marker) read as Recommend, a lone name as Inform.
    found_names: list[tuple[int, str, str]] = []
    for name in sorted(name_pool, key=len, reverse=True):
        for i in _find_all(low, name):
            if _consume(mask, i, i + len(name)):
                found_names.append((i, name_pool[name], utterance[i:i + len(name)]))
    found_names.sort()
    if len(found_names) > 1 or (found_names and recommendish):
        out.extend(A.recommend(d, n) for _, d, n in found_names)
    elif found_names:
        _, d, n = found_names[0]
        out.append(A.inform(d, "name", n))
    elif recommendish:
        marker = next(m for m in kw["recommend_markers"] if m in low)
        d = domain_at(low.find(marker))
        if d in schema.VENUE_DOMAINS:
            out.append(A.request(d, "name"))

    # Plate numbers are fully structured; claim them before fuzzy value
    # matching can eat their digits.
    for m in re.finditer(r"\b([A-Z]{2}-\d{4}[A-Z]?)\b", utterance):
        if _consume(mask, *m.span()):
            out.append(A.inform("taxi", "plate number", m.group(1)))

    # Slot values of the grounding entities, longest value first; the active
    # domain's entity gets first claim on ambiguous values.
    if selected_entities:
        pairs = []
        for e in selected_entities:
            for slot, val in e.values.items():
                spec = schema.slot_spec(e.domain, slot)
                if slot == "name" or spec.kind in (schema.BOOLEAN_SERVICE,
                                                   schema.NEARBY_LIST):
                    continue
                if isinstance(val, list):
                    # The joined form first (it is longer), then the elements.
                    pairs.append((e.domain, slot, V.to_act_value(val)))
                    pairs.extend((e.domain, slot, V.to_act_value(x)) for x in val)
                elif not (slot == "fee" and val == "free"):
                    # A bare "free" is claimed by the free-admission phrases.
                    pairs.append((e.domain, slot, V.to_act_value(val)))
        pairs.sort(key=lambda p: (-len(p[2]), p[0] != prev_domain))
        for domain, slot, val in pairs:
            needle = val.lower()
            if len(needle) >= 2:
                # Bare numbers only count as whole words; "10" must not fire
                # inside a phone number or plate.
                numeric = needle.replace(".", "").isdigit()
                hits = ([m.start() for m in
                         re.finditer(rf"\b{re.escape(needle)}\b", low)]
                        if numeric else _find_all(low, needle))
                for i in hits:
                    if _consume(mask, i, i + len(needle)):
                        out.append(A.inform(domain, slot, val))
                        break
                continue
            # One-character values (low ratings, short durations) only count
            # on a word boundary with the slot named just before them.
            surfaces = [s for s, sl in lex.surface_slots(domain) if sl == slot]
            for m in re.finditer(rf"\b{re.escape(needle)}\b", low):
                window = low[max(0, m.start() - 40):m.start()]
                if not any(s in window for s in surfaces):
                    continue
                if _consume(mask, m.start(), m.end()):
                    out.append(A.inform(domain, slot, val))
                    break

    # Hotel services by name: a question reads as Request, otherwise Inform
    # yes/no with negation scoped to the clause.
    for svc in sorted(schema.HOTEL_SERVICES, key=len, reverse=True):
        for i in _find_all(low, svc):
            if not _consume(mask, i, i + len(svc)):
                continue
            clause = next((s for s in sentences if svc in s), "")
            head = clause.split(svc)[0].strip()
            # Question only when the clause opens interrogatively; "does not"
            # inside a statement must stay a negated Inform.
            if head.startswith(("does ", "do ", "is ", "are ", "whether ")) \
                    or " whether " in f" {head} ":
                out.append(A.request("hotel", svc))
            else:
                negated = any(re.search(rf"\b{re.escape(n)}\b", head)
                              for n in kw["negations"])
                out.append(A.inform("hotel", svc, "no" if negated else "yes"))

    # Free admission.
    for phrase in ("free admission", "admission is free", "fee is free", "for free"):
        for i in _find_all(low, phrase):
            if _consume(mask, i, i + len(phrase)):
                out.append(A.inform(domain_at(i) or "attraction", "fee", "free"))

    # Numeric constraint patterns.
    for m in re.finditer(r"rated? (?:of )?(\d+(?:\.\d+)?) or higher", low):
        if _consume(mask, *m.span()):
            out.append(A.inform(domain_at(m.start()) or "attraction", "rating", m.group(1)))
    for m in re.finditer(r"at most (\d+(?:\.\d+)?) yuan(?: per night)?", low):
        if not _consume(mask, *m.span()):
            continue
        ctx = low[max(0, m.start() - 46):m.end() + 12]
        if "night" in ctx or "priced" in ctx:
            out.append(A.inform("hotel", "price", m.group(1)))
        elif "person" in ctx or "cost" in ctx:
            out.append(A.inform("restaurant", "cost", m.group(1)))
        else:
            out.append(A.inform("attraction", "fee", m.group(1)))
    for m in re.finditer(r"(?:within|takes about) (\d+(?:\.\d+)?) hours?", low):
        if _consume(mask, *m.span()):
            out.append(A.inform(domain_at(m.start()) or "attraction", "duration", m.group(1)))

    # Dish names, hotel room types, car types, plate numbers.
    for dish in sorted(lex.dishes, key=len, reverse=True):
        for i in _find_all(low, dish.lower()):
            if _consume(mask, i, i + len(dish)):
                out.append(A.inform("restaurant", "dishes", dish))
    for t in sorted(lex.hotel_types, key=len, reverse=True):
        for i in _find_all(low, t.lower()):
            if _consume(mask, i, i + len(t)):
                out.append(A.inform("hotel", "type", t))
    for ct in sorted(lex.car_types, key=len, reverse=True):
        for i in _find_all(low, ct.lower()):
            if _consume(mask, i, i + len(ct)):
                out.append(A.inform("taxi", "car type", ct))

    # Remaining requests: a request marker plus an unconsumed slot surface
    # whose nearest domain word agrees with the slot's domain.
    if has_marker:
        for domain in schema.DOMAINS:
            for surface, slot in lex.surface_slots(domain):
                for i in _find_all(low, surface):
                    d_here = domain_at(i)
                    if d_here is not None and d_here != domain:
                        continue
                    if _consume(mask, i, i + len(surface)):
                        out.append(A.request(domain, slot))

    # Drop anything whose domain/slot pairing the schema rejects; a lossy
    # channel mis-attributes rather than inventing structure.
    def valid(act: A.DialogueAct) -> bool:
        if act.intent == A.GENERAL:
            return True
        if act.intent == A.SELECT:
            return (act.domain in schema.VENUE_DOMAINS
                    and act.value in schema.VENUE_DOMAINS)
        if act.intent == A.NOOFFER:
            return act.domain in schema.DOMAINS
        return schema.has_slot(act.domain, act.slot)

    return [a for a in out if valid(a)]


# ---------------------------------------------------------------------------
# Agreement metrics.

def _act_key(act) -> tuple:
    if isinstance(act, A.DialogueAct):
        return (act.intent, act.domain, act.slot, act.value)
    return tuple(str(x) for x in act)


def _counts(turn) -> dict:
    counts: dict[tuple, int] = {}
    for act in turn:
        k = _act_key(act)
        counts[k] = counts.get(k, 0) + 1
    return counts


def da_f1(gold_turns, pred_turns):
    """Micro precision/recall/F1 over exact act quadruples, aligned by turn.

    Returns (f1, precision, recall, per_intent) where per_intent maps each
    intent to its own micro F1.
    """
    if len(gold_turns) != len(pred_turns):
        raise ValueError(
            f"turn count mismatch: {len(gold_turns)} gold vs {len(pred_turns)} predicted")
    tp = fp = fn = 0
    per: dict[str, list[int]] = {}
    for gold, pred in zip(gold_turns, pred_turns):
        g, p = _counts(gold), _counts(pred)
        for key in set(g) | set(p):
            match = min(g.get(key, 0), p.get(key, 0))
            stats = per.setdefault(key[0], [0, 0, 0])
            tp += match
            stats[0] += match
            fp += p.get(key, 0) - match
            stats[1] += p.get(key, 0) - match
            fn += g.get(key, 0) - match
            stats[2] += g.get(key, 0) - match

    def f1_of(tp_, fp_, fn_) -> tuple[float, float, float]:
        if tp_ == fp_ == fn_ == 0:
            return 1.0, 1.0, 1.0
        precision = tp_ / (tp_ + fp_) if tp_ + fp_ else 0.0
        recall = tp_ / (tp_ + fn_) if tp_ + fn_ else 0.0
        f1 = (2 * precision * recall / (precision + recall)
              if precision + recall else 0.0)
        return f1, precision, recall

    f1, precision, recall = f1_of(tp, fp, fn)
    per_intent = {intent: f1_of(*stats)[0] for intent, stats in sorted(per.items())}
    return f1, precision, recall, per_intent


def joint_state_accuracy(gold_states, pred_states) -> float:
    """Fraction of aligned turns whose state snapshots match exactly."""
    if len(gold_states) != len(pred_states):
        raise ValueError(
            f"state count mismatch: {len(gold_states)} vs {len(pred_states)}")
    if not gold_states:
        return 1.0
    hits = sum(1 for g, p in zip(gold_states, pred_states) if g == p)
    return hits / len(gold_states)


@dataclass
class AgreementReport:
    da_f1: float
    da_precision: float
    da_recall: float
    state_accuracy: float
    per_intent_f1: dict[str, float]
    n_dialogues: int
    n_turns: int

    def to_dict(self) -> dict:
        return {
            "da_f1": self.da_f1,
            "da_precision": self.da_precision,
            "da_recall": self.da_recall,
            "state_accuracy": self.state_accuracy,
            "per_intent_f1": self.per_intent_f1,
            "n_dialogues": self.n_dialogues,
            "n_turns": self.n_turns,
        }


def agreement(gold_records, pred_records) -> AgreementReport:
    """Compare two annotation passes over the same dialogues."""
    if len(gold_records) != len(pred_records):
        raise ValueError("corpora differ in dialogue count")
    gold_turns, pred_turns, gold_states, pred_states = [], [], [], []
    for g_rec, p_rec in zip(gold_records, pred_records):
        if len(g_rec.turns) != len(p_rec.turns):
            raise ValueError(f"dialogue {g_rec.id}: turn count differs")
        for g_turn, p_turn in zip(g_rec.turns, p_rec.turns):
            gold_turns.append(g_turn.acts)
            pred_turns.append(p_turn.acts)
            gold_states.append(g_turn.state_snapshot())
            pred_states.append(p_turn.state_snapshot())
    f1, precision, recall, per_intent = da_f1(gold_turns, pred_turns)
    return AgreementReport(
        da_f1=f1, da_precision=precision, da_recall=recall,
        state_accuracy=joint_state_accuracy(gold_states, pred_states),
        per_intent_f1=per_intent,
        n_dialogues=len(gold_records), n_turns=len(gold_turns))
