"""Dialogue acts: (intent, domain, slot, value) quadruples.

Six intents. Request acts carry value "none"; Select acts carry the referent
domain in the value field under the reserved slot name "src_domain"; General
acts put their subtype (greet/thank/bye/welcome) in the domain field, which is
how exported annotations conventionally look.
"""

from __future__ import annotations

from dataclasses import dataclass

INFORM = "Inform"
REQUEST = "Request"
RECOMMEND = "Recommend"
NOOFFER = "NoOffer"
SELECT = "Select"
GENERAL = "General"

INTENTS = (INFORM, REQUEST, RECOMMEND, NOOFFER, SELECT, GENERAL)

SRC_DOMAIN = "src_domain"
NONE = "none"


@dataclass(frozen=True)
class DialogueAct:
    intent: str
    domain: str
    slot: str
    value: str

    def as_list(self) -> list[str]:
        return [self.intent, self.domain, self.slot, self.value]

    @classmethod
    def from_list(cls, quad) -> "DialogueAct":
        if len(quad) != 4:
            raise ValueError(f"dialogue act needs 4 fields, got {quad!r}")
        return cls(*(str(x) for x in quad))


def inform(domain: str, slot: str, value: str) -> DialogueAct:
    return DialogueAct(INFORM, domain, slot, str(value))


def request(domain: str, slot: str) -> DialogueAct:
    return DialogueAct(REQUEST, domain, slot, NONE)


def recommend(domain: str, name: str) -> DialogueAct:
    return DialogueAct(RECOMMEND, domain, "name", str(name))


def nooffer(domain: str) -> DialogueAct:
    return DialogueAct(NOOFFER, domain, NONE, NONE)


def select(domain: str, src_domain: str) -> DialogueAct:
    return DialogueAct(SELECT, domain, SRC_DOMAIN, src_domain)


def general(subtype: str) -> DialogueAct:
    return DialogueAct(GENERAL, subtype, NONE, NONE)
