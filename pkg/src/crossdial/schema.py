"""Domain and slot inventory shared by every other module.

Five domains. Attraction, restaurant and hotel are venue domains backed by
stored entities; taxi and metro are traffic domains with no stored entities.
Slot flags: informable slots may appear as goal constraints, requestable slots
may appear as blank goal tuples the user must fill, and cross-domain capable
slots may hold a reference to another sub-goal instead of a concrete value.
"""

from __future__ import annotations

from dataclasses import dataclass

ATTRACTION = "attraction"
RESTAURANT = "restaurant"
HOTEL = "hotel"
TAXI = "taxi"
METRO = "metro"

DOMAINS = (ATTRACTION, RESTAURANT, HOTEL, TAXI, METRO)
VENUE_DOMAINS = (ATTRACTION, RESTAURANT, HOTEL)
TRAFFIC_DOMAINS = (TAXI, METRO)

NEARBY_SLOTS = {
    ATTRACTION: "nearby attractions",
    RESTAURANT: "nearby restaurants",
    HOTEL: "nearby hotels",
}

# Boolean hotel services. Each one is its own slot; the count is load-bearing.
HOTEL_SERVICES = (
    "wake-up call",
    "free wifi",
    "parking",
    "airport shuttle",
    "24-hour front desk",
    "room service",
    "laundry service",
    "luggage storage",
    "currency exchange",
    "concierge",
    "fitness center",
    "swimming pool",
    "spa",
    "sauna",
    "business center",
    "meeting rooms",
    "on-site restaurant",
    "bar",
    "cafe",
    "breakfast service",
    "non-smoking rooms",
    "family rooms",
    "pet friendly",
    "air conditioning",
    "heating",
    "elevator",
    "safe deposit box",
    "ironing service",
    "dry cleaning",
    "bicycle rental",
    "car rental",
    "ticket service",
    "tour desk",
    "childcare",
    "hot spring",
    "karaoke",
    "chess and cards room",
)

SCALAR_TEXT = "scalar-text"
NUMERIC = "numeric"
BOOLEAN_SERVICE = "boolean-service"
MULTI_VALUE = "multi-value-list"
NEARBY_LIST = "nearby-list"


@dataclass(frozen=True)
class SlotSpec:
    name: str
    domain: str
    kind: str
    informable: bool
    requestable: bool
    cross_domain_capable: bool = False


def _venue_slots(domain: str) -> list[SlotSpec]:
    s = [SlotSpec("name", domain, SCALAR_TEXT, True, True, True)]
    s.append(SlotSpec("rating", domain, NUMERIC, True, True))
    if domain == ATTRACTION:
        s.append(SlotSpec("fee", domain, NUMERIC, True, True))
        s.append(SlotSpec("duration", domain, NUMERIC, True, True))
    elif domain == RESTAURANT:
        s.append(SlotSpec("cost", domain, NUMERIC, True, True))
        s.append(SlotSpec("dishes", domain, MULTI_VALUE, True, True))
    else:
        s.append(SlotSpec("price", domain, NUMERIC, True, True))
        s.append(SlotSpec("type", domain, SCALAR_TEXT, True, True))
        for svc in HOTEL_SERVICES:
            s.append(SlotSpec(svc, domain, BOOLEAN_SERVICE, True, True))
    s.append(SlotSpec("address", domain, SCALAR_TEXT, False, True))
    s.append(SlotSpec("phone", domain, SCALAR_TEXT, False, True))
    if domain == RESTAURANT:
        s.append(SlotSpec("open", domain, SCALAR_TEXT, False, True))
    s.append(SlotSpec(NEARBY_SLOTS[ATTRACTION], domain, NEARBY_LIST, False, True))
    s.append(SlotSpec(NEARBY_SLOTS[RESTAURANT], domain, NEARBY_LIST, False, True))
    if domain != HOTEL:
        # Hotels list nearby attractions and restaurants but not other hotels.
        s.append(SlotSpec(NEARBY_SLOTS[HOTEL], domain, NEARBY_LIST, False, True))
    return s


def _traffic_slots(domain: str) -> list[SlotSpec]:
    s = [
        SlotSpec("from", domain, SCALAR_TEXT, True, False, True),
        SlotSpec("to", domain, SCALAR_TEXT, True, False, True),
    ]
    if domain == TAXI:
        s.append(SlotSpec("car type", domain, SCALAR_TEXT, False, True))
        s.append(SlotSpec("plate number", domain, SCALAR_TEXT, False, True))
    else:
        s.append(SlotSpec("from station", domain, SCALAR_TEXT, False, True))
        s.append(SlotSpec("to station", domain, SCALAR_TEXT, False, True))
    return s


SLOTS: dict[str, list[SlotSpec]] = {
    ATTRACTION: _venue_slots(ATTRACTION),
    RESTAURANT: _venue_slots(RESTAURANT),
    HOTEL: _venue_slots(HOTEL),
    TAXI: _traffic_slots(TAXI),
    METRO: _traffic_slots(METRO),
}

_BY_NAME = {(d, s.name): s for d, specs in SLOTS.items() for s in specs}


def slot_spec(domain: str, slot: str) -> SlotSpec:
    try:
        return _BY_NAME[(domain, slot)]
    except KeyError:
        raise KeyError(f"unknown slot {slot!r} for domain {domain!r}") from None


def has_slot(domain: str, slot: str) -> bool:
    return (domain, slot) in _BY_NAME


def informable_slots(domain: str) -> list[SlotSpec]:
    return [s for s in SLOTS[domain] if s.informable]


def requestable_slots(domain: str) -> list[SlotSpec]:
    return [s for s in SLOTS[domain] if s.requestable]


# Direction a numeric constraint takes, intrinsic to the slot: a rating bound
# is a floor, money and time bounds are caps.
NUMERIC_DIRECTIONS = {
    "rating": "at-least",
    "fee": "at-most",
    "cost": "at-most",
    "price": "at-most",
    "duration": "at-most",
}

CORPUS_SCHEMA_VERSION = "1.0"
DB_SCHEMA_VERSION = "1.0"
API_VERSION = "1.0"
