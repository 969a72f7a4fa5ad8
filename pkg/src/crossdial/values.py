"""Synthetic value pools and value-string canonicalization.

Dialogue acts and goal tuples carry plain strings; database entities carry
typed values. The helpers here convert between the two and supply the word
pools the synthetic database generator draws from.
"""

from __future__ import annotations

import re

# ---------------------------------------------------------------------------
# Word pools for synthetic entities.

ADJECTIVES = (
    "Golden", "Jade", "Silver", "Crimson", "Azure", "Emerald", "Ivory",
    "Scarlet", "Amber", "Misty", "Sunny", "Tranquil", "Ancient", "Royal",
    "Grand", "Hidden", "Whispering", "Blooming", "Radiant", "Peaceful",
    "Northern", "Southern", "Eastern", "Western", "Central", "Imperial",
    "Lucky", "Harmonious", "Serene", "Vermilion", "Celadon", "Twilight",
)

ATTRACTION_NOUNS = (
    "Lotus", "Dragon", "Phoenix", "Pine", "Willow", "Crane", "Tiger",
    "Cloud", "Moon", "Star", "River", "Mountain", "Spring", "Bamboo",
    "Plum", "Orchid", "Pearl", "Stone", "Maple", "Ginkgo",
)

ATTRACTION_KINDS = (
    "Park", "Pavilion", "Temple", "Museum", "Garden", "Tower", "Palace",
    "Lake", "Bridge", "Gallery", "Courtyard", "Monument",
)

RESTAURANT_KINDS = (
    "Noodle House", "Teahouse", "Grill", "Kitchen", "Bistro", "Dumpling Bar",
    "Hotpot Hall", "Canteen", "Diner", "Eatery", "Banquet Hall", "Snack Shop",
)

HOTEL_KINDS = (
    "Hotel", "Inn", "Lodge", "Guesthouse", "Resort", "Courtyard Hotel",
    "Business Hotel", "Boutique Hotel",
)

HOTEL_TYPES = ("luxury", "comfort", "economy", "boutique", "hostel")

DISHES = (
    "roast duck", "kung pao chicken", "hand-pulled noodles", "mapo tofu",
    "dumplings", "hotpot", "sweet and sour pork", "braised eggplant",
    "scallion pancakes", "wonton soup", "fried rice", "spring rolls",
    "twice-cooked pork", "steamed fish", "beef noodle soup", "baozi",
    "peking spare ribs", "tea-smoked duck", "garlic broccoli", "egg tarts",
    "sesame chicken", "dan dan noodles", "congee", "lamb skewers",
    "crispy tofu", "drunken shrimp", "salt and pepper squid", "jianbing",
    "mooncakes", "pickled cucumber", "cold sesame noodles", "candied hawthorn",
    "stir-fried greens", "chestnut chicken", "lotus root salad", "rice cakes",
    "red bean buns", "smoked plum juice", "millet porridge", "tofu pudding",
)

STREETS = (
    "Chang'an", "Willow", "Market", "Harmony", "Lantern", "Canal", "Temple",
    "Orchard", "Bell Tower", "Drum", "Mulberry", "Wharf", "Garden", "Academy",
)

DISTRICTS = (
    "Lakeside", "Old Town", "Riverside", "Hillcrest", "Harbor", "Midtown",
    "Northgate", "Southgate", "Eastwood", "Westbrook",
)

STATION_NOUNS = (
    "Lotus", "Dragon", "Phoenix", "Bell Tower", "Drum Tower", "Canal",
    "Academy", "Harbor", "Temple", "Market", "Stadium", "Library", "Zoo",
    "Exhibition", "Terrace", "Gate", "Plaza", "Crossing", "Hill", "Wharf",
)

CAR_TYPES = ("compact sedan", "midsize sedan", "SUV", "electric sedan", "minivan")

# ---------------------------------------------------------------------------
# Canonical act-value strings.

_CJK = re.compile(r"[一-鿿㐀-䶿]")


def to_act_value(value) -> str:
    """Render a typed value in the canonical string form used in acts and tuples."""
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        if value == int(value):
            return str(int(value))
        return f"{value:g}"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(to_act_value(v) for v in value)
    return str(value)


def parse_number(value) -> float | None:
    """Best-effort numeric reading of an act value. 'free' counts as 0."""
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return float(value)
    s = str(value).strip().lower()
    if s == "free":
        return 0.0
    m = re.search(r"-?\d+(?:\.\d+)?", s)
    return float(m.group()) if m else None


def values_equal(a, b) -> bool:
    """Equality on canonical strings, with numeric fallback ('4.0' == '4')."""
    sa, sb = to_act_value(a), to_act_value(b)
    if sa == sb:
        return True
    na, nb = parse_number(sa), parse_number(sb)
    if na is not None and nb is not None:
        return na == nb
    return sa.lower() == sb.lower()


def tokenize(text: str) -> list[str]:
    """Character tokens for CJK runs, whitespace tokens otherwise."""
    tokens: list[str] = []
    for chunk in text.split():
        if _CJK.search(chunk):
            buf = ""
            for ch in chunk:
                if _CJK.match(ch):
                    if buf:
                        tokens.append(buf)
                        buf = ""
                    tokens.append(ch)
                else:
                    buf += ch
            if buf:
                tokens.append(buf)
        else:
            tokens.append(chunk)
    return tokens
