"""Synthetic venue database: entities, nearby graph, constraint queries.

Entities live on the unit square (torus metric, so expected neighbour counts
are size * pi * r^2 with no boundary bias). Two entities are nearby when their
distance falls below a per-domain-pair threshold calibrated so average nearby
counts hit configurable targets. Hotels do not list other hotels, so the
hotel-hotel pair has no threshold at all. The metro layer is a set of named
station points; each venue is tagged with its nearest station.

Taxi and metro hold no stored entities: taxi values are synthesized on demand
and metro answers come from the nearest-station map.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from . import schema, values as V

DEFAULT_SIZES = {"attraction": 465, "restaurant": 951, "hotel": 1133}

# Directed average-nearby targets: TARGETS[(d, e)] is the average number of
# e-domain neighbours per d-domain entity.
DEFAULT_NEARBY_TARGETS = {
    ("attraction", "attraction"): 4.7,
    ("attraction", "restaurant"): 6.7,
    ("attraction", "hotel"): 2.1,
    ("restaurant", "attraction"): 3.3,
    ("restaurant", "restaurant"): 4.1,
    ("restaurant", "hotel"): 2.4,
    ("hotel", "attraction"): 0.8,
    ("hotel", "restaurant"): 2.0,
}

DEFAULT_STATIONS = 60

EQUALS = "equals"
AT_LEAST = "at-least"
AT_MOST = "at-most"
CONTAINS = "contains"
IS_YES = "is-yes"
NEARBY_OF = "nearby-of"

MATCHERS = (EQUALS, AT_LEAST, AT_MOST, CONTAINS, IS_YES, NEARBY_OF)


class DatabaseFormatError(ValueError):
    pass


class QueryError(ValueError):
    pass


@dataclass
class Entity:
    id: str
    domain: str
    values: dict
    nearby: dict[str, list[str]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"id": self.id, "domain": self.domain, "values": self.values,
                "nearby": self.nearby}

    @classmethod
    def from_dict(cls, d: dict) -> "Entity":
        return cls(id=d["id"], domain=d["domain"], values=dict(d["values"]),
                   nearby={k: list(v) for k, v in d.get("nearby", {}).items()})


@dataclass
class Database:
    domains: dict[str, list[Entity]]
    metro_stations: dict[str, str] = field(default_factory=dict)
    generation: dict = field(default_factory=dict)

    def __post_init__(self):
        self._by_id = {e.id: e for es in self.domains.values() for e in es}
        self._by_name = {(e.domain, e.values.get("name")): e
                         for es in self.domains.values() for e in es}

    def entity(self, entity_id: str) -> Entity:
        return self._by_id[entity_id]

    def find_by_name(self, domain: str, name: str) -> Entity | None:
        return self._by_name.get((domain, name))

    def entities(self, domain: str) -> list[Entity]:
        return self.domains.get(domain, [])


@dataclass(frozen=True)
class Constraint:
    slot: str
    matcher: str
    value: object = None


_KIND_MATCHERS = {
    schema.SCALAR_TEXT: (EQUALS, NEARBY_OF),
    schema.NUMERIC: (EQUALS, AT_LEAST, AT_MOST),
    schema.BOOLEAN_SERVICE: (EQUALS, IS_YES),
    schema.MULTI_VALUE: (CONTAINS, EQUALS),
    schema.NEARBY_LIST: (CONTAINS,),
}


def _check_constraint(domain: str, c: Constraint) -> schema.SlotSpec:
    if not schema.has_slot(domain, c.slot):
        raise QueryError(f"unknown slot {c.slot!r} for domain {domain!r}")
    spec = schema.slot_spec(domain, c.slot)
    if c.matcher not in MATCHERS:
        raise QueryError(f"unknown matcher {c.matcher!r}")
    if c.matcher not in _KIND_MATCHERS[spec.kind]:
        raise QueryError(
            f"matcher {c.matcher!r} incompatible with {spec.kind} slot {c.slot!r}")
    if c.matcher == NEARBY_OF and not spec.cross_domain_capable:
        raise QueryError(f"nearby-of not applicable to slot {c.slot!r}")
    return spec


def _matches(db: Database, entity: Entity, c: Constraint) -> bool:
    if c.matcher == NEARBY_OF:
        try:
            anchor = db.entity(str(c.value))
        except KeyError:
            raise QueryError(f"nearby-of anchor {c.value!r} not in database") from None
        return entity.id in anchor.nearby.get(entity.domain, ())
    v = entity.values.get(c.slot)
    if c.matcher == EQUALS:
        return V.values_equal(v, c.value)
    if c.matcher == IS_YES:
        return v is True
    if c.matcher in (AT_LEAST, AT_MOST):
        ev, cv = V.parse_number(v), V.parse_number(c.value)
        if ev is None or cv is None:
            return False
        return ev >= cv if c.matcher == AT_LEAST else ev <= cv
    if c.matcher == CONTAINS:
        if not isinstance(v, (list, tuple)):
            return False
        want = V.to_act_value(c.value).lower()
        return any(V.to_act_value(x).lower() == want for x in v)
    raise QueryError(f"unknown matcher {c.matcher!r}")


def query(db: Database, domain: str, constraints: list[Constraint]) -> list[Entity]:
    """All entities of `domain` satisfying every constraint, ordered by id."""
    if domain not in schema.DOMAINS:
        raise QueryError(f"unknown domain {domain!r}")
    for c in constraints:
        _check_constraint(domain, c)
    out = [e for e in db.entities(domain)
           if all(_matches(db, e, c) for c in constraints)]
    return sorted(out, key=lambda e: e.id)


def query_first(db: Database, domain: str, constraints: list[Constraint]) -> Entity | None:
    for c in constraints:
        _check_constraint(domain, c)
    for e in db.entities(domain):
        if all(_matches(db, e, c) for c in constraints):
            return e
    return None


def pick_witness(db: Database, domain: str, constraints: list[Constraint],
                 rng: random.Random) -> Entity | None:
    """A satisfying entity chosen from a random scan offset (cheap, seeded)."""
    for c in constraints:
        _check_constraint(domain, c)
    ents = db.entities(domain)
    if not ents:
        return None
    start = rng.randrange(len(ents))
    for k in range(len(ents)):
        e = ents[(start + k) % len(ents)]
        if all(_matches(db, e, c) for c in constraints):
            return e
    return None


def constraint_for(domain: str, slot: str, value) -> Constraint:
    """Map an act-style (slot, value) pair to its intrinsic constraint.

    Numeric slots constrain in their natural direction (rating is a floor,
    money and time are caps), list slots by containment, everything else by
    equality.
    """
    spec = schema.slot_spec(domain, slot)
    if spec.kind == schema.NUMERIC:
        direction = schema.NUMERIC_DIRECTIONS.get(slot, "at-least")
        return Constraint(slot, AT_LEAST if direction == "at-least" else AT_MOST, value)
    if spec.kind == schema.MULTI_VALUE:
        return Constraint(slot, CONTAINS, value)
    return Constraint(slot, EQUALS, value)


def value_of(db: Database, entity: Entity, slot: str) -> str:
    """Canonical act-string for an entity slot; nearby slots resolve to names."""
    spec = schema.slot_spec(entity.domain, slot)
    if spec.kind == schema.NEARBY_LIST:
        dom = next(d for d, s in schema.NEARBY_SLOTS.items() if s == slot)
        names = [db.entity(i).values["name"] for i in entity.nearby.get(dom, [])]
        return V.to_act_value(names) if names else "none"
    return V.to_act_value(entity.values.get(slot))


def nearest_station(db: Database, entity_id: str) -> str:
    try:
        return db.metro_stations[entity_id]
    except KeyError:
        raise KeyError(f"no station recorded for entity {entity_id!r}") from None


# ---------------------------------------------------------------------------
# Numeric quantile grid, used by both relaxation sides.

def numeric_grid(db: Database, domain: str, slot: str) -> list[float]:
    """Decile grid over observed values of a numeric slot (deduplicated)."""
    spec = schema.slot_spec(domain, slot)
    if spec.kind != schema.NUMERIC:
        raise QueryError(f"slot {slot!r} is not numeric")
    vals = sorted(v for v in (V.parse_number(e.values.get(slot))
                              for e in db.entities(domain)) if v is not None)
    if not vals:
        return []
    grid = []
    for q in range(11):
        idx = min(len(vals) - 1, int(round(q / 10 * (len(vals) - 1))))
        grid.append(vals[idx])
    return sorted(set(grid))


def loosen(db: Database, domain: str, slot: str, value) -> float | None:
    """One decile step in the permissive direction, or None when exhausted."""
    direction = schema.NUMERIC_DIRECTIONS.get(slot)
    cur = V.parse_number(value)
    if direction is None or cur is None:
        return None
    grid = numeric_grid(db, domain, slot)
    if direction == "at-least":
        lower = [g for g in grid if g < cur]
        return lower[-1] if lower else None
    higher = [g for g in grid if g > cur]
    return higher[0] if higher else None


# ---------------------------------------------------------------------------
# Synthetic generation.

def _torus_dist2(a: tuple[float, float], b: tuple[float, float]) -> float:
    dx = abs(a[0] - b[0])
    dy = abs(a[1] - b[1])
    dx = min(dx, 1.0 - dx)
    dy = min(dy, 1.0 - dy)
    return dx * dx + dy * dy


def _pair_radius(d: str, e: str, sizes: dict, targets: dict) -> float:
    """Symmetric threshold for the (d, e) domain pair from directed targets."""
    if d == e:
        n = sizes[d] - 1
        if n <= 0 or targets.get((d, d), 0) <= 0:
            return 0.0
        area = targets[(d, d)] / n
    else:
        pieces = []
        if (d, e) in targets and sizes[e] > 0:
            pieces.append(targets[(d, e)] / sizes[e])
        if (e, d) in targets and sizes[d] > 0:
            pieces.append(targets[(e, d)] / sizes[d])
        if not pieces:
            return 0.0
        area = sum(pieces) / len(pieces)
    return math.sqrt(max(area, 0.0) / math.pi)


def _make_names(rng: random.Random, domain: str, n: int) -> list[str]:
    if domain == "attraction":
        kinds = V.ATTRACTION_KINDS
    elif domain == "restaurant":
        kinds = V.RESTAURANT_KINDS
    else:
        kinds = V.HOTEL_KINDS
    combos = [(a, b, k) for a in V.ADJECTIVES for b in V.ATTRACTION_NOUNS
              for k in kinds]
    if n > len(combos):
        raise ValueError(f"cannot name {n} unique {domain} entities")
    picks = rng.sample(combos, n)
    return [f"{a} {b} {k}" for a, b, k in picks]


_SERVICE_PROBS = [0.2 + 0.6 * (i % 5) / 4 for i in range(len(schema.HOTEL_SERVICES))]


def _entity_values(rng: random.Random, domain: str, name: str) -> dict:
    vals: dict = {"name": name}
    vals["rating"] = round(rng.triangular(3.0, 5.0, 4.6), 1)
    if domain == "attraction":
        vals["fee"] = "free" if rng.random() < 0.3 else rng.randrange(5, 125, 5)
        vals["duration"] = rng.choice([0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0])
    elif domain == "restaurant":
        vals["cost"] = int(rng.triangular(15, 300, 60))
        vals["dishes"] = rng.sample(V.DISHES, rng.randint(3, 8))
        h1, h2 = rng.randint(6, 11), rng.randint(20, 23)
        vals["open"] = f"{h1:02d}:00-{h2:02d}:00"
    else:
        vals["price"] = int(rng.triangular(80, 1600, 350))
        vals["type"] = rng.choice(V.HOTEL_TYPES)
        for svc, p in zip(schema.HOTEL_SERVICES, _SERVICE_PROBS):
            vals[svc] = rng.random() < p
    street = rng.choice(V.STREETS)
    district = rng.choice(V.DISTRICTS)
    vals["address"] = f"{rng.randrange(1, 400)} {street} Street, {district} District"
    vals["phone"] = f"010-{rng.randrange(10**7, 10**8)}"
    return vals


def _grid_neighbours(coords: dict[str, tuple[float, float]],
                     ids_a: list[str], ids_b: list[str], r: float):
    """Yield (id_a, id_b) pairs within torus distance r (id_a != id_b)."""
    if r <= 0:
        return
    ncell = max(1, int(1.0 / r))
    cell = 1.0 / ncell
    buckets: dict[tuple[int, int], list[str]] = {}
    for i in ids_b:
        x, y = coords[i]
        buckets.setdefault((int(x / cell) % ncell, int(y / cell) % ncell), []).append(i)
    r2 = r * r
    for a in ids_a:
        x, y = coords[a]
        cx, cy = int(x / cell) % ncell, int(y / cell) % ncell
        seen = set()
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                key = ((cx + dx) % ncell, (cy + dy) % ncell)
                if key in seen:
                    continue
                seen.add(key)
                for b in buckets.get(key, ()):
                    if b != a and _torus_dist2(coords[a], coords[b]) < r2:
                        yield a, b


def generate_database(seed: int, sizes: dict | None = None,
                      nearby_targets: dict | None = None,
                      n_stations: int = DEFAULT_STATIONS) -> Database:
    """Build a deterministic synthetic database.

    `sizes` maps venue domain to entity count; `nearby_targets` maps directed
    domain pairs to desired average nearby counts (defaults reproduce the
    stock magnitudes). Every entity gets coordinates, typed slot values, a
    mutual nearby graph and a nearest metro station.
    """
    sizes = dict(DEFAULT_SIZES, **(sizes or {}))
    targets = dict(DEFAULT_NEARBY_TARGETS, **(nearby_targets or {}))
    for d, n in sizes.items():
        if d not in schema.VENUE_DOMAINS:
            raise ValueError(f"unknown venue domain {d!r}")
        if n < 0:
            raise ValueError(f"negative size for {d!r}")
    rng = random.Random(seed)

    coords: dict[str, tuple[float, float]] = {}
    domains: dict[str, list[Entity]] = {d: [] for d in schema.DOMAINS}
    for domain in schema.VENUE_DOMAINS:
        names = _make_names(rng, domain, sizes[domain])
        for i in range(sizes[domain]):
            eid = f"{domain}-{i + 1:04d}"
            coords[eid] = (rng.random(), rng.random())
            vals = _entity_values(rng, domain, names[i])
            if domain == "hotel":
                nearby = {"attraction": [], "restaurant": []}
            else:
                nearby = {"attraction": [], "restaurant": [], "hotel": []}
            domains[domain].append(Entity(eid, domain, vals, nearby))

    ids = {d: [e.id for e in domains[d]] for d in schema.VENUE_DOMAINS}
    thresholds = {}
    pairs = [("attraction", "attraction"), ("attraction", "restaurant"),
             ("attraction", "hotel"), ("restaurant", "restaurant"),
             ("restaurant", "hotel")]
    by_id = {e.id: e for es in domains.values() for e in es}
    for d, e in pairs:
        r = _pair_radius(d, e, sizes, targets)
        thresholds[f"{d}|{e}"] = r
        if d == e:
            for a, b in _grid_neighbours(coords, ids[d], ids[e], r):
                by_id[a].nearby[e].append(b)
        else:
            for a, b in _grid_neighbours(coords, ids[d], ids[e], r):
                by_id[a].nearby[e].append(b)
                by_id[b].nearby[d].append(a)
    for ent in by_id.values():
        for k in ent.nearby:
            ent.nearby[k] = sorted(set(ent.nearby[k]))

    station_combos = [(a, b) for a in V.ADJECTIVES for b in V.STATION_NOUNS]
    n_stations = min(n_stations, len(station_combos))
    station_names = [f"{a} {b} Station" for a, b in rng.sample(station_combos, n_stations)]
    station_pts = {name: (rng.random(), rng.random()) for name in station_names}
    metro_stations = {}
    if station_pts:
        for eid, pt in coords.items():
            metro_stations[eid] = min(
                station_pts, key=lambda s: (_torus_dist2(pt, station_pts[s]), s))

    generation = {
        "seed": seed,
        "sizes": sizes,
        "nearby_targets": {f"{a}|{b}": v for (a, b), v in sorted(targets.items())},
        "thresholds": thresholds,
        "coords": {k: list(v) for k, v in coords.items()},
        "stations": {k: list(v) for k, v in station_pts.items()},
    }
    return Database(domains=domains, metro_stations=metro_stations,
                    generation=generation)


# ---------------------------------------------------------------------------
# Serialization.

def to_json(db: Database) -> dict:
    return {
        "schema_version": schema.DB_SCHEMA_VERSION,
        "domains": {d: [e.to_dict() for e in db.domains.get(d, [])]
                    for d in schema.DOMAINS},
        "metro_stations": dict(sorted(db.metro_stations.items())),
        "generation": db.generation,
    }


def from_json(data: dict) -> Database:
    if not isinstance(data, dict) or "domains" not in data:
        raise DatabaseFormatError("not a database file: missing 'domains'")
    version = data.get("schema_version")
    if version != schema.DB_SCHEMA_VERSION:
        raise DatabaseFormatError(
            f"schema version {version!r} unsupported (want {schema.DB_SCHEMA_VERSION!r})")
    domains: dict[str, list[Entity]] = {}
    seen = set()
    for d, records in data["domains"].items():
        if d not in schema.DOMAINS:
            raise DatabaseFormatError(f"unknown domain {d!r}")
        domains[d] = []
        for rec in records:
            ent = Entity.from_dict(rec)
            if ent.id in seen:
                raise DatabaseFormatError(f"duplicate entity id {ent.id!r}")
            seen.add(ent.id)
            domains[d].append(ent)
        domains[d].sort(key=lambda e: e.id)
    return Database(domains=domains,
                    metro_stations=dict(data.get("metro_stations", {})),
                    generation=dict(data.get("generation", {})))


def save_database(db: Database, path: str) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(to_json(db), f, ensure_ascii=False, indent=2)
        f.write("\n")


def load_database(path: str) -> Database:
    with open(path, encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise DatabaseFormatError(f"malformed database file: {e}") from e
    return from_json(data)
