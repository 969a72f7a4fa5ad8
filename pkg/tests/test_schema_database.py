import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crossdial import database as dbm
from crossdial import schema
from crossdial import values as V


def test_domain_inventory():
    assert schema.DOMAINS == ("attraction", "restaurant", "hotel",
                              "taxi", "metro")
    assert schema.VENUE_DOMAINS == ("attraction", "restaurant", "hotel")
    assert schema.TRAFFIC_DOMAINS == ("taxi", "metro")


def test_hotel_has_37_service_slots():
    services = [s for s in schema.SLOTS["hotel"]
                if s.kind == schema.BOOLEAN_SERVICE]
    assert len(services) == 37
    assert len(schema.HOTEL_SERVICES) == 37
    assert len(set(schema.HOTEL_SERVICES)) == 37


def test_nearby_slots_follow_venue_asymmetry():
    # Hotels list nearby attractions/restaurants but nothing lists "nearby
    # hotels" from the hotel domain itself.
    names = {s.name for s in schema.SLOTS["hotel"]}
    assert "nearby attractions" in names
    assert "nearby restaurants" in names
    assert "nearby hotels" not in names
    for d in ("attraction", "restaurant"):
        assert "nearby hotels" in {s.name for s in schema.SLOTS[d]}
    assert not schema.has_slot("hotel", "nearby hotels")


def test_slot_spec_lookup_and_errors():
    spec = schema.slot_spec("hotel", "price")
    assert spec.kind == schema.NUMERIC
    assert spec.informable
    with pytest.raises(KeyError):
        schema.slot_spec("hotel", "fee")
    assert schema.has_slot("attraction", "fee")
    assert not schema.has_slot("taxi", "price")


def test_default_database_sizes(db):
    assert len(db.entities("attraction")) == 465
    assert len(db.entities("restaurant")) == 951
    assert len(db.entities("hotel")) == 1133
    # Traffic domains hold no stored entities; they are computed on demand.
    assert db.entities("taxi") == []
    assert db.entities("metro") == []
    assert len(db.metro_stations) == len(db._by_id)


def test_generation_is_deterministic(db):
    again = dbm.generate_database(seed=7)
    assert (json.dumps(dbm.to_json(db), sort_keys=True)
            == json.dumps(dbm.to_json(again), sort_keys=True))


def test_save_load_round_trip(db, tmp_path):
    path = tmp_path / "db.json"
    dbm.save_database(db, path)
    back = dbm.load_database(path)
    assert json.dumps(dbm.to_json(back), sort_keys=True) \
        == json.dumps(dbm.to_json(db), sort_keys=True)


def test_query_against_brute_force_numeric(db):
    # Independent oracle: direct float comparisons over the raw values.
    want = {e.id for e in db.entities("hotel")
            if float(e.values["rating"]) >= 4.5}
    got = dbm.query(db, "hotel", [dbm.constraint_for("hotel", "rating", 4.5)])
    assert {e.id for e in got} == want
    assert len(got) == 397


def test_query_against_brute_force_conjunction(db):
    want = {e.id for e in db.entities("hotel")
            if float(e.values["rating"]) >= 4.5
            and float(e.values["price"]) <= 300}
    got = dbm.query(db, "hotel", [
        dbm.constraint_for("hotel", "rating", 4.5),
        dbm.constraint_for("hotel", "price", 300)])
    assert {e.id for e in got} == want
    assert len(got) == 55


def test_query_fee_cap_includes_free(db):
    want = {e.id for e in db.entities("attraction")
            if (0.0 if e.values["fee"] == "free"
                else float(e.values["fee"])) <= 20}
    got = dbm.query(db, "attraction",
                    [dbm.constraint_for("attraction", "fee", 20)])
    assert {e.id for e in got} == want
    assert len(got) == 201


def test_query_service_and_dishes(db):
    svc = schema.HOTEL_SERVICES[0]
    want = {e.id for e in db.entities("hotel") if e.values[svc] is True}
    got = dbm.query(db, "hotel", [dbm.Constraint(svc, dbm.IS_YES)])
    assert {e.id for e in got} == want

    dish = db.entities("restaurant")[0].values["dishes"][0]
    want = {e.id for e in db.entities("restaurant")
            if dish in e.values["dishes"]}
    got = dbm.query(db, "restaurant",
                    [dbm.constraint_for("restaurant", "dishes", dish)])
    assert {e.id for e in got} == want
    assert got


def test_query_name_equality(db):
    e = db.entities("restaurant")[5]
    got = dbm.query(db, "restaurant",
                    [dbm.constraint_for("restaurant", "name", e.values["name"])])
    assert [x.id for x in got] == [e.id]


def test_query_nearby_of(db):
    anchor = next(e for e in db.entities("attraction")
                  if e.nearby.get("restaurant"))
    got = dbm.query(db, "restaurant",
                    [dbm.Constraint("name", dbm.NEARBY_OF, anchor.id)])
    assert {e.id for e in got} == set(anchor.nearby["restaurant"])


def test_query_validation_errors(db):
    with pytest.raises(dbm.QueryError):
        dbm.query(db, "museum", [])
    with pytest.raises(dbm.QueryError):
        dbm.query(db, "hotel", [dbm.Constraint("fee", dbm.AT_MOST, 10)])
    with pytest.raises(dbm.QueryError):
        dbm.query(db, "hotel", [dbm.Constraint("name", dbm.AT_LEAST, 1)])
    with pytest.raises(dbm.QueryError):
        dbm.query(db, "hotel", [dbm.Constraint("name", "between", 1)])
    with pytest.raises(dbm.QueryError):
        dbm.query(db, "hotel",
                  [dbm.Constraint("name", dbm.NEARBY_OF, "no-such-id")])


def test_query_results_sorted_and_stable(db):
    got = dbm.query(db, "hotel", [dbm.constraint_for("hotel", "rating", 4.0)])
    ids = [e.id for e in got]
    assert ids == sorted(ids)
    assert ids == [e.id for e in dbm.query(
        db, "hotel", [dbm.constraint_for("hotel", "rating", 4.0)])]


def _constraint_pool(db):
    pool = []
    rng = random.Random(11)
    hotels = db.entities("hotel")
    pool.append(dbm.constraint_for("hotel", "rating", 4.0))
    pool.append(dbm.constraint_for("hotel", "rating", 4.6))
    pool.append(dbm.constraint_for("hotel", "price", 400))
    pool.append(dbm.constraint_for("hotel", "price", 250))
    pool.append(dbm.constraint_for("hotel", "type",
                                   rng.choice(hotels).values["type"]))
    for svc in rng.sample(schema.HOTEL_SERVICES, 6):
        pool.append(dbm.Constraint(svc, dbm.IS_YES))
    return pool


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_adding_constraints_never_grows_results(small_db, data):
    pool = _constraint_pool(small_db)
    picks = data.draw(st.lists(st.integers(0, len(pool) - 1),
                               min_size=1, max_size=4))
    cons = []
    prev = {e.id for e in small_db.entities("hotel")}
    for i in picks:
        cons.append(pool[i])
        cur = {e.id for e in dbm.query(small_db, "hotel", cons)}
        assert cur <= prev
        prev = cur


def test_nearby_graph_is_mutual(db):
    for domain in schema.VENUE_DOMAINS:
        for e in db.entities(domain):
            for other_domain, ids in e.nearby.items():
                for i in ids:
                    other = db.entity(i)
                    assert e.id in other.nearby.get(domain, ()), \
                        f"{e.id} lists {i} but not vice versa"


def test_nearby_excludes_self(db):
    for e in db.entities("attraction"):
        assert e.id not in e.nearby.get("attraction", ())


def test_numeric_grid_and_loosen(db):
    grid = dbm.numeric_grid(db, "hotel", "rating")
    assert grid == sorted(set(grid))
    assert grid == [3.1, 3.6, 3.8, 4.0, 4.1, 4.3, 4.4, 4.5, 4.6, 4.7, 5.0]
    # Floors loosen downward, caps loosen upward, both stop at the edge.
    assert dbm.loosen(db, "hotel", "rating", 4.5) == 4.4
    assert dbm.loosen(db, "hotel", "rating", grid[0]) is None
    assert dbm.loosen(db, "hotel", "price", 150) == 268.0
    price_grid = dbm.numeric_grid(db, "hotel", "price")
    assert dbm.loosen(db, "hotel", "price", price_grid[-1]) is None
    assert dbm.loosen(db, "hotel", "name", "x") is None


def test_value_of_resolves_nearby_names(db):
    e = next(e for e in db.entities("attraction")
             if e.nearby.get("restaurant"))
    listed = dbm.value_of(db, e, "nearby restaurants")
    first = db.entity(e.nearby["restaurant"][0]).values["name"]
    assert first in listed
    empty = next((x for x in db.entities("attraction")
                  if not x.nearby.get("restaurant")), None)
    if empty is not None:
        assert dbm.value_of(db, empty, "nearby restaurants") == "none"


def test_nearest_station(db):
    e = db.entities("hotel")[0]
    assert dbm.nearest_station(db, e.id)
    with pytest.raises(KeyError):
        dbm.nearest_station(db, "missing")


def test_value_helpers():
    assert V.parse_number("free") == 0.0
    assert V.parse_number("4.5") == 4.5
    assert V.parse_number(True) is None
    assert V.values_equal(4.5, "4.5")
    assert V.values_equal("free", "free")
    assert not V.values_equal("4", "5")
