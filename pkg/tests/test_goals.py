import random

import pytest

from crossdial import database as dbm
from crossdial import goals as G
from crossdial import schema


def test_parse_ref():
    assert G.parse_ref("near (id=3)") == ("nearby", 3)
    assert G.parse_ref("(id=2)") == ("at-entity", 2)
    assert G.parse_ref("") is None
    assert G.parse_ref("free") is None
    assert G.parse_ref("nearby") is None


def test_ref_constructors_round_trip():
    assert G.parse_ref(G.make_nearby_ref(4)) == ("nearby", 4)
    assert G.parse_ref(G.make_entity_ref(1)) == ("at-entity", 1)


def test_semantic_tuple_row_round_trip():
    t = G.SemanticTuple(2, "hotel", "price", "400", False)
    assert t.as_row() == [2, "hotel", "price", "400", False]
    back = G.SemanticTuple.from_row(t.as_row())
    assert back == t
    assert not t.is_blank()
    assert G.SemanticTuple(1, "hotel", "name", "", False).is_blank()


def test_goal_types_taxonomy():
    assert G.GOAL_TYPES == ("S", "M", "M+T", "CM", "CM+T")


def _structurally_sound(goal: G.UserGoal) -> bool:
    # Deliberately independent of goals.validate_goal.
    if not 1 <= len(goal.subgoals) <= 5:
        return False
    seen: set[int] = set()
    for sg in goal.subgoals:
        for t in sg.tuples:
            r = t.ref()
            if r is not None and r[1] not in seen:
                return False
        if sg.domain in schema.TRAFFIC_DOMAINS:
            targets = {t.ref()[1] for t in sg.tuples
                       if t.slot in ("from", "to") and t.ref()}
            if len(targets) != 2:
                return False
            if any(goal.subgoal(x).domain not in schema.VENUE_DOMAINS
                   for x in targets):
                return False
        seen.add(sg.id)
    return True


def test_generated_goals_are_structurally_sound(db):
    for i in range(300):
        goal = G.generate_goal(db, G.GoalGenConfig(seed=i))
        assert _structurally_sound(goal), f"seed {i}: {goal.to_dict()}"
        assert G.validate_goal(goal) == []
        assert goal.goal_type == G.classify_goal_type(goal)


def test_generation_is_deterministic(db):
    a = G.generate_goal(db, G.GoalGenConfig(seed=42))
    b = G.generate_goal(db, G.GoalGenConfig(seed=42))
    assert a.to_dict() == b.to_dict()


def test_goal_serialization_round_trip(db):
    goal = G.generate_goal(db, G.GoalGenConfig(seed=5))
    back = G.UserGoal.from_dict(goal.to_dict())
    assert back.to_dict() == goal.to_dict()
    assert [sg.id for sg in back.subgoals] == [sg.id for sg in goal.subgoals]


def test_witnesses_satisfy_their_subgoals(db):
    # Every venue sub-goal hides a witness entity that meets all its
    # concrete constraints, including the nearby anchoring.
    rng = random.Random(0)
    for seed in rng.sample(range(10_000), 40):
        goal = G.generate_goal(db, G.GoalGenConfig(seed=seed))
        witnesses = goal.witnesses()
        for sg in goal.subgoals:
            if sg.domain not in schema.VENUE_DOMAINS:
                continue
            assert sg.id in witnesses
            cons = []
            for t in sg.tuples:
                if t.is_blank():
                    continue
                r = t.ref()
                if r is None:
                    cons.append(dbm.constraint_for(sg.domain, t.slot, t.value))
                elif r[0] == "nearby":
                    cons.append(dbm.Constraint("name", dbm.NEARBY_OF,
                                               witnesses[r[1]]))
            hits = {e.id for e in dbm.query(db, sg.domain, cons)}
            assert witnesses[sg.id] in hits, \
                f"seed {seed} sub-goal {sg.id} witness misses its constraints"


def test_venue_subgoals_request_something(db):
    for seed in range(50):
        goal = G.generate_goal(db, G.GoalGenConfig(seed=seed))
        for sg in goal.subgoals:
            if sg.domain in schema.VENUE_DOMAINS:
                assert sg.blanks()


def test_traffic_subgoals_link_prior_venues_and_request_travel_info(db):
    seen_any = False
    for seed in range(120):
        goal = G.generate_goal(db, G.GoalGenConfig(seed=seed))
        for sg in goal.subgoals:
            if sg.domain not in schema.TRAFFIC_DOMAINS:
                continue
            seen_any = True
            earlier = {x.id for x in
                       goal.subgoals[:goal.subgoals.index(sg)]
                       if x.domain in schema.VENUE_DOMAINS}
            targets = {t.ref()[1] for t in sg.tuples
                       if t.slot in ("from", "to") and t.ref()}
            assert len(targets) == 2 and targets <= earlier
            slots = {t.slot for t in sg.tuples}
            if sg.domain == "taxi":
                assert {"car type", "plate number"} <= slots
            else:
                assert {"from station", "to station"} <= slots
    assert seen_any


def test_classify_goal_type_fixtures():
    def sg(i, domain, tuples):
        return G.SubGoal(i, domain, [G.SemanticTuple(i, domain, s, v, False)
                                     for s, v in tuples])

    single = G.UserGoal([sg(1, "hotel", [("price", "400"), ("name", "")])])
    assert G.classify_goal_type(single) == "S"

    multi = G.UserGoal([
        sg(1, "hotel", [("name", "")]),
        sg(2, "restaurant", [("name", "")]),
    ])
    assert G.classify_goal_type(multi) == "M"

    cross = G.UserGoal([
        sg(1, "attraction", [("name", "")]),
        sg(2, "hotel", [("name", ""), ("nearby attractions", "")]),
    ])
    cross.subgoals[1].tuples.append(
        G.SemanticTuple(2, "hotel", "name", G.make_nearby_ref(1), False))
    assert G.classify_goal_type(cross) == "CM"

    traffic = G.UserGoal([
        sg(1, "hotel", [("name", "")]),
        sg(2, "attraction", [("name", "")]),
        G.SubGoal(3, "taxi", [
            G.SemanticTuple(3, "taxi", "from", G.make_entity_ref(1), False),
            G.SemanticTuple(3, "taxi", "to", G.make_entity_ref(2), False),
            G.SemanticTuple(3, "taxi", "car type", "", False),
        ]),
    ])
    assert G.classify_goal_type(traffic) == "M+T"


def test_validate_goal_flags_violations():
    bad = G.UserGoal([G.SubGoal(1, "hotel", [
        G.SemanticTuple(1, "hotel", "name", G.make_nearby_ref(9), False),
    ])])
    problems = G.validate_goal(bad)
    assert any("missing sub-goal" in p for p in problems)

    too_many = G.UserGoal([
        G.SubGoal(i, "hotel", [G.SemanticTuple(i, "hotel", "name", "", False)])
        for i in range(1, 7)])
    assert any("exceeds" in p for p in G.validate_goal(too_many))


def test_reorder_subgoals_puts_referents_first():
    a = G.SubGoal(1, "attraction",
                  [G.SemanticTuple(1, "attraction", "name", "", False)])
    b = G.SubGoal(2, "hotel", [
        G.SemanticTuple(2, "hotel", "name", G.make_nearby_ref(1), False)])
    ordered = G.reorder_subgoals([b, a])
    ids = [sg.id for sg in ordered]
    assert ids.index(1) < ids.index(2)


def test_generate_goal_descriptions_mention_domains(db):
    goal = G.generate_goal(db, G.GoalGenConfig(seed=9))
    assert goal.description
    for sg in goal.subgoals:
        assert sg.domain in goal.description.lower()


def test_retry_budget_error(db):
    cfg = G.GoalGenConfig(seed=0, retry_budget=0)
    with pytest.raises(G.GoalGenerationError):
        for seed in range(50):
            cfg = G.GoalGenConfig(seed=seed, retry_budget=0)
            G.generate_goal(db, cfg)
