import pytest

from crossdial import acts as A
from crossdial import goals as G
from crossdial import user as U


def sg(i, domain, rows, witness=None):
    tuples = [G.SemanticTuple(i, domain, s, v, False) for s, v in rows]
    return G.SubGoal(i, domain, tuples, witness)


def goal_of(*subgoals):
    g = G.UserGoal(list(subgoals))
    g.goal_type = G.classify_goal_type(g)
    return g


def test_init_state_isolates_the_goal(db):
    goal = goal_of(sg(1, "hotel", [("price", "400"), ("name", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    state.subgoals[0].tuples[0].value = "999"
    assert goal.subgoals[0].tuples[0].value == "400"


def test_respond_expresses_constraints_before_questions(db):
    goal = goal_of(sg(1, "hotel", [("name", ""), ("price", "400"),
                                   ("rating", "4"), ("phone", "")]))
    sim = U.UserSimulator(db, seed=1)
    state = sim.init_state(goal)
    out = sim.respond(state)
    assert not out.terminated
    slots = [row[2] for row in out.selected]
    informs = [s for s in slots if s in ("price", "rating")]
    blanks = [s for s in slots if s in ("name", "phone")]
    assert informs, "first turn should lead with constraints"
    if blanks:
        assert slots.index(informs[0]) < slots.index(blanks[0])


def test_respond_act_derivation(db):
    goal = goal_of(sg(1, "hotel", [("price", "400")]))
    goal.subgoals[0].tuples.append(
        G.SemanticTuple(1, "hotel", "phone", "", False))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    seen: dict[str, A.DialogueAct] = {}
    for _ in range(4):
        out = sim.respond(state)
        for act in out.acts:
            seen[act.slot] = act
        if len(seen) >= 2:
            break
    assert seen["price"].intent == A.INFORM
    assert seen["price"].value == "400"
    assert seen["phone"].intent == A.REQUEST
    assert seen["phone"].value == A.NONE


def test_cross_reference_held_until_referent_named(db):
    goal = goal_of(
        sg(1, "attraction", [("name", ""), ("fee", "")]),
        sg(2, "restaurant", [("name", G.make_nearby_ref(1)), ("phone", "")]))
    sim = U.UserSimulator(db, seed=2)
    state = sim.init_state(goal)
    for _ in range(6):
        out = sim.respond(state)
        assert all(a.intent != A.SELECT for a in out.acts), \
            "Select before the referent has a name"
        if any(row[2] == "name" and row[0] == 1 for row in out.selected):
            break
    name = db.entities("attraction")[0].values["name"]
    sim.receive(state, [A.recommend("attraction", name)])
    assert state.subgoals[0].tuples[0].value == name
    forwarded = False
    for _ in range(6):
        out = sim.respond(state)
        if any(a.intent == A.SELECT for a in out.acts):
            act = next(a for a in out.acts if a.intent == A.SELECT)
            assert act.domain == "restaurant"
            assert act.slot == A.SRC_DOMAIN
            assert act.value == "attraction"
            forwarded = True
            break
    assert forwarded


def test_receive_inform_fills_blank(db):
    goal = goal_of(sg(1, "hotel", [("name", ""), ("phone", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    sim.receive(state, [A.inform("hotel", "phone", "010-1234")])
    assert state.subgoals[0].tuples[1].value == "010-1234"
    assert not sim.is_terminated(state)
    sim.receive(state, [A.recommend("hotel", "Any Hotel")])
    for t in state.tuples():
        t.expressed = True
    assert sim.is_terminated(state)


def test_receive_prefers_active_subgoal(db):
    goal = goal_of(
        sg(1, "restaurant", [("name", ""), ("phone", "")]),
        sg(2, "restaurant", [("name", ""), ("phone", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    sim.receive(state, [A.inform("restaurant", "phone", "123")])
    assert state.subgoals[0].tuples[1].value == "123"
    assert state.subgoals[1].tuples[1].value == ""


def test_system_request_revoices_a_constraint(db):
    goal = goal_of(sg(1, "taxi", [("from", "A Place"), ("to", "B Place"),
                                  ("car type", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    t_from = state.subgoals[0].tuples[0]
    t_from.expressed = True
    sim.receive(state, [A.request("taxi", "from")])
    assert t_from.expressed is False


def test_nooffer_drops_service_first(db):
    goal = goal_of(sg(1, "hotel", [("price", "300"), ("wake-up call", "yes"),
                                   ("name", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    sim.receive(state, [A.nooffer("hotel")])
    slots = [t.slot for t in state.subgoals[0].tuples]
    assert "wake-up call" not in slots
    assert state.goal_changed
    assert state.change_log[-1]["slot"] == "wake-up call"
    assert state.change_log[-1]["new"] is None


def test_nooffer_loosens_numeric_once_no_services_left(db):
    goal = goal_of(sg(1, "hotel", [("rating", "4.5"), ("name", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    state.subgoals[0].tuples[0].expressed = True
    sim.receive(state, [A.nooffer("hotel")])
    t = state.subgoals[0].tuples[0]
    assert t.value == "4.4"          # one decile step down the rating grid
    assert t.expressed is False      # must be re-expressed
    assert state.change_log[-1]["slot"] == "rating"


def test_nooffer_never_gives_up_names_or_references(db):
    goal = goal_of(
        sg(1, "attraction", [("name", "Some Place"), ("fee", "")]),
        sg(2, "restaurant", [("name", G.make_nearby_ref(1)), ("phone", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    for _ in range(4):
        sim.receive(state, [A.nooffer("restaurant")])
    ref = state.subgoals[1].tuples[0]
    assert ref.value == G.make_nearby_ref(1)
    assert state.subgoals[0].tuples[0].value == "Some Place"


def test_boolean_no_inform_drops_the_service(db):
    goal = goal_of(sg(1, "hotel", [("free wifi", "yes"), ("name", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    state.subgoals[0].tuples[0].expressed = True
    sim.receive(state, [A.inform("hotel", "free wifi", "no")])
    assert all(t.slot != "free wifi" for t in state.subgoals[0].tuples)
    assert state.goal_changed


def test_entity_refs_resolve_to_names_for_traffic(db):
    name_a = db.entities("attraction")[0].values["name"]
    name_b = db.entities("hotel")[0].values["name"]
    goal = goal_of(
        sg(1, "attraction", [("name", name_a), ("fee", "")]),
        sg(2, "hotel", [("name", name_b), ("phone", "")]),
        G.SubGoal(3, "taxi", [
            G.SemanticTuple(3, "taxi", "from", G.make_entity_ref(1), False),
            G.SemanticTuple(3, "taxi", "to", G.make_entity_ref(2), False),
            G.SemanticTuple(3, "taxi", "car type", "", False),
        ]))
    sim = U.UserSimulator(db, seed=4)
    state = sim.init_state(goal)
    for _ in range(20):
        out = sim.respond(state)
        for act in out.acts:
            if act.intent == A.INFORM and act.domain == "taxi":
                assert act.value in (name_a, name_b)
        for row in out.selected:
            if row[1] in ("attraction", "hotel") and row[3] == "":
                sim.receive(state, [A.inform(row[1], row[2], "filled")])
        if sim.is_terminated(state):
            break
        if all(t.expressed for t in state.tuples()):
            break
    from_tuple = state.subgoals[2].tuples[0]
    assert from_tuple.value == name_a


def test_terminal_turn_emits_thanks_and_bye(db):
    goal = goal_of(sg(1, "hotel", [("price", "400")]))
    goal.subgoals[0].tuples[0].expressed = True
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    out = sim.respond(state)
    assert out.terminated
    assert [a.as_list() for a in out.acts] == [
        ["General", "thank", "none", "none"],
        ["General", "bye", "none", "none"]]
    assert out.selected == []


def test_rerequest_when_everything_expressed_but_unfilled(db):
    goal = goal_of(sg(1, "hotel", [("phone", "")]))
    sim = U.UserSimulator(db, seed=0)
    state = sim.init_state(goal)
    first = sim.respond(state)
    assert [a.intent for a in first.acts] == [A.REQUEST]
    again = sim.respond(state)
    assert not again.terminated
    assert [a.intent for a in again.acts] == [A.REQUEST]
    assert again.selected[0][2] == "phone"


def test_respond_selection_sizes_follow_weights(db):
    goal = goal_of(sg(1, "hotel", [
        ("price", "400"), ("rating", "4"), ("type", "luxury"),
        ("name", ""), ("phone", ""), ("address", "")]))
    sizes = set()
    for seed in range(30):
        sim = U.UserSimulator(db, seed=seed)
        state = sim.init_state(goal)
        out = sim.respond(state)
        assert 1 <= len(out.selected) <= 3
        sizes.add(len(out.selected))
    assert sizes == {1, 2, 3}
