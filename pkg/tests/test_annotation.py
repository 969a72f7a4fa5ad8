import pytest

from crossdial import acts as A
from crossdial import annotation as AN
from crossdial import corpus as C
from crossdial import goals as G

TOL = 1e-9


def close(a, b):
    return abs(a - b) < TOL


# -- user-side derivation ----------------------------------------------------

def test_derive_user_das_inform():
    rows = [[1, "attraction", "fee", "free", True]]
    acts = AN.derive_user_das(rows)
    assert [a.as_list() for a in acts] == [
        ["Inform", "attraction", "fee", "free"]]


def test_derive_user_das_request():
    rows = [[1, "attraction", "name", "", True]]
    acts = AN.derive_user_das(rows)
    assert [a.as_list() for a in acts] == [
        ["Request", "attraction", "name", "none"]]


def test_derive_user_das_select():
    rows = [[2, "hotel", "name", G.make_nearby_ref(1), True]]
    acts = AN.derive_user_das(rows, referent_domains={1: "attraction"})
    assert [a.as_list() for a in acts] == [
        ["Select", "hotel", "src_domain", "attraction"]]


def test_derive_user_das_preserves_order():
    rows = [[1, "hotel", "price", "400", True],
            [1, "hotel", "phone", "", True]]
    acts = AN.derive_user_das(rows)
    assert [a.intent for a in acts] == [A.INFORM, A.REQUEST]


# -- hand-computed metric fixtures -------------------------------------------

def test_f1_fixture_identity():
    gold = [[["Inform", "hotel", "price", "400"]]]
    f1, p, r, _ = AN.da_f1(gold, gold)
    assert close(f1, 1.0) and close(p, 1.0) and close(r, 1.0)


def test_f1_fixture_two_thirds_precision():
    gold = [[["Inform", "hotel", "price", "400"],
             ["Request", "hotel", "phone", "none"]]]
    pred = [[["Inform", "hotel", "price", "400"],
             ["Request", "hotel", "phone", "none"],
             ["Inform", "hotel", "rating", "4"]]]
    f1, p, r, _ = AN.da_f1(gold, pred)
    # tp=2 fp=1 fn=0: P=2/3, R=1, F1=0.8.
    assert close(p, 2.0 / 3.0)
    assert close(r, 1.0)
    assert close(f1, 0.8)


def test_f1_fixture_disjoint():
    gold = [[["Inform", "hotel", "price", "400"]]]
    pred = [[["Inform", "hotel", "price", "500"]]]
    f1, p, r, _ = AN.da_f1(gold, pred)
    assert close(f1, 0.0) and close(p, 0.0) and close(r, 0.0)


def test_f1_fixture_duplicate_clipping():
    act = ["Inform", "hotel", "price", "400"]
    f1, p, r, _ = AN.da_f1([[act, act]], [[act]])
    # tp=1 fp=0 fn=1: P=1, R=0.5, F1=2/3.
    assert close(p, 1.0)
    assert close(r, 0.5)
    assert close(f1, 2.0 / 3.0)


def test_f1_fixture_both_empty():
    f1, p, r, _ = AN.da_f1([[]], [[]])
    assert close(f1, 1.0) and close(p, 1.0) and close(r, 1.0)


def test_f1_fixture_empty_prediction():
    gold = [[["Inform", "hotel", "price", "400"]]]
    f1, p, r, _ = AN.da_f1(gold, [[]])
    assert close(f1, 0.0) and close(r, 0.0)


def test_f1_fixture_micro_aggregation():
    a = ["Inform", "hotel", "price", "400"]
    b = ["Inform", "hotel", "rating", "4"]
    c = ["Request", "taxi", "car type", "none"]
    d = ["Request", "taxi", "plate number", "none"]
    gold = [[a], [c, d]]
    pred = [[a, b], [c]]
    f1, p, r, _ = AN.da_f1(gold, pred)
    # tp=2 fp=1 fn=1 pooled over turns: P=R=F1=2/3.
    assert close(p, 2.0 / 3.0)
    assert close(r, 2.0 / 3.0)
    assert close(f1, 2.0 / 3.0)


def test_f1_fixture_per_intent_breakdown():
    gold = [[["Inform", "hotel", "price", "400"],
             ["Request", "hotel", "phone", "none"]]]
    pred = [[["Inform", "hotel", "price", "400"]]]
    _, _, _, per = AN.da_f1(gold, pred)
    assert close(per["Inform"], 1.0)
    assert close(per["Request"], 0.0)


def test_f1_turn_count_mismatch_is_an_error():
    with pytest.raises(ValueError):
        AN.da_f1([[]], [[], []])


def test_state_accuracy_fixture_exact_and_half():
    s1 = {"constraints": {"hotel": {"price": "400"}}}
    s2 = {"constraints": {"hotel": {"price": "500"}}}
    assert close(AN.joint_state_accuracy([s1, s2], [s1, s2]), 1.0)
    assert close(AN.joint_state_accuracy([s1, s2], [s1, s1]), 0.5)
    assert close(AN.joint_state_accuracy([], []), 1.0)
    with pytest.raises(ValueError):
        AN.joint_state_accuracy([s1], [])


# -- keyword annotation of system/user utterances ----------------------------

@pytest.fixture(scope="module")
def lex(db):
    return AN.build_lexicon(db)


def test_keyword_inform_from_selected_entity(db, lex):
    e = db.entities("hotel")[0]
    text = f"The phone number is {e.values['phone']}."
    acts = AN.derive_system_das(text, selected_entities=[e],
                                prev_domain="hotel", lexicon=lex)
    assert ["Inform", "hotel", "phone", e.values["phone"]] in \
        [a.as_list() for a in acts]


def test_keyword_recommend_lists_every_name(db, lex):
    es = db.entities("restaurant")[:3]
    names = [e.values["name"] for e in es]
    text = f"How about {names[0]}, {names[1]}, or {names[2]}?"
    acts = AN.derive_system_das(text, selected_entities=es,
                                prev_domain="restaurant", lexicon=lex)
    recs = [a.value for a in acts if a.intent == A.RECOMMEND]
    assert recs == names


def test_keyword_nooffer(lex):
    acts = AN.derive_system_das(
        "Sorry, I could not find anything suitable.",
        prev_domain="hotel", lexicon=lex)
    assert ["NoOffer", "hotel", "none", "none"] in \
        [a.as_list() for a in acts]


def test_keyword_general(lex):
    acts = AN.derive_system_das("Thank you so much. Goodbye!", lexicon=lex)
    listed = [a.as_list() for a in acts]
    assert ["General", "thank", "none", "none"] in listed
    assert ["General", "bye", "none", "none"] in listed


def test_keyword_select_with_qualifier(lex):
    acts = AN.derive_system_das(
        "Please find a restaurant near the previous restaurant.",
        lexicon=lex)
    assert ["Select", "restaurant", "src_domain", "restaurant"] in \
        [a.as_list() for a in acts]


def test_keyword_nearby_none(db, lex):
    acts = AN.derive_system_das(
        "There are no nearby hotels worth noting.",
        prev_domain="restaurant", lexicon=lex)
    assert ["Inform", "restaurant", "nearby hotels", "none"] in \
        [a.as_list() for a in acts]


def test_keyword_schema_filter_drops_impossible_pairs(db, lex):
    # Hotels do not list nearby hotels; the decoder must not claim they do.
    acts = AN.derive_system_das(
        "What nearby hotels does the hotel have?",
        prev_domain="hotel", lexicon=lex)
    assert all(not (a.domain == "hotel" and a.slot == "nearby hotels")
               for a in acts)


def test_keyword_plate_number(lex):
    acts = AN.derive_system_das("The plate number is FY-5010G.",
                                prev_domain="taxi", lexicon=lex)
    assert ["Inform", "taxi", "plate number", "FY-5010G"] in \
        [a.as_list() for a in acts]


def test_keyword_each_span_consumed_once(db, lex):
    e = db.entities("hotel")[0]
    text = f"The phone number is {e.values['phone']}."
    acts = AN.derive_system_das(text, selected_entities=[e, e],
                                prev_domain="hotel", lexicon=lex)
    informs = [a for a in acts if a.slot == "phone"]
    assert len(informs) == 1


# -- corpus-level agreement ---------------------------------------------------

def _mini_record(rec_id, acts_by_turn):
    goal = G.UserGoal([G.SubGoal(1, "hotel", [
        G.SemanticTuple(1, "hotel", "name", "", True)])], goal_type="S")
    turns = []
    for i, acts in enumerate(acts_by_turn):
        role = "user" if i % 2 == 0 else "sys"
        turns.append(C.Turn(role=role, acts=acts,
                            user_state=[] if role == "user" else None,
                            sys_state={} if role == "sys" else None))
    return C.DialogueRecord(id=rec_id, goal=goal, goal_type="S", turns=turns)


def test_agreement_report_shape():
    a = ["Inform", "hotel", "price", "400"]
    gold = [_mini_record("d1", [[a], [a]])]
    pred = [_mini_record("d1", [[a], []])]
    rep = AN.agreement(gold, pred)
    assert close(rep.da_f1, 2 / 3)
    assert rep.n_dialogues == 1
    assert rep.n_turns == 2
    assert close(rep.state_accuracy, 1.0)
    assert set(rep.to_dict()) == {
        "da_f1", "da_precision", "da_recall", "state_accuracy",
        "per_intent_f1", "n_dialogues", "n_turns"}


def test_agreement_rejects_mismatched_corpora():
    a = ["Inform", "hotel", "price", "400"]
    with pytest.raises(ValueError):
        AN.agreement([_mini_record("d1", [[a]])], [])
    with pytest.raises(ValueError):
        AN.agreement([_mini_record("d1", [[a]])],
                     [_mini_record("d1", [[a], [a]])])
