"""Rule-based user simulator.

The simulator walks its goal front to back: the active sub-goal is the first
one that still has an unexpressed or unfilled tuple. Each turn it voices one
to three tuples of that sub-goal, constraints before questions, and it reacts
to system acts by filling blanks, resolving references, and compromising on
constraints when told nothing matches. All mutation happens on a UserState so
one simulator instance can drive many dialogues.
"""

from __future__ import annotations

import copy
import random
from dataclasses import dataclass, field

from . import acts as A
from . import annotation
from . import database as dbm
from . import goals as G
from . import schema
from . import values as V

SELECTION_WEIGHTS = (0.30, 0.45, 0.25)   # P(express 1, 2, 3 tuples)


class UserPolicyError(Exception):
    pass


@dataclass
class UserState:
    """Mutable per-dialogue state: the goal's tuples plus bookkeeping."""
    goal: G.UserGoal
    subgoals: list[G.SubGoal]
    goal_changed: bool = False
    change_log: list[dict] = field(default_factory=list)
    warnings: int = 0
    turn: int = 0

    def tuples(self) -> list[G.SemanticTuple]:
        return [t for sg in self.subgoals for t in sg.tuples]

    def domain_of_subgoal(self) -> dict[int, str]:
        return {sg.id: sg.domain for sg in self.subgoals}

    def rows(self) -> list[list]:
        return [t.as_row() for t in self.tuples()]


@dataclass
class UserTurnOutput:
    acts: list[A.DialogueAct]
    selected: list[G.SemanticTuple]
    terminated: bool


def _unfilled(t: G.SemanticTuple) -> bool:
    return t.is_blank() or t.ref() is not None


def _unfinished(sg: G.SubGoal) -> bool:
    return any(_unfilled(t) or not t.expressed for t in sg.tuples)


class UserSimulator:
    def __init__(self, db: dbm.Database, seed: int = 0,
                 weights: tuple[float, float, float] = SELECTION_WEIGHTS):
        self.db = db
        self.rng = random.Random(seed)
        self.weights = weights

    def init_state(self, goal: G.UserGoal) -> UserState:
        return UserState(goal=goal, subgoals=copy.deepcopy(goal.subgoals))

    def is_terminated(self, state: UserState) -> bool:
        """Done once every blank is filled and every reference resolved."""
        return not any(_unfilled(t) for t in state.tuples())

    # -- speaking ----------------------------------------------------------

    def active_subgoal(self, state: UserState) -> G.SubGoal | None:
        return next((sg for sg in state.subgoals if _unfinished(sg)), None)

    def respond(self, state: UserState) -> UserTurnOutput:
        state.turn += 1
        if self.is_terminated(state):
            return UserTurnOutput(
                acts=[A.general("thank"), A.general("bye")],
                selected=[], terminated=True)

        active = self.active_subgoal(state)
        if active is None:
            # All expressed and filled would have terminated above.
            raise UserPolicyError("no active sub-goal but not terminated")

        # Fresh tuples from the active sub-goal onward, constraints before
        # questions within each sub-goal. References stay back until the
        # sub-goal they point at has a usable name.
        pool: list[G.SemanticTuple] = []
        start = state.subgoals.index(active)
        for sg in state.subgoals[start:]:
            fresh = [t for t in sg.tuples
                     if not t.expressed and self._expressible(state, t)]
            pool.extend(t for t in fresh if not t.is_blank())
            pool.extend(t for t in fresh if t.is_blank())
        if not pool:
            # Everything expressed but answers missing: ask again.
            pool = [t for t in active.tuples if _unfilled(t)]
        k = self.rng.choices((1, 2, 3), weights=self.weights)[0]
        selected = pool[:k]
        if not selected:
            raise UserPolicyError(
                f"sub-goal {active.id} unfinished yet nothing to express")

        self._resolve_entity_refs(state, selected)
        for t in selected:
            t.expressed = True
        acts = annotation.derive_user_das(selected, state.domain_of_subgoal())
        return UserTurnOutput(acts=acts,
                              selected=[t.as_row() for t in selected],
                              terminated=False)

    def _expressible(self, state: UserState, t: G.SemanticTuple) -> bool:
        r = t.ref()
        if r is None:
            return True
        referent = next((sg for sg in state.subgoals if sg.id == r[1]), None)
        if referent is None:
            return False
        name = next((t for t in referent.tuples if t.slot == "name"), None)
        return (name is not None and not name.is_blank()
                and name.ref() is None)

    def _resolve_entity_refs(self, state: UserState, selected) -> None:
        """Swap "(id=k)" placeholders for the referent's now-known name."""
        by_id = {sg.id: sg for sg in state.subgoals}
        for t in selected:
            r = t.ref()
            if r is None or r[0] != "at-entity":
                continue
            referent = by_id.get(r[1])
            name_t = None if referent is None else next(
                (x for x in referent.tuples if x.slot == "name"), None)
            if name_t is None:
                raise UserPolicyError(f"reference to sub-goal {r[1]} has no name tuple")
            name = name_t.value
            if name and G.parse_ref(name) is None:
                t.value = name
            # If the referent is still unresolved the tuple stays a reference;
            # it will be re-voiced later.

    # -- listening ---------------------------------------------------------

    def receive(self, state: UserState, system_acts) -> None:
        recommended = False
        for act in system_acts:
            if not isinstance(act, A.DialogueAct):
                act = A.DialogueAct.from_list(act)
            if act.intent == A.GENERAL:
                continue
            if act.intent == A.NOOFFER:
                self._compromise(state, act.domain)
            elif act.intent == A.RECOMMEND:
                if not recommended:
                    recommended = self._accept_name(state, act.domain, act.value)
            elif act.intent == A.INFORM:
                self._accept_inform(state, act)
            elif act.intent == A.REQUEST:
                self._revoice(state, act)
            else:
                # Selects from the system side are clarifications this
                # simulator cannot act on.
                state.warnings += 1

    def _revoice(self, state: UserState, act: A.DialogueAct) -> None:
        """Mark a tuple for re-expression when the system asks for it again."""
        for sg in state.subgoals:
            if sg.domain != act.domain:
                continue
            for t in sg.tuples:
                if t.slot == act.slot and not t.is_blank() and t.ref() is None:
                    t.expressed = False
                    return

    def _fillable_name(self, sg: G.SubGoal) -> G.SemanticTuple | None:
        t = next((t for t in sg.tuples if t.slot == "name"), None)
        if t is None:
            return None
        if t.is_blank() or t.ref() is not None:
            return t
        return None

    def _accept_name(self, state: UserState, domain: str, name: str) -> bool:
        active = self.active_subgoal(state)
        candidates = []
        if active is not None and active.domain == domain:
            candidates.append(active)
        candidates.extend(sg for sg in state.subgoals
                          if sg.domain == domain and sg is not active)
        for sg in candidates:
            t = self._fillable_name(sg)
            if t is not None:
                t.value = name
                return True
        if any(t.slot == "name" and V.values_equal(t.value, name)
               for sg in candidates for t in sg.tuples):
            return True      # a name already accepted, repeated back
        state.warnings += 1
        return False

    def _accept_inform(self, state: UserState, act: A.DialogueAct) -> None:
        if act.slot == "name":
            self._accept_name(state, act.domain, act.value)
            return
        sgs = [sg for sg in state.subgoals if sg.domain == act.domain]
        if not sgs:
            state.warnings += 1
            return
        active = self.active_subgoal(state)
        if active in sgs:
            sgs.remove(active)
            sgs.insert(0, active)
        # Prefer a sub-goal where the slot is still blank; else latest-wins
        # overwrite on the first holder of the slot.
        holder, target = None, None
        for sg in sgs:
            t = next((t for t in sg.tuples if t.slot == act.slot and t.is_blank()), None)
            if t is not None:
                holder, target = sg, t
                break
        if target is None:
            for sg in sgs:
                t = next((t for t in sg.tuples if t.slot == act.slot), None)
                if t is not None:
                    holder, target = sg, t
                    break
        if target is None:
            return
        if target.is_blank():
            target.value = act.value
            return
        if target.ref() is not None or V.values_equal(target.value, act.value):
            return
        spec = schema.slot_spec(act.domain, act.slot)
        if not spec.informable:
            target.value = act.value
            return
        entry = {
            "turn": state.turn, "subgoal": target.subgoal_id,
            "slot": target.slot, "old": target.value,
            "reason": "system informed a different value",
        }
        if spec.kind == schema.BOOLEAN_SERVICE and act.value == "no":
            # "The place does not offer X": accept losing the service.
            entry["new"] = None
            holder.tuples.remove(target)
        else:
            entry["new"] = act.value
            target.value = act.value
            target.expressed = False
        state.change_log.append(entry)
        state.goal_changed = True

    # -- compromising ------------------------------------------------------

    def _compromise(self, state: UserState, domain: str) -> None:
        """Relax one constraint of the blocked sub-goal after a NoOffer.

        Order of sacrifice: drop a required service, then loosen one numeric
        constraint a step along the value grid, then drop some other
        constraint. Names and cross-domain references are never given up.
        """
        active = self.active_subgoal(state)
        sg = active if active is not None and active.domain == domain else \
            next((s for s in state.subgoals if s.domain == domain and _unfinished(s)), None)
        if sg is None:
            state.warnings += 1
            return

        def concrete(t: G.SemanticTuple) -> bool:
            return not t.is_blank() and t.ref() is None and t.slot != "name"

        def log(t, new, reason):
            state.change_log.append({
                "turn": state.turn, "subgoal": sg.id, "slot": t.slot,
                "old": t.value, "new": new, "reason": reason})
            state.goal_changed = True

        for t in sg.tuples:
            if concrete(t) and schema.slot_spec(sg.domain, t.slot).kind \
                    == schema.BOOLEAN_SERVICE:
                log(t, None, "dropped after no matching result")
                sg.tuples.remove(t)
                return
        for t in sg.tuples:
            if concrete(t) and schema.slot_spec(sg.domain, t.slot).kind \
                    == schema.NUMERIC:
                loosened = dbm.loosen(self.db, sg.domain, t.slot, t.value)
                if loosened is None:
                    continue
                new = V.to_act_value(loosened)
                log(t, new, "loosened after no matching result")
                t.value = new
                t.expressed = False
                return
        for t in sg.tuples:
            if concrete(t):
                log(t, None, "dropped after no matching result")
                sg.tuples.remove(t)
                return
        state.warnings += 1
