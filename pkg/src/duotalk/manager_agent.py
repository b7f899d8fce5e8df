"""The manager-side agent: shortages, menu edits, and the add-food CKT.

Every round turns a list of :class:`~duotalk.frames.ManagerFrame`s into

* staged shortage facts (``new_runout``/``new_restore``) for the round's
  reconciliation,
* :class:`~duotalk.kb.MutationSet`s for menu changes, validated eagerly
  against a projected copy of the menu and queued for commit,
* response predicates: one ``confirm(...)`` per frame that affected
  state, plus at most one ``ask(Food, Slot)`` while an add-food CKT is
  collecting information.

The conversational knowledge template (CKT) for a new food asks, in
order: category, price, ingredients (many), calories, and popular
toppings (many); combos ask price, calories, and contents.  Multi-valued
slots close on an explicit "that's all" (``done``) frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .frames import ManagerFrame
from .kb import KBValidationError, MenuKB, MutationError, MutationSet, apply_mutations
from .pricing import parse_price
from .schema import CATEGORIES
from .shared_state import StateDelta
from .terms import Atom, Num, Struct, atom, num, struct

DISH_SLOTS = ("category", "price", "included_ingredient", "calories", "popular_topping")
COMBO_SLOTS = ("price", "calories", "combo_contain")
MULTI_SLOTS = frozenset({"included_ingredient", "popular_topping", "combo_contain"})

_SINGLETON_PROPERTIES = {"price": "original_price", "calories": "original_cal", "category": "category"}
_MULTI_PROPERTIES = {
    "included_ingredient": "included_ingredient",
    "popular_topping": "popular_topping",
    "available_topping": "available_topping",
    "combo_contain": "combo_contain",
}
_FLAG_PROPERTIES = {
    "veggie": "veggie",
    "best_seller": "best_seller",
    "cantina_chicken": "cantina_chicken",
    "size_changable_drink": "size_changable_drink",
}


def _confirm(mode: str, value) -> Struct:
    term = value if isinstance(value, (Struct, Num)) else atom(str(value))
    return struct("confirm", atom(mode), term)


@dataclass(frozen=True)
class AddFoodCKT:
    """Slot-filling state for one food being added to the menu."""

    target: str
    kind: str | None = None  # dish | combo | ingredient; None -> ask for it
    collected: tuple[tuple[str, object], ...] = ()
    closed: frozenset = frozenset()

    def slots(self) -> tuple[str, ...]:
        if self.kind == "dish":
            return DISH_SLOTS
        if self.kind == "combo":
            return COMBO_SLOTS
        return ()

    def values(self, slot: str) -> list:
        return [v for s, v in self.collected if s == slot]

    def pending(self) -> list[str]:
        out = []
        for slot in self.slots():
            if slot in MULTI_SLOTS:
                if slot not in self.closed:
                    out.append(slot)
            elif not self.values(slot):
                out.append(slot)
        return out

    def current_slot(self) -> str | None:
        if self.kind is None:
            return "type"
        pending = self.pending()
        return pending[0] if pending else None

    def absorb(self, slot: str, value) -> "AddFoodCKT":
        if slot in MULTI_SLOTS:
            if value in self.values(slot):
                return self
            return replace(self, collected=self.collected + ((slot, value),))
        kept = tuple(pair for pair in self.collected if pair[0] != slot)
        return replace(self, collected=kept + ((slot, value),))

    def close_current(self) -> "AddFoodCKT":
        slot = self.current_slot()
        if slot in MULTI_SLOTS:
            return replace(self, closed=self.closed | {slot})
        return self

    def mutations(self) -> MutationSet:
        """Assemble the facts for the completed food."""
        adds: list[Struct] = [struct(self.kind or "dish", atom(self.target))]
        if self.kind == "dish":
            adds.append(struct("category", atom(self.target), atom(str(self.values("category")[0]))))
        if self.kind in ("dish", "combo"):
            adds.append(struct("original_price", atom(self.target), num(int(self.values("price")[0]))))
            adds.append(struct("original_cal", atom(self.target), num(int(self.values("calories")[0]))))
        for slot, predicate in (
            ("included_ingredient", "included_ingredient"),
            ("popular_topping", "popular_topping"),
            ("combo_contain", "combo_contain"),
        ):
            for value in self.values(slot):
                adds.append(struct(predicate, atom(self.target), atom(str(value))))
        return MutationSet(adds=tuple(adds), removes=())


@dataclass
class ManagerSession:
    sid: str
    projected_kb: MenuKB
    ckt: AddFoodCKT | None = None
    closed: bool = False


@dataclass
class ManagerStep:
    session: ManagerSession
    predicates: list[Struct]
    delta: StateDelta
    commits: list[MutationSet] = field(default_factory=list)


def open_manager_session(sid: str, kb: MenuKB) -> ManagerSession:
    return ManagerSession(sid=sid, projected_kb=kb)


# ------------------------------------------------------------
# property edits
# ------------------------------------------------------------


class _EditProblem(Exception):
    def __init__(self, predicate: Struct):
        self.predicate = predicate


def _not_found(value) -> _EditProblem:
    return _EditProblem(_confirm("not_found", value))


def _invalid(prop: str) -> _EditProblem:
    return _EditProblem(_confirm("invalid", prop))


def _coerce_value(kb: MenuKB, prop: str, value) -> Struct | Atom | Num:
    if prop == "price":
        try:
            return num(parse_price(value))
        except ValueError:
            raise _invalid(prop) from None
    if prop == "calories":
        try:
            return num(int(str(value)))
        except ValueError:
            raise _invalid(prop) from None
    if prop == "category":
        if str(value) not in CATEGORIES:
            raise _invalid(prop)
        return atom(str(value))
    if prop in ("included_ingredient", "popular_topping", "available_topping"):
        if kb.food_kind(str(value)) not in ("ingredient", "sauce"):
            raise _invalid(prop)
        return atom(str(value))
    if prop == "combo_contain":
        if kb.food_kind(str(value)) != "dish" and str(value) not in kb.groups():
            raise _invalid(prop)
        return atom(str(value))
    return atom(str(value))


def edit_to_mutations(kb: MenuKB, frame: ManagerFrame) -> MutationSet:
    """Translate an edit/delete/add-property frame into fact changes.

    Raises ``_EditProblem`` carrying the confirm predicate to emit when
    the food is unknown, the old value is absent, or the value is
    malformed.  The caller applies the result to a projected KB, which
    surfaces schema violations.
    """
    food = str(frame.args[0])
    if kb.food_kind(food) is None:
        raise _EditProblem(_confirm("unknown", food))

    if frame.kind == "delete":
        if len(frame.args) == 1:
            from .kb import delete_food_mutations

            return delete_food_mutations(kb, food)
        prop = str(frame.args[1])
        predicate = (
            _SINGLETON_PROPERTIES.get(prop)
            or _MULTI_PROPERTIES.get(prop)
            or _FLAG_PROPERTIES.get(prop)
            or prop
        )
        value = str(frame.args[2]) if len(frame.args) == 3 else None
        if predicate == "replaceable_ingredient":
            matches = kb.lookup(predicate, [food, value, None]) + kb.lookup(
                "replacement_price", [food, value, None, None]
            )
        elif predicate in ("veggie", "best_seller", "cantina_chicken", "size_changable_drink"):
            matches = kb.lookup(predicate, [food])
        else:
            matches = kb.lookup(predicate, [food, value])
        if not matches:
            raise _not_found(frame.args[2] if len(frame.args) == 3 else prop)
        return MutationSet(adds=(), removes=tuple(matches))

    # add-property (3-ary add) or edit
    prop = str(frame.args[1])
    if frame.kind == "add":
        value = _coerce_value(kb, prop, frame.args[2])
        if prop in _SINGLETON_PROPERTIES:
            predicate = _SINGLETON_PROPERTIES[prop]
            if kb.lookup(predicate, [food, None]):
                raise _invalid(prop)  # already set; use edit
            return MutationSet(adds=(struct(predicate, atom(food), value),), removes=())
        if prop in _FLAG_PROPERTIES:
            if kb.lookup(prop, [food]):
                raise _invalid(prop)  # flag already set
            return MutationSet(adds=(struct(prop, atom(food)),), removes=())
        predicate = _MULTI_PROPERTIES.get(prop)
        if predicate is None:
            raise _invalid(prop)
        fact = struct(predicate, atom(food), value)
        if fact in kb.lookup(predicate, [food, str(frame.args[2])]):
            raise _invalid(prop)  # value already present
        return MutationSet(adds=(fact,), removes=())

    # edit
    if len(frame.args) == 3:
        if prop not in _SINGLETON_PROPERTIES:
            raise _invalid(prop)
        predicate = _SINGLETON_PROPERTIES[prop]
        value = _coerce_value(kb, prop, frame.args[2])
        old = kb.lookup(predicate, [food, None])
        if not old:
            raise _not_found(prop)
        return MutationSet(adds=(struct(predicate, atom(food), value),), removes=tuple(old))
    # 4-ary: edit(food, property, old, new)
    old_value, new_value = str(frame.args[2]), str(frame.args[3])
    predicate = _SINGLETON_PROPERTIES.get(prop) or _MULTI_PROPERTIES.get(prop)
    if predicate is None:
        raise _invalid(prop)
    old = kb.lookup(predicate, [food, old_value])
    if not old:
        raise _not_found(old_value)
    value = _coerce_value(kb, prop, new_value)
    return MutationSet(adds=(struct(predicate, atom(food), value),), removes=tuple(old))


# ------------------------------------------------------------
# CKT advancement
# ------------------------------------------------------------


def ckt_advance(
    kb: MenuKB, ckt: AddFoodCKT, frames: list[ManagerFrame]
) -> tuple[AddFoodCKT, list[Struct]]:
    """Absorb this round's slot values; return problems encountered.

    The returned predicates are `confirm(invalid, Slot)` entries for
    values that failed typing; absorption of good values is silent (the
    follow-up ask acknowledges progress).
    """
    problems: list[Struct] = []
    for frame in frames:
        if frame.kind == "done":
            ckt = ckt.close_current()
            continue
        if frame.kind == "add" and len(frame.args) == 2 and ckt.kind is None:
            if str(frame.args[1]) == ckt.target:
                ckt = replace(ckt, kind=str(frame.args[0]))
            continue
        if frame.kind != "add" or len(frame.args) != 3:
            continue
        food, prop = str(frame.args[0]), str(frame.args[1])
        if food != ckt.target:
            continue
        if prop not in ckt.slots():
            problems.append(_confirm("invalid", prop))
            continue
        try:
            value = _coerce_value(kb, prop, frame.args[2])
        except _EditProblem as exc:
            problems.append(exc.predicate)
            continue
        raw = value.value if isinstance(value, Num) else value.name
        ckt = ckt.absorb(prop, raw)
    return ckt, problems


# ------------------------------------------------------------
# the step function
# ------------------------------------------------------------


def manager_step(session: ManagerSession, frames: list[ManagerFrame]) -> ManagerStep:
    """One manager round over the session's projected menu snapshot."""
    kb = session.projected_kb
    confirms: list[Struct] = []
    staged: list[Struct] = []
    commits: list[MutationSet] = []
    quitting = False

    ckt_frames: list[ManagerFrame] = []
    for frame in frames:
        if frame.kind in ("runout", "restore"):
            name = str(frame.args[0])
            kind = kb.food_kind(name)
            if kind is None:
                confirms.append(_confirm("unknown", name))
                continue
            if kind not in ("ingredient", "sauce"):
                confirms.append(_confirm("invalid", name))
                continue
            staged.append(struct(f"new_{frame.kind}", atom(name)))
            confirms.append(_confirm(frame.kind, name))
        elif frame.kind == "quit":
            quitting = True
        elif frame.kind == "irrelevant":
            confirms.append(_confirm("irrelevant", "none"))
        elif frame.kind == "add" and len(frame.args) == 1:
            name = str(frame.args[0])
            session.ckt = AddFoodCKT(target=name)  # type asked next
        elif frame.kind == "add" and len(frame.args) == 2:
            if session.ckt is not None and session.ckt.target == str(frame.args[1]):
                ckt_frames.append(frame)
            else:
                session.ckt = AddFoodCKT(target=str(frame.args[1]), kind=str(frame.args[0]))
        elif frame.kind == "add" and session.ckt is not None and str(frame.args[0]) == session.ckt.target:
            ckt_frames.append(frame)
        elif frame.kind in ("add", "edit", "delete"):
            try:
                mutations = edit_to_mutations(kb, frame)
                kb = apply_mutations(kb, mutations)
            except _EditProblem as exc:
                confirms.append(exc.predicate)
            except (KBValidationError, MutationError):
                confirms.append(_confirm("rejected", str(frame.args[0])))
            else:
                commits.append(mutations)
                confirms.append(_confirm(frame.kind, str(frame.args[0])))
        elif frame.kind == "done":
            if session.ckt is not None:
                ckt_frames.append(frame)

    ask: Struct | None = None
    if session.ckt is not None and not quitting:
        session.ckt, problems = ckt_advance(kb, session.ckt, ckt_frames)
        confirms.extend(problems)
        if session.ckt.kind == "ingredient":
            name = session.ckt.target
            mutations = MutationSet(adds=(struct("ingredient", atom(name)),), removes=())
            try:
                kb = apply_mutations(kb, mutations)
            except (KBValidationError, MutationError):
                confirms.append(_confirm("rejected", name))
            else:
                commits.append(mutations)
                confirms.append(_confirm("add", name))
            session.ckt = None
        elif session.ckt.current_slot() is None:
            mutations = session.ckt.mutations()
            try:
                kb = apply_mutations(kb, mutations)
            except (KBValidationError, MutationError):
                confirms.append(_confirm("rejected", session.ckt.target))
            else:
                commits.append(mutations)
                confirms.append(_confirm("add", session.ckt.target))
            session.ckt = None
        else:
            ask = struct("ask", atom(session.ckt.target), atom(session.ckt.current_slot()))

    session.projected_kb = kb
    predicates = list(confirms)
    if ask is not None:
        predicates.append(ask)
    if quitting:
        session.ckt = None
        session.closed = True
        predicates.append(_confirm("quit", "none"))
        predicates.append(struct("quit"))
    return ManagerStep(
        session=session,
        predicates=predicates,
        delta=StateDelta(tuple(staged), session.sid),
        commits=commits,
    )
