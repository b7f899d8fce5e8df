"""The customer-facing agent: orders, questions, recommendations, checkout.

Each round turns the customer's :class:`~duotalk.frames.CustomerFrame`s
into order-state changes over a fixed (menu, shortage) snapshot and a
list of response predicates:

* availability is checked before anything is admitted; every rejected
  item of the round lands in a single ``confirm(unavailable, [...])``
  with the missing ingredient as the reason,
* admitted orders/updates each get a ``confirm(...)``, deduplicated when
  one round repeats the same change,
* after a ``completed`` frame the agent walks every order line asking
  the open questions (toppings, special styles, drink size, combo
  choices) one at a time, and finally prints the ticket with the total.

Free decisions (declining a style, regular size) answer the question for
every instance of the dish at once; priced changes apply to the lowest
instance that has not had that change yet.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .frames import CustomerFrame
from .kb import MenuKB
from .orders import OrderLine, OrderLines, SpecifyRecord, UpdateRecord
from .pricing import display_price, price_order
from .schema import CATEGORIES, STYLES
from .shared_state import ShortageState, unavailability
from .terms import Struct, atom, make_list, num, struct

INGREDIENT_OPS = ("change", "add", "no", "less", "extra")

TOPPING_QUESTION = "add ingredients or sauces"
SIZE_QUESTION = "choose size"
GROUP_QUESTION = "choose one option"

# recommendation filters that map to menu flags rather than categories
FLAG_FILTERS = {
    "vegan": "veggie",
    "veggie": "veggie",
    "chicken": "cantina_chicken",
    "best seller": "best_seller",
}


@dataclass
class ServiceSession:
    sid: str
    order: OrderLines = field(default_factory=OrderLines)
    phase: str = "listening"  # listening | asking | checkout | done
    mentioned: set = field(default_factory=set)
    # (food, instance, member-or-None, question-key) the customer waved off
    declined: set = field(default_factory=set)
    closed: bool = False
    last_ticket: dict | None = None


@dataclass
class ServiceStep:
    session: ServiceSession
    predicates: list[Struct]
    ticket: dict | None = None


def open_service_session(sid: str) -> ServiceSession:
    return ServiceSession(sid=sid)


# ------------------------------------------------------------
# questions
# ------------------------------------------------------------


def _scope(line: OrderLine, member: str | None) -> Struct:
    first = atom(line.food) if member is not None else atom("none")
    return make_list([first, atom(member or line.food)])


def _dish_questions(kb: MenuKB, line: OrderLine, member: str | None, declined: set):
    """Pending questions for one dish scope, in fixed order."""
    dish = member or line.food
    key = (line.food, line.instance, member)
    if kb.lookup("available_topping", [dish, None]):
        answered = any(m.member == member and m.op in INGREDIENT_OPS for m in line.updates())
        if not answered and key + ("topping",) not in declined:
            yield member, "topping", struct("ask", _scope(line, member), atom(TOPPING_QUESTION))
    for fact in kb.lookup("available_special_style", [dish, None]):
        style = fact.args[1].name
        if not line.has_update(style, member=member) and key + (f"style:{style}",) not in declined:
            yield member, f"style:{style}", struct(
                "ask", _scope(line, member), atom(f"make it {style}")
            )
    if kb.lookup("size_changable_drink", [dish]):
        if not line.has_update("size", member=member) and key + ("size",) not in declined:
            yield member, "size", struct("ask", _scope(line, member), atom(SIZE_QUESTION))


def _line_questions(kb: MenuKB, line: OrderLine, declined: set):
    """(line, member, key, ask) tuples still pending for one order line."""
    if not line.is_combo:
        for member, key, ask in _dish_questions(kb, line, None, declined):
            yield line, member, key, ask
        return
    groups = kb.groups()
    slots = line.combo_slots
    for fact in kb.lookup("combo_contain", [line.food, None]):
        name = fact.args[1].name
        if name in groups:
            chosen = slots.get(name)
            if chosen is None:
                yield line, name, f"slot:{name}", struct(
                    "ask",
                    make_list([atom(line.food), atom(name)]),
                    atom(GROUP_QUESTION),
                )
                continue
            member = chosen
        else:
            member = name
        for m, key, ask in _dish_questions(kb, line, member, declined):
            yield line, m, key, ask


def pending_questions(kb: MenuKB, order: OrderLines, declined: set):
    for line in order:
        yield from _line_questions(kb, line, declined)


def next_question(kb: MenuKB, order: OrderLines, declined: set) -> Struct | None:
    """The first open question in admission order, or None when done."""
    for _line, _member, _key, ask in pending_questions(kb, order, declined):
        return ask
    return None


# ------------------------------------------------------------
# admission
# ------------------------------------------------------------


def _combo_member_dishes(kb: MenuKB, line: OrderLine) -> set[str]:
    groups = kb.groups()
    members = set(line.combo_slots.values())
    for fact in kb.lookup("combo_contain", [line.food, None]):
        if fact.args[1].name not in groups:
            members.add(fact.args[1].name)
    return members


def admit_update(
    kb: MenuKB,
    shortage: ShortageState,
    order: OrderLines,
    frame: CustomerFrame,
    availability: dict[str, Struct] | None = None,
) -> tuple[str, object]:
    """Try to apply one update frame to the order.

    Returns ("ok", [instance indices]) on success, mutating the order;
    otherwise one of ("unknown", name), ("unavailable", reason term),
    ("not_ordered", dish), ("invalid", option), ("duplicate", option)
    and the order is untouched.
    """
    dish, op, option = (str(a) for a in frame.args)
    if availability is None:
        availability = dict(unavailability(kb, shortage))
    if kb.food_kind(dish) is None:
        return "unknown", dish
    if dish in availability:
        return "unavailable", struct("unavailable", atom(dish), availability[dish])
    if op in INGREDIENT_OPS:
        if kb.food_kind(option) not in ("ingredient", "sauce"):
            return "unknown", option
        if option in availability:
            return "unavailable", struct("unavailable", atom(option), availability[option])

    targets: list[tuple[OrderLine, str | None]] = [
        (line, None) for line in order if not line.is_combo and line.food == dish
    ]
    if not targets:
        targets = [
            (line, dish)
            for line in order
            if line.is_combo and dish in _combo_member_dishes(kb, line)
        ]
    if not targets:
        return "not_ordered", dish

    origin = None
    if op == "add":
        if not kb.lookup("available_topping", [dish, option]):
            return "invalid", option
    elif op in ("no", "less"):
        if not kb.lookup("included_ingredient", [dish, option]):
            return "invalid", option
    elif op == "extra":
        if not (
            kb.lookup("included_ingredient", [dish, option])
            or kb.lookup("available_topping", [dish, option])
        ):
            return "invalid", option
    elif op == "change":
        facts = kb.lookup("replaceable_ingredient", [dish, None, option])
        if not facts:
            return "invalid", option
        origin = facts[0].args[1].name
    elif op in STYLES:
        if not kb.lookup("available_special_style", [dish, op]):
            return "invalid", op
    elif op == "size":
        if not kb.lookup("size_changable_drink", [dish]):
            return "invalid", op

    record = UpdateRecord(op, option, origin=origin)
    # free style/size answers settle the question for every instance at
    # once; anything priced goes on the lowest instance not yet changed
    propagate = op not in INGREDIENT_OPS and record.free
    once_key = option if op in INGREDIENT_OPS else None
    applied: list[tuple[OrderLine, str | None]] = []
    for line, member in targets:
        if line.has_update(op, once_key, member):
            continue
        applied.append((line, member))
        if not propagate:
            break
    if not applied:
        return "duplicate", option
    for line, member in applied:
        order.replace_line(line, line.with_modifier(replace(record, member=member)))
    return "ok", [line.instance for line, _ in applied]


def _admit_specify(
    kb: MenuKB,
    availability: dict[str, Struct],
    order: OrderLines,
    combo: str,
    dish: str,
) -> tuple[str, object]:
    if kb.food_kind(combo) is None:
        return "unknown", combo
    if kb.food_kind(dish) is None:
        return "unknown", dish
    if combo in availability:
        return "unavailable", struct("unavailable", atom(combo), availability[combo])
    if dish in availability:
        return "unavailable", struct("unavailable", atom(dish), availability[dish])
    groups = kb.groups()
    lines = [line for line in order if line.is_combo and line.food == combo]
    if not lines:
        return "not_ordered", combo
    outcome = "invalid"
    for line in lines:
        slots = line.combo_slots
        for fact in kb.lookup("combo_contain", [combo, None]):
            group = fact.args[1].name
            if group not in groups or dish not in groups[group]:
                continue
            if group in slots:
                outcome = "duplicate"
                continue
            order.replace_line(line, line.with_modifier(SpecifyRecord(group, dish)))
            return "ok", line.instance
    return outcome, dish


# ------------------------------------------------------------
# recommendations and answers
# ------------------------------------------------------------


def recommend(
    kb: MenuKB,
    availability: dict[str, Struct],
    mentioned: set,
    order: OrderLines,
    content: str,
    rtype: str,
) -> Struct:
    """Pick one dish (category) or one topping (upgrade); `none` when
    every candidate is unavailable or already came up in conversation."""
    if rtype == "upgrade":
        if kb.food_kind(content) is None:
            return struct("confirm", atom("unknown"), atom(content))
        on_line = {
            m.option
            for line in order.instances_of(content)
            for m in line.updates()
        }
        for fact in kb.lookup("popular_topping", [content, None]):
            topping = fact.args[1].name
            if topping in availability or topping in mentioned or topping in on_line:
                continue
            return struct("recommend", atom("upgrade"), atom(topping))
        return struct("recommend", atom("upgrade"), atom("none"))

    flag = FLAG_FILTERS.get(content)
    if content != "all" and flag is None and content not in CATEGORIES:
        return struct("confirm", atom("unknown"), atom(content))
    candidates = []
    for dish in kb.foods("dish"):
        if dish in availability or dish in mentioned:
            continue
        if flag is not None and not kb.lookup(flag, [dish]):
            continue
        if flag is None and content != "all" and not kb.lookup("category", [dish, content]):
            continue
        candidates.append(dish)
    for dish in candidates:
        if kb.lookup("best_seller", [dish]):
            return struct("recommend", atom("category"), atom(dish))
    if candidates:
        return struct("recommend", atom("category"), atom(candidates[0]))
    return struct("recommend", atom("category"), atom("none"))


def answer_query(
    kb: MenuKB,
    availability: dict[str, Struct],
    category: str,
    food: str,
) -> list[Struct]:
    """answer(Food, Property, Value) facts; short-supply items are left
    out of add-on and replacement listings."""
    if food != "all" and kb.food_kind(food) is None:
        return [struct("confirm", atom("unknown"), atom(food))]

    def answer(name: str, value) -> Struct:
        return struct("answer", atom(name), atom(category), value)

    foods = [food]
    if food == "all":
        foods = kb.foods("dish") + kb.foods("combo")
    out: list[Struct] = []
    for name in foods:
        if category == "price":
            cents = kb.price(name)
            if cents is not None:
                out.append(answer(name, atom(display_price(cents))))
        elif category == "calories":
            cal = kb.calories(name)
            if cal is not None:
                out.append(answer(name, num(cal)))
        elif category == "category":
            fact = kb.first("category", [name, None])
            if fact is not None:
                out.append(answer(name, fact.args[1]))
        elif category == "ingredient":
            for fact in kb.lookup("included_ingredient", [name, None]):
                out.append(answer(name, fact.args[1]))
        elif category == "add-on":
            for fact in kb.lookup("available_topping", [name, None]):
                if fact.args[1].name not in availability:
                    out.append(answer(name, fact.args[1]))
        elif category == "replacement":
            for fact in kb.lookup("replaceable_ingredient", [name, None, None]):
                if fact.args[2].name not in availability:
                    out.append(answer(name, make_list([fact.args[1], fact.args[2]])))
        elif category == "style":
            for fact in kb.lookup("available_special_style", [name, None]):
                out.append(answer(name, fact.args[1]))
        elif category == "combo-content":
            for fact in kb.lookup("combo_contain", [name, None]):
                out.append(answer(name, fact.args[1]))
    if not out:
        out.append(answer(food, atom("none")))
    return out


# ------------------------------------------------------------
# checkout
# ------------------------------------------------------------


def finalize(kb: MenuKB, order: OrderLines) -> tuple[list[Struct], dict]:
    """Check-mode predicates (latest line first, latest change first)
    plus the ticket as plain data."""
    rendered: list[list[Struct]] = []
    ticket_lines = []
    for line in order:
        preds = [struct("order", atom(line.food))]
        records = []
        if line.is_combo:
            groups = kb.groups()
            slots = line.combo_slots
            for fact in kb.lookup("combo_contain", [line.food, None]):
                name = fact.args[1].name
                dish = slots.get(name) if name in groups else name
                if dish is None:
                    continue
                preds.append(struct("specify", atom(dish)))
                records.append({"kind": "specify", "group": name if name in groups else None, "dish": dish})
                for rec in reversed([m for m in line.updates() if m.member == dish]):
                    preds.append(struct("update", atom(rec.op), atom(rec.option)))
                for rec in (m for m in line.updates() if m.member == dish):
                    records.append({"kind": "update", "op": rec.op, "option": rec.option, "member": dish})
        else:
            for rec in reversed(line.updates()):
                preds.append(struct("update", atom(rec.op), atom(rec.option)))
            for rec in line.updates():
                records.append({"kind": "update", "op": rec.op, "option": rec.option})
        rendered.append(preds)
        ticket_lines.append(
            {"food": line.food, "instance": line.instance, "combo": line.is_combo, "records": records}
        )
    total = price_order(kb, order)
    predicates = [p for group in reversed(rendered) for p in group]
    predicates.append(struct("price", atom(display_price(total))))
    ticket = {"lines": ticket_lines, "total_cents": total, "total": display_price(total)}
    return predicates, ticket


# ------------------------------------------------------------
# the step function
# ------------------------------------------------------------

_REJECTIONS = object()  # placeholder for the aggregated unavailable confirm


def service_step(
    session: ServiceSession,
    kb: MenuKB,
    shortage: ShortageState,
    frames: list[CustomerFrame],
) -> ServiceStep:
    """One customer round over a fixed (menu, shortage) snapshot."""
    availability = dict(unavailability(kb, shortage))
    order = session.order
    mentioned = session.mentioned

    body: list = []  # Structs interleaved with the rejection placeholder
    rejections: list[Struct] = []
    confirms_kept: list[Struct] = []  # positive confirms, for checkout replacement
    informational = False
    state_frames = False
    completed_seen = False
    quitting = False

    def note(name: str) -> None:
        if kb.food_kind(name) is not None:
            mentioned.add(name)

    def reject(term: Struct) -> None:
        if not rejections:
            body.append(_REJECTIONS)
        rejections.append(term)

    def confirm(mode: str, value) -> None:
        term = value if isinstance(value, Struct) else atom(str(value))
        pred = struct("confirm", atom(mode), term)
        if pred not in body:
            body.append(pred)
            confirms_kept.append(pred)

    for frame in frames:
        if frame.kind == "order":
            state_frames = True
            food, count = str(frame.args[0]), int(frame.args[1])
            kind = kb.food_kind(food)
            if kind is None:
                body.append(struct("confirm", atom("unknown"), atom(food)))
                continue
            note(food)
            if kind not in ("dish", "combo"):
                body.append(struct("confirm", atom("invalid"), atom(food)))
                continue
            if food in availability:
                reject(struct("unavailable", atom(food), availability[food]))
                continue
            for _ in range(count):
                order.add(food, is_combo=kind == "combo")
            confirm("order", food)
        elif frame.kind == "specify":
            state_frames = True
            combo, dish = str(frame.args[0]), str(frame.args[1])
            note(combo)
            note(dish)
            status, payload = _admit_specify(kb, availability, order, combo, dish)
            if status == "ok":
                confirm("specify", dish)
            elif status == "unavailable":
                reject(payload)
            else:
                body.append(struct("confirm", atom(status), atom(str(payload))))
        elif frame.kind == "update":
            state_frames = True
            note(str(frame.args[0]))
            note(str(frame.args[2]))
            status, payload = admit_update(kb, shortage, order, frame, availability)
            if status == "ok":
                confirm(str(frame.args[1]), str(frame.args[2]))
            elif status == "unavailable":
                reject(payload)
            else:
                body.append(struct("confirm", atom(status), atom(str(payload))))
        elif frame.kind == "need_recommend":
            informational = True
            content, rtype = str(frame.args[0]), str(frame.args[1])
            note(content)
            pred = recommend(kb, availability, mentioned, order, content, rtype)
            body.append(pred)
            if pred.name == "recommend" and pred.args[1].name != "none":
                mentioned.add(pred.args[1].name)
        elif frame.kind == "query":
            informational = True
            category, food = str(frame.args[0]), str(frame.args[1])
            note(food)
            answers = answer_query(kb, availability, category, food)
            body.extend(answers)
            for pred in answers:
                if pred.name == "answer":
                    value = pred.args[2]
                    if hasattr(value, "name"):
                        note(value.name)
        elif frame.kind == "completed":
            state_frames = True
            completed_seen = True
            pred = struct("confirm", atom("complete"))
            body.append(pred)
            confirms_kept.append(pred)
        elif frame.kind == "decline":
            state_frames = True
            for line, member, key, _ask in pending_questions(kb, order, session.declined):
                # waving a question off answers it for every instance of
                # the food, mirroring free decisions
                for other in order.instances_of(line.food):
                    session.declined.add((other.food, other.instance, member, key))
                break
        elif frame.kind == "quit":
            quitting = True
        elif frame.kind == "irrelevant":
            state_frames = True
            body.append(struct("confirm", atom("irrelevant"), atom("none")))

    # assemble the round's predicates
    predicates: list[Struct] = []
    for item in body:
        if item is _REJECTIONS:
            predicates.append(
                struct("confirm", atom("unavailable"), make_list(rejections))
            )
        else:
            predicates.append(item)

    ticket: dict | None = None
    if quitting:
        session.phase = "done"
        session.closed = True
        predicates.append(struct("confirm", atom("quit"), atom("none")))
        predicates.append(struct("quit"))
        return ServiceStep(session, predicates, None)

    if completed_seen and session.phase == "listening":
        session.phase = "asking"

    if session.phase == "listening":
        if not (informational and not state_frames):
            predicates.append(struct("else"))
    elif session.phase in ("asking", "checkout"):
        question = next_question(kb, order, session.declined)
        if question is not None:
            session.phase = "asking"
            if not (informational and not state_frames):
                predicates.append(question)
        elif informational and not state_frames:
            pass  # a pure question round leaves the ticket alone
        elif session.phase == "checkout" and not (confirms_kept or completed_seen):
            pass  # nothing changed after checkout; don't repeat the ticket
        else:
            check, ticket = finalize(kb, order)
            if session.phase == "asking" and not completed_seen:
                # answering the last question closes the order: the
                # transition line replaces this round's change confirms
                predicates = [p for p in predicates if p not in confirms_kept]
                predicates.append(struct("confirm", atom("none"), atom("complete")))
            session.phase = "checkout"
            session.last_ticket = ticket
            predicates.extend(check)
    return ServiceStep(session, predicates, ticket)
