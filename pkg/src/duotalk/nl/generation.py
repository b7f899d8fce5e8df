"""Deterministic predicates→text generation.

One fixed template per response-predicate shape; an unknown shape raises
:class:`GenerationError` rather than being dropped silently.  Check-mode
spans (order/specify/update/price runs) render as one itemized ticket
sentence.  Every name, option, and price mentioned by the predicates
appears verbatim somewhere in the output.
"""

from __future__ import annotations

from ..schema import STYLES
from ..terms import Struct, Term, list_items, to_text

__all__ = ["DeterministicGenerator", "GenerationError", "GREETINGS"]

GREETINGS = {
    "manager": "Hey there, can I assist you with anything?",
    "customer": "Greetings, how may I assist you?",
}

_TICKET_WORDS = ("order", "specify", "update", "price")


class GenerationError(Exception):
    """A predicate arrived with no template for it."""


def _text(term: Term) -> str:
    return to_text(term)


class DeterministicGenerator:
    """Template renderer; one instance per role."""

    def __init__(self, role: str):
        if role not in ("manager", "customer"):
            raise ValueError(f"unknown role {role!r}")
        self.role = role

    def generate(self, predicates: list[Struct]) -> str:
        if not predicates:
            raise GenerationError("nothing to say: empty predicate list")
        sentences: list[str] = []
        index = 0
        while index < len(predicates):
            pred = predicates[index]
            if pred.name in _TICKET_WORDS:
                span = []
                while index < len(predicates) and predicates[index].name in _TICKET_WORDS:
                    span.append(predicates[index])
                    index += 1
                sentences.append(self._ticket(span))
                continue
            sentences.append(self._sentence(pred))
            index += 1
        return " ".join(sentences)

    # -- single predicates -------------------------------------------

    def _sentence(self, pred: Struct) -> str:
        if self.role == "manager":
            return self._manager_sentence(pred)
        return self._customer_sentence(pred)

    def _customer_sentence(self, pred: Struct) -> str:
        name, args = pred.name, pred.args
        if name == "else" and not args:
            return "Is there anything else you'd like to include in your order?"
        if name == "quit" and not args:
            return "Have a great day! Goodbye!"
        if name == "ask" and len(args) == 2:
            return self._customer_ask(args)
        if name == "recommend" and len(args) == 2:
            kind, what = _text(args[0]), _text(args[1])
            if what == "none":
                return "I'm afraid I don't have anything new to suggest right now."
            if kind == "category":
                return f"We suggest you sample our {what} from the menu selection."
            if kind == "upgrade":
                return f"We suggest enhancing your meal by adding {what}."
        if name == "answer" and len(args) == 3:
            return self._answer(args)
        if name == "confirm":
            return self._customer_confirm(args)
        raise GenerationError(f"no customer template for {to_text(pred)}")

    def _customer_ask(self, args: tuple) -> str:
        scope, question = args
        items = [_text(t) for t in list_items(scope)]
        if len(items) != 2:
            raise GenerationError(f"malformed ask scope {to_text(scope)}")
        holder, target = items
        q = _text(question)
        if q == "add ingredients or sauces":
            return (
                "What additional toppings or sauces would you prefer"
                f" on your {target}?"
            )
        if q.startswith("make it "):
            style = q.removeprefix("make it ")
            return f"Would you like your {target} to be prepared {style} style?"
        if q == "choose size":
            return f"Could you please tell me the size you prefer for your {target}?"
        if q == "choose one option":
            return f"Which option would you like for the {target} of your {holder}?"
        raise GenerationError(f"no template for question {q!r}")

    def _customer_confirm(self, args: tuple) -> str:
        if len(args) == 1 and _text(args[0]) == "complete":
            return "Thank you for placing your order."
        if len(args) != 2:
            raise GenerationError(f"malformed confirm arity {len(args)}")
        mode, value = _text(args[0]), args[1]
        text = _text(value)
        if mode == "none" and text == "complete":
            return "Thank you for your order."
        if mode == "order":
            return f"You've selected a {text}."
        if mode == "specify":
            return f"Got it, {text} it is."
        if mode == "add":
            return f"We've included {text} in your order."
        if mode == "no":
            return f"Understood, no {text}."
        if mode == "less":
            return f"Got it, we'll go light on the {text}."
        if mode == "extra":
            return f"Extra {text}, you got it."
        if mode == "change":
            return f"We've made that change to {text}."
        if mode in STYLES:
            if text == "no":
                return f"I understand that you prefer not to have it {mode}."
            return f"We'll prepare it {mode} style."
        if mode == "size":
            return f"Noted, {text} size."
        if mode == "unavailable":
            return self._unavailable(value)
        if mode == "unknown":
            return f"Sorry, I couldn't find {text} on our menu."
        if mode == "invalid":
            return f"Sorry, {text} isn't an option here."
        if mode == "not_ordered":
            return f"I don't see {text} in your order yet."
        if mode == "duplicate":
            return f"The {text} change is already taken care of."
        if mode == "irrelevant":
            return "Sorry, I can only help with food orders here."
        if mode == "quit":
            return "Thank you for your visit."
        raise GenerationError(f"no customer template for confirm({mode}, ...)")

    def _unavailable(self, listing: Term) -> str:
        parts: list[str] = []
        for item in list_items(listing):
            if not (isinstance(item, Struct) and item.name == "unavailable"):
                raise GenerationError(f"malformed rejection {to_text(item)}")
            food = _text(item.args[0])
            reason = item.args[1]
            cause = (
                _text(reason.args[0])
                if isinstance(reason, Struct) and reason.args
                else "none"
            )
            if cause == "none":
                parts.append(f"We've run out of {food} at the moment.")
            else:
                parts.append(
                    f"Apologies, but we're currently unable to provide the"
                    f" {food} as we have run out of {cause}."
                )
        if not parts:
            raise GenerationError("empty unavailability listing")
        return " ".join(parts)

    def _answer(self, args: tuple) -> str:
        food, category, value = (_text(args[0]), _text(args[1]), args[2])
        text = _text(value)
        if text == "none":
            return f"I don't have anything to list for {food} there."
        if category == "price":
            return f"The {food} costs ${text}."
        if category == "calories":
            return f"The {food} has {text} calories."
        if category == "ingredient":
            return f"The {food} comes with {text}."
        if category == "add-on":
            return f"You can add {text} to the {food}."
        if category == "replacement":
            items = [_text(t) for t in list_items(value)]
            if len(items) == 2:
                return f"In the {food}, {items[0]} can be swapped for {items[1]}."
        if category == "style":
            return f"The {food} can be prepared {text} style."
        if category == "combo-content":
            return f"The {food} includes {text}."
        if category == "category":
            return f"The {food} is a {text}."
        raise GenerationError(f"no answer template for category {category!r}")

    # -- ticket span ---------------------------------------------------

    def _ticket(self, span: list[Struct]) -> str:
        groups: list[str] = []
        current: str | None = None
        mods: list[str] = []
        total: str | None = None

        def flush() -> None:
            nonlocal current, mods
            if current is None:
                return
            groups.append(f"{current} ({', '.join(mods)})" if mods else current)
            current, mods = None, []

        for pred in span:
            if pred.name == "order":
                flush()
                current = _text(pred.args[0])
            elif pred.name == "specify":
                mods.append(f"with {_text(pred.args[0])}")
            elif pred.name == "update":
                op, option = _text(pred.args[0]), _text(pred.args[1])
                if op in STYLES:
                    mods.append(f"{op} style" if option == "yes" else f"no {op}")
                elif op == "size":
                    mods.append(f"{option} size")
                elif op == "change":
                    mods.append(f"change to {option}")
                else:
                    mods.append(f"{op} {option}")
            elif pred.name == "price":
                total = _text(pred.args[0])
            else:
                raise GenerationError(f"unexpected ticket predicate {to_text(pred)}")
        flush()
        listing = "; ".join(groups)
        if total is None:
            raise GenerationError("ticket span without a total")
        if listing:
            return f"Here is your order: {listing}. The total comes to ${total}."
        return f"Your order is empty. The total comes to ${total}."

    # -- manager -------------------------------------------------------

    def _manager_sentence(self, pred: Struct) -> str:
        name, args = pred.name, pred.args
        if name == "quit" and not args:
            return "Goodbye!"
        if name == "ask" and len(args) == 2:
            target, slot = _text(args[0]), _text(args[1])
            questions = {
                "type": f"Is {target} a dish, a combo, or an ingredient?",
                "category": f"What category does {target} belong to?",
                "price": f"What should {target} cost?",
                "calories": f"How many calories does {target} have?",
                "included_ingredient": (
                    f"Which ingredients does {target} include?"
                    " Say done when the list is complete."
                ),
                "popular_topping": (
                    f"Which toppings are popular on {target}?"
                    " Say done when the list is complete."
                ),
                "combo_contain": (
                    f"What does {target} contain?"
                    " Say done when the list is complete."
                ),
            }
            if slot in questions:
                return questions[slot]
            raise GenerationError(f"no template for manager slot {slot!r}")
        if name == "confirm" and len(args) == 2:
            mode, text = _text(args[0]), _text(args[1])
            templates = {
                "runout": f"Understood, we're running short on {text}.",
                "restore": f"Noted, {text} is back in stock.",
                "add": f"Done, {text} has been added.",
                "edit": f"Done, {text} has been updated.",
                "delete": f"Done, {text} has been removed.",
                "rejected": (
                    f"Sorry, that change to {text} would leave the menu"
                    " inconsistent, so it was not applied."
                ),
                "unknown": f"Sorry, I don't recognize {text}.",
                "invalid": f"Sorry, {text} doesn't fit that change.",
                "not_found": f"I couldn't find {text} on the menu.",
                "irrelevant": "Sorry, I can only help with menu and stock changes.",
                "quit": "Understood, closing up.",
            }
            if mode in templates:
                return templates[mode]
        raise GenerationError(f"no manager template for {to_text(pred)}")
