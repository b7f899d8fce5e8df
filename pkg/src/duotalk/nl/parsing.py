"""Deterministic utterance→frame parsing for both roles.

A fixed cascade of intents runs over normalized tokens; the first intent
that fires wins.  Interpretation leans on conversation context: the open
question decides what a bare "no" or "regular" answers, the last
recommendation resolves "I'd have two" and "add them", and food mentions
resolve by token overlap against the menu vocabulary with edit-distance
correction as the fallback.  Anything unparseable becomes `irrelevant`.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

from ..frames import CustomerFrame, FrameError, ManagerFrame
from ..kb import MenuKB
from ..pricing import parse_price
from ..schema import CATEGORIES, SIZES, STYLES
from ..terms import Atom, Cons, Struct, list_items, to_text
from .names import NameCorrector, simplify

__all__ = ["ParseContext", "Vocabulary", "DeterministicParser", "classify_ask"]

WORD_NUMBERS = {
    "a": 1,
    "an": 1,
    "one": 1,
    "two": 2,
    "three": 3,
    "four": 4,
    "five": 5,
    "six": 6,
    "seven": 7,
    "eight": 8,
    "nine": 9,
    "ten": 10,
    "eleven": 11,
    "twelve": 12,
    "both": 2,
}

# recommendation filters the customer may name besides raw categories
DIET_WORDS = ("vegan", "veggie", "vegetarian", "chicken")


@dataclass(frozen=True)
class Vocabulary:
    """Menu names grouped the way the parser needs them."""

    orderable: tuple[str, ...]  # dishes and combos
    combos: tuple[str, ...]
    options: tuple[str, ...]  # ingredients and sauces
    groups: tuple[str, ...]  # combo option-group names
    everything: tuple[str, ...]

    @classmethod
    def from_kb(cls, kb: MenuKB) -> "Vocabulary":
        combos = tuple(kb.foods("combo"))
        orderable = tuple(kb.foods("dish")) + combos
        options = tuple(kb.foods("ingredient")) + tuple(kb.foods("sauce"))
        groups = tuple(kb.groups())
        return cls(orderable, combos, options, groups, orderable + options + groups)


@dataclass
class ParseContext:
    """What the parser may assume about the conversation so far."""

    role: str  # "manager" | "customer"
    vocabulary: Vocabulary
    open_question: Struct | None = None  # the pending ask predicate
    last_recommendation: str | None = None
    ordered_foods: tuple[str, ...] = ()


def _fold(token: str) -> str:
    """Singular/plural-insensitive comparison key."""
    return token[:-1] if len(token) > 3 and token.endswith("s") else token


def _tokens(text: str) -> list[str]:
    return simplify(text).split()


def match_name(tokens: list[str], names: tuple[str, ...]) -> str | None:
    """Best vocabulary name by token overlap.

    Coverage (how many of the name's words occur in the utterance) wins,
    then precision (fraction of the name covered), then listing order.
    """
    folded = {_fold(t) for t in tokens}
    best: tuple[int, float, int] | None = None
    best_name = None
    for index, name in enumerate(names):
        name_tokens = _tokens(name)
        overlap = sum(1 for t in name_tokens if _fold(t) in folded)
        if overlap == 0:
            continue
        key = (overlap, overlap / len(name_tokens), -index)
        if best is None or key > best:
            best, best_name = key, name
    return best_name


def parse_count(tokens: list[str], default: int = 1, exclude: tuple[str, ...] = ()) -> int:
    """First quantity among tokens; numerals belonging to a matched name
    (e.g. the 5 in "Beefy 5-Layer Burrito") are skipped once each."""
    credits = Counter(_fold(t) for t in exclude)
    for token in tokens:
        folded = _fold(token)
        if credits[folded] > 0:
            credits[folded] -= 1
            continue
        if token.isdigit():
            return max(1, int(token))
        if token in WORD_NUMBERS and token not in ("a", "an"):
            return WORD_NUMBERS[token]
    return default


def _order_intent(low: str, text: str) -> bool:
    """Does the utterance sound like ordering (rather than asking)?"""
    return bool(
        re.search(r"\b(have|get|take|order|want|like|buy|give me|try)\b", low)
        or re.search(r"\b(too|as well|also|another)[.!?]*$", low)
        or text.rstrip(".!?").lower().endswith("please")
    )


def classify_ask(ask: Struct | None) -> dict | None:
    """Break an ask predicate into what it is asking about.

    Service asks carry a [combo-or-none, target] scope list; manager
    asks carry (food, slot).  Returns keys: kind, plus target/combo/
    group/style/slot as applicable.
    """
    if ask is None or ask.name != "ask" or len(ask.args) != 2:
        return None
    scope, question = ask.args
    if isinstance(scope, Cons):
        first, second = (to_text(item) for item in list_items(scope))
        text = to_text(question)
        if text == "choose one option":
            return {"kind": "slot", "combo": first, "group": second}
        target = {"kind": None, "target": second}
        target["combo"] = None if first == "none" else first
        if text.startswith("make it "):
            target["kind"] = "style"
            target["style"] = text.removeprefix("make it ")
        elif text == "choose size":
            target["kind"] = "size"
        else:
            target["kind"] = "topping"
        return target
    if isinstance(scope, Atom):
        return {"kind": "manager-slot", "target": to_text(scope), "slot": to_text(question)}
    return None


_NEGATIVE = re.compile(r"^(no+( thanks| thank you)?|nope|nah|not now)\W*$")
_AFFIRMATIVE = re.compile(r"^(yes( please)?|yeah|yep|sure|ok|okay|sounds good)\W*$")
_DONE_WORDS = re.compile(
    r"\b(that(?:['\s]?s| is| (?:would|will) be) (all|it|everything)"
    r"|all i need|nothing else|no more|i['\s]?m done|done)\b"
)


class DeterministicParser:
    """Pattern cascade parser; one instance per role."""

    def __init__(self, role: str):
        if role not in ("manager", "customer"):
            raise ValueError(f"unknown role {role!r}")
        self.role = role

    # -- entry point ------------------------------------------------

    def parse(self, utterance: str, context: ParseContext) -> list:
        if context.role != self.role:
            raise ValueError("context role does not match parser role")
        try:
            if self.role == "manager":
                frames = self._parse_manager(utterance, context)
            else:
                frames = self._parse_customer(utterance, context)
        except FrameError:
            frames = None
        if not frames:
            kind = ManagerFrame if self.role == "manager" else CustomerFrame
            frames = [kind("irrelevant")]
        return frames

    # -- shared helpers ----------------------------------------------

    def _corrector(self, names: tuple[str, ...]) -> NameCorrector:
        return NameCorrector(names)

    def _find_name(
        self, text: str, tokens: list[str], names: tuple[str, ...]
    ) -> str | None:
        """Token overlap first; edit-distance over the trailing mention
        as the typo fallback."""
        if not names:
            return None
        direct = match_name(tokens, names)
        if direct is not None:
            return direct
        mention = _trailing_mention(text)
        if mention:
            return self._corrector(names).correct(mention)
        return None

    # -- manager cascade ---------------------------------------------

    def _parse_manager(self, utterance: str, context: ParseContext) -> list | None:
        text = utterance.strip()
        low = simplify(text)
        tokens = low.split()
        vocab = context.vocabulary
        ask = classify_ask(context.open_question)

        if re.search(r"\b(bye|goodbye|quit|that['\s]?s all for (today|now))\b", low):
            return [ManagerFrame("quit")]

        questionnaire_open = ask is not None and ask["kind"] == "manager-slot"

        if re.search(
            r"\b(no more|out of stock|r[au]n out|(?:are|is|we\s?re) out of"
            r"|running (short|low)|short on|don'?t have any)\b",
            low,
        ):
            name = self._find_name(text, tokens, vocab.everything)
            if name is not None:
                return [ManagerFrame("runout", (name,))]
            if not questionnaire_open:  # e.g. "no more" can close a list below
                return [ManagerFrame("runout", (_trailing_mention(text) or text,))]

        if re.search(r"\b(restock(ed)?|back in stock|restored?|resupplied|replenish(ed)?)\b", low):
            name = self._find_name(text, tokens, vocab.everything)
            if name is not None:
                return [ManagerFrame("restore", (name,))]
            if not questionnaire_open:
                return [ManagerFrame("restore", (_trailing_mention(text) or text,))]

        # an open add-food questionnaire claims the utterance first
        if ask is not None and ask["kind"] == "manager-slot":
            answer = self._manager_slot_answer(text, low, tokens, ask, context)
            if answer:
                return answer

        new_food = self._manager_new_food(text, low)
        if new_food:
            return new_food

        edit = self._manager_edit(text, low, tokens, vocab)
        if edit:
            return edit

        delete = self._manager_delete(text, low, tokens, vocab)
        if delete:
            return delete

        flag = self._manager_flag_add(text, low, vocab)
        if flag:
            return flag

        return None

    def _manager_slot_answer(
        self, text: str, low: str, tokens: list[str], ask: dict, context: ParseContext
    ) -> list | None:
        target, slot = ask["target"], ask["slot"]
        if slot == "type":
            for kind in ("dish", "combo", "ingredient"):
                if kind in tokens:
                    return [ManagerFrame("add", (kind, target))]
            return None
        if slot in ("included_ingredient", "popular_topping", "combo_contain"):
            if _DONE_WORDS.search(low) or _NEGATIVE.match(low):
                return [ManagerFrame("done")]
            names = context.vocabulary.options
            if slot == "combo_contain":
                names = context.vocabulary.orderable + context.vocabulary.groups
            frames = []
            for part in re.split(r",| and ", text):
                part = part.strip(" .!?")
                if not part:
                    continue
                resolved = self._corrector(names).correct(part) if names else None
                frames.append(ManagerFrame("add", (target, slot, resolved or part)))
            return frames or None
        if slot == "price":
            cents = _find_money(text)
            if cents is not None:
                return [ManagerFrame("add", (target, "price", cents))]
            return None
        if slot == "calories":
            number = _find_integer(tokens)
            if number is not None:
                return [ManagerFrame("add", (target, "calories", number))]
            return None
        if slot == "category":
            category = _find_category(tokens)
            if category is not None:
                return [ManagerFrame("add", (target, "category", category))]
            return None
        return None

    def _manager_new_food(self, text: str, low: str) -> list | None:
        match = re.search(
            r"\b(?:add|create|introduce)\b.*?\bnew\s+(dish|combo|ingredient)?"
            r"\s*(?:called|named)?\s*(.+?)[.!?]?$",
            text,
            re.IGNORECASE,
        )
        if not match:
            return None
        kind, name = match.group(1), match.group(2).strip().strip("'\"")
        if not name:
            return None
        if kind:
            return [ManagerFrame("add", (kind.lower(), name))]
        return [ManagerFrame("add", (name,))]

    def _manager_edit(
        self, text: str, low: str, tokens: list[str], vocab: Vocabulary
    ) -> list | None:
        # swap one included ingredient for another
        match = re.search(
            r"\b(?:replace|swap|change)\b\s+(?:the\s+)?(.+?)\s+(?:with|for|to)\s+(.+?)"
            r"\s+(?:in|on)\s+(?:the\s+)?(.+?)[.!?]?$",
            text,
            re.IGNORECASE,
        )
        if match and vocab.options:
            corrector = self._corrector(vocab.options)
            old = corrector.correct(match.group(1))
            new = corrector.correct(match.group(2))
            food = self._corrector(vocab.everything).correct(match.group(3))
            if old and new and food:
                return [ManagerFrame("edit", (food, "included_ingredient", old, new))]
        match = re.search(
            r"\b(?:change|set|update)\b.*?\b(price|calories|category)\b"
            r"(?:\s+of)?\s+(?:the\s+)?(.+?)\s+to\s+(.+?)[.!?]?$",
            text,
            re.IGNORECASE,
        )
        if not match:
            return None
        prop = match.group(1).lower()
        food = self._corrector(vocab.everything).correct(match.group(2))
        if food is None:
            food = match.group(2).strip()
        raw_value = match.group(3).strip()
        if prop == "price":
            cents = _find_money(raw_value)
            if cents is None:
                return None
            return [ManagerFrame("edit", (food, "price", cents))]
        if prop == "calories":
            number = _find_integer(raw_value.split())
            if number is None:
                return None
            return [ManagerFrame("edit", (food, "calories", number))]
        category = _find_category(raw_value.split())
        if category is None:
            return None
        return [ManagerFrame("edit", (food, "category", category))]

    def _manager_delete(
        self, text: str, low: str, tokens: list[str], vocab: Vocabulary
    ) -> list | None:
        match = re.search(
            r"\b(?:remove|delete|drop)\b\s+(?:the\s+)?(.+?)\s+from\s+(?:the\s+)?(.+?)[.!?]?$",
            text,
            re.IGNORECASE,
        )
        if match:
            what, holder = match.group(1), match.group(2)
            if re.fullmatch(r"menu", holder.strip(), re.IGNORECASE):
                food = self._corrector(vocab.everything).correct(what)
                if food:
                    return [ManagerFrame("delete", (food,))]
                return None
            food = self._corrector(vocab.everything).correct(holder)
            value = (
                self._corrector(vocab.options).correct(what) if vocab.options else None
            )
            if food and value:
                return [ManagerFrame("delete", (food, "included_ingredient", value))]
            return None
        match = re.search(
            r"\b(?:remove|delete|drop)\b\s+(?:the\s+)?(.+?)[.!?]?$", text, re.IGNORECASE
        )
        if match:
            food = self._corrector(vocab.everything).correct(match.group(1))
            if food:
                return [ManagerFrame("delete", (food,))]
        return None

    def _manager_flag_add(self, text: str, low: str, vocab: Vocabulary) -> list | None:
        match = re.search(
            r"\bmark\b\s+(?:the\s+)?(.+?)\s+as\s+(?:a\s+)?(best ?seller|veggie|vegan)\b",
            text,
            re.IGNORECASE,
        )
        if not match:
            return None
        food = self._corrector(vocab.everything).correct(match.group(1))
        if food is None:
            return None
        flag = match.group(2).lower().replace(" ", "")
        prop = {"bestseller": "best_seller", "veggie": "veggie", "vegan": "veggie"}[flag]
        return [ManagerFrame("add", (food, prop, "yes"))]

    # -- customer cascade --------------------------------------------

    def _parse_customer(self, utterance: str, context: ParseContext) -> list | None:
        text = utterance.strip()
        low = simplify(text)
        tokens = low.split()
        vocab = context.vocabulary
        ask = classify_ask(context.open_question)

        if re.search(r"\b(bye|goodbye|see you)\b", low):
            return [CustomerFrame("quit")]

        if _DONE_WORDS.search(low) and not re.search(r"\badd\b", low):
            return [CustomerFrame("completed")]

        # bare yes/no answers the open question
        if _NEGATIVE.match(low):
            if ask and ask["kind"] == "style":
                return [CustomerFrame("update", (ask["target"], ask["style"], "no"))]
            if ask:
                return [CustomerFrame("decline")]
            return [CustomerFrame("completed")]
        if _AFFIRMATIVE.match(low):
            if ask and ask["kind"] == "style":
                return [CustomerFrame("update", (ask["target"], ask["style"], "yes"))]
            return None  # a bare yes answers nothing actionable

        # size answers ("regular"/"large"), steered by the open question
        size_word = next((t for t in tokens if t in SIZES), None)
        if size_word and (ask and ask["kind"] == "size" or "size" in tokens):
            target = ask["target"] if ask and ask["kind"] == "size" else None
            if target is None:
                target = match_name(tokens, vocab.orderable)
            if target is not None:
                return [CustomerFrame("update", (target, "size", size_word))]

        # style answered (or requested outright) by naming the style
        style_word = next((t for t in tokens if t in STYLES), None)
        if style_word is not None:
            answer = "no" if re.search(r"\b(no|not|without)\b", low) else "yes"
            if ask and ask["kind"] == "style" and ask["style"] == style_word:
                return [CustomerFrame("update", (ask["target"], style_word, answer))]
            target = match_name(tokens, vocab.orderable)
            if target is None and context.ordered_foods:
                target = context.ordered_foods[-1]
            if target is not None:
                return [CustomerFrame("update", (target, style_word, answer))]

        # choosing the dish for a combo slot
        if ask and ask["kind"] == "slot":
            dish = self._find_name(text, tokens, vocab.orderable)
            if dish is not None:
                return [CustomerFrame("specify", (ask["combo"], dish))]

        if re.search(r"\b(recommend\w*|suggest\w*|popular)\b", low):
            content = _find_diet(tokens) or _find_category(tokens)
            if content is None and re.search(r"\b(add|topping|upgrade)\w*\b", low):
                target = self._upgrade_target(tokens, vocab, ask, context)
                if target is not None:
                    return [CustomerFrame("need_recommend", (target, "upgrade"))]
            return [CustomerFrame("need_recommend", (content or "all", "category"))]

        if re.search(r"\bwhat\b.*\b(usually|people|everyone)\b.*\b(add|get|order)\b", low):
            target = self._upgrade_target(tokens, vocab, ask, context)
            if target is not None:
                return [CustomerFrame("need_recommend", (target, "upgrade"))]

        query = self._customer_query(text, low, tokens, vocab, ask, context)
        if query:
            return query

        update = self._customer_update(text, low, tokens, vocab, ask, context)
        if update:
            return update

        return self._customer_order(text, low, tokens, vocab, context)

    def _upgrade_target(self, tokens, vocab, ask, context) -> str | None:
        food = match_name(tokens, vocab.orderable)
        if food is not None:
            return food
        if ask and ask.get("target"):
            return ask["target"]
        if context.ordered_foods:
            return context.ordered_foods[-1]
        return None

    def _customer_query(
        self, text: str, low: str, tokens: list[str], vocab, ask, context
    ) -> list | None:
        category = None
        if re.search(r"\b(how much|price|cost)\b", low):
            category = "price"
        elif re.search(r"\bcalor\w*\b", low):
            category = "calories"
        elif re.search(r"\bwhat('?s| is| are| do(es)?)?\b.*\b(in|inside|include[ds]?|contains?|ingredients?)\b", low) and not re.search(
            r"\badd\b", low
        ):
            category = "ingredient"
            if match_name(tokens, vocab.orderable) in vocab.combos:
                category = "combo-content"
        elif re.search(r"\bwhat\b.*\b(add|topping|sauce)\w*\b.*\b(available|have|choose|options?)\b", low):
            category = "add-on"
        elif re.search(r"\bwhat\b.*\b(replace|swap|substitut)\w*\b", low):
            category = "replacement"
        elif re.search(r"\bwhat\b.*\bstyles?\b", low):
            category = "style"
        elif re.search(r"\bwhat\b.*\b(kind|type|category)\b", low):
            category = "category"
        if category is None:
            return None
        food = self._find_name(text, tokens, vocab.everything)
        if food is None and ask and ask.get("target"):
            food = ask["target"]
        if food is None and context.ordered_foods:
            food = context.ordered_foods[-1]
        if food is None:
            food = "all"
        return [CustomerFrame("query", (category, food))]

    def _customer_update(
        self, text: str, low: str, tokens: list[str], vocab, ask, context
    ) -> list | None:
        # replace one ingredient with another
        match = re.search(
            r"\b(?:change|swap|replace|switch)\b.*?\b(?:with|for|to)\s+(.+?)"
            r"(?:\s+(?:on|in|from)\b.*)?[.!?]*$",
            text,
            re.IGNORECASE,
        )
        if match and vocab.options:
            option = self._corrector(vocab.options).correct(match.group(1))
            target = self._update_target(tokens, vocab, ask, context)
            if option and target:
                return [CustomerFrame("update", (target, "change", option))]

        # words naming the target dish must not double as option mentions
        # ("add them to both tacos": "tacos" names the dish, not a topping)
        target_words: set[str] = set()
        if ask and ask.get("target"):
            target_words |= {_fold(t) for t in _tokens(ask["target"])}
        dish_mention = match_name(tokens, vocab.orderable)
        if dish_mention is not None:
            target_words |= {_fold(t) for t in _tokens(dish_mention)}
        option_tokens = [t for t in tokens if _fold(t) not in target_words]

        option = match_name(option_tokens, vocab.options)
        if option is None and re.search(r"\b(them|it)\b", low):
            rec = context.last_recommendation
            if rec is not None and rec in vocab.options:
                option = rec
        if option is None:
            return None

        op = "add"
        if re.search(r"\b(no|without|hold|remove|take off|skip)\b", low):
            op = "no"
        elif re.search(r"\b(less|light|easy) (on )?\b", low) or "less" in tokens:
            op = "less"
        elif re.search(r"\b(extra|double|more)\b", low):
            op = "extra"
        elif not re.search(r"\b(add|have|get|want|include|put|with|throw|give|like)\b", low):
            return None

        target = self._update_target(tokens, vocab, ask, context)
        if target is None:
            return None
        exclude = tuple(simplify(target).split()) + tuple(simplify(option).split())
        count = parse_count(tokens, default=1, exclude=exclude)
        updates = [CustomerFrame("update", (target, op, option))] * count
        # "two soft tacos with beans": ordering and customizing in one breath
        if (
            op == "add"
            and target in vocab.orderable
            and target not in context.ordered_foods
            and not (ask and ask.get("target") == target)
            and _order_intent(low, text)
        ):
            return [CustomerFrame("order", (target, count))] + updates
        return updates

    def _update_target(self, tokens, vocab, ask, context) -> str | None:
        if ask and ask.get("target"):
            return ask["target"]
        explicit = match_name(tokens, vocab.orderable)
        if explicit is not None:
            return explicit
        if context.ordered_foods:
            return context.ordered_foods[-1]
        return None

    def _customer_order(
        self, text: str, low: str, tokens: list[str], vocab, context
    ) -> list | None:
        wants = _order_intent(low, text)
        food = self._find_name(text, tokens, vocab.orderable)
        if food is None and wants and context.last_recommendation in vocab.orderable:
            food = context.last_recommendation
        if food is None or not wants:
            return None
        count = parse_count(tokens, default=1, exclude=tuple(simplify(food).split()))
        return [CustomerFrame("order", (food, count))]


# ------------------------------------------------------------
# small extraction helpers
# ------------------------------------------------------------

_MENTION = re.compile(
    r"(?:have|get|take|order|want|like|buy|add|of|on|more|any)\s+"
    r"(?:a|an|one|two|three|some|the|my|your)?\s*([A-Za-z][A-Za-z' -]*?)[.!?,]?$"
)


def _trailing_mention(text: str) -> str | None:
    """The noun-ish tail of an utterance, for typo correction."""
    match = _MENTION.search(text.strip())
    if match:
        return match.group(1).strip()
    return None


def _find_money(text: str) -> int | None:
    match = re.search(r"\$?(\d+(?:\.\d{1,2})?)\s*(?:dollars?|bucks?)?", text)
    if not match:
        return None
    return parse_price(match.group(1))


def _find_integer(tokens: list[str]) -> int | None:
    for token in tokens:
        if token.isdigit():
            return int(token)
        if token in WORD_NUMBERS and token not in ("a", "an"):
            return WORD_NUMBERS[token]
    return None


def _find_category(tokens: list[str]) -> str | None:
    for token in tokens:
        folded = _fold(token)
        if folded in CATEGORIES:
            return folded
    return None


def _find_diet(tokens: list[str]) -> str | None:
    for token in tokens:
        if token in DIET_WORDS:
            return "veggie" if token in ("vegan", "vegetarian") else token
    return None
