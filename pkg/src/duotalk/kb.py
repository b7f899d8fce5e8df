"""Menu knowledge base: loading, validation, lookup, atomic mutation.

A `MenuKB` is an immutable snapshot of ground menu facts plus a version
counter.  Mutations never touch a snapshot in place: `apply_mutations`
validates the complete resulting fact set and returns a *new* snapshot,
so a failed mutation leaves the original untouched by construction.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .schema import CATEGORIES, FOOD_DECL_PREDS, SCHEMA, STYLES
from .terms import (
    Atom,
    Num,
    Struct,
    Term,
    is_proper_list,
    list_items,
    make_list,
    parse_program,
    to_source_fact,
    to_text,
)

log = logging.getLogger(__name__)

FOOD_KINDS = ("dish", "combo", "ingredient", "sauce")


@dataclass(frozen=True)
class Violation:
    """One validation finding; severity is `error` or `warning`."""

    severity: str
    code: str
    message: str
    fact: str = ""

    def as_dict(self) -> dict[str, str]:
        return {
            "severity": self.severity,
            "code": self.code,
            "message": self.message,
            "fact": self.fact,
        }


class KBValidationError(ValueError):
    """The fact set violates the menu schema; carries all findings."""

    def __init__(self, violations: list[Violation]):
        errors = [v for v in violations if v.severity == "error"]
        lines = "\n".join(f"  [{v.code}] {v.message}" for v in errors)
        super().__init__(f"{len(errors)} schema violation(s):\n{lines}")
        self.violations = violations


class MutationError(ValueError):
    """A mutation set could not be applied (missing/duplicate facts)."""


@dataclass(frozen=True)
class MutationSet:
    """Facts to remove and add in one atomic step."""

    adds: tuple[Struct, ...] = ()
    removes: tuple[Struct, ...] = ()

    def __bool__(self) -> bool:
        return bool(self.adds or self.removes)

    def describe(self) -> str:
        parts = [f"-{to_text(f)}" for f in self.removes] + [f"+{to_text(f)}" for f in self.adds]
        return "; ".join(parts) if parts else "(empty)"


class MenuKB:
    """Immutable, indexed snapshot of the menu fact base."""

    def __init__(self, facts: list[Struct], version: int = 1):
        self.facts: tuple[Struct, ...] = tuple(facts)
        self.version = version
        self._index: dict[str, list[Struct]] = {}
        for fact in self.facts:
            self._index.setdefault(fact.key, []).append(fact)
        self._kinds: dict[str, str] = {}
        for kind in FOOD_KINDS:
            for fact in self._index.get(f"{kind}/1", []):
                arg = fact.args[0]
                if isinstance(arg, Atom):
                    self._kinds.setdefault(arg.name, kind)

    # ---- lookups --------------------------------------------------

    def lookup(self, predicate: str, args: list[object | None] | None = None) -> list[Struct]:
        """All facts of a predicate matching a partial argument pattern.

        `args` pairs up with fact arguments positionally; None entries
        are wildcards.  Plain strings/ints are coerced to terms, so
        `lookup('included_ingredient', ['Soft Taco', None])` works.
        """
        arity = len(args) if args is not None else _schema_arity(predicate)
        facts = self._index.get(f"{predicate}/{arity}", [])
        if not args:
            return list(facts)
        pattern = [_coerce(a) for a in args]
        out = []
        for fact in facts:
            if all(p is None or p == got for p, got in zip(pattern, fact.args)):
                out.append(fact)
        return out

    def first(self, predicate: str, args: list[object | None]) -> Struct | None:
        found = self.lookup(predicate, args)
        return found[0] if found else None

    def food_kind(self, name: str) -> str | None:
        """'dish' | 'combo' | 'ingredient' | 'sauce' | None."""
        return self._kinds.get(name)

    def foods(self, kind: str | None = None) -> list[str]:
        if kind is None:
            return [n for n in self._kinds]
        return [f.args[0].name for f in self._index.get(f"{kind}/1", [])]  # type: ignore[union-attr]

    def vocabulary(self) -> list[str]:
        """Every food name, for name correction."""
        return list(self._kinds)

    def groups(self) -> dict[str, list[str]]:
        """Option-group name -> member dish names."""
        out: dict[str, list[str]] = {}
        for fact in self._index.get("combo_option_group/2", []):
            out[fact.args[0].name] = [a.name for a in list_items(fact.args[1])]  # type: ignore[union-attr]
        return out

    def price(self, food: str) -> int | None:
        fact = self.first("original_price", [food, None])
        return fact.args[1].value if fact else None  # type: ignore[union-attr]

    def calories(self, food: str) -> int | None:
        fact = self.first("original_cal", [food, None])
        return fact.args[1].value if fact else None  # type: ignore[union-attr]

    # ---- serialization --------------------------------------------

    def serialize(self) -> str:
        """Render back to fact-file text, grouped by schema predicate."""
        lines = ["% menu knowledge base (generated)"]
        for key in SCHEMA:
            facts = self._index.get(key, [])
            if facts:
                lines.append("")
                for fact in facts:
                    lines.append(to_source_fact(fact))
        return "\n".join(lines) + "\n"


def _coerce(value: object | None) -> Term | None:
    if value is None or isinstance(value, Term):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a term")
    if isinstance(value, int):
        return Num(value)
    if isinstance(value, str):
        return Atom(value)
    raise TypeError(f"cannot use {value!r} in a lookup pattern")


def _schema_arity(predicate: str) -> int:
    for key in SCHEMA:
        name, arity = key.rsplit("/", 1)
        if name == predicate:
            return int(arity)
    return 0


# ============================================================
# Validation
# ============================================================


def validate_facts(facts: list[Struct]) -> list[Violation]:
    """Full schema validation; returns all findings, errors and warnings."""
    out: list[Violation] = []

    def err(code: str, message: str, fact: Struct | None = None) -> None:
        out.append(Violation("error", code, message, to_text(fact) if fact else ""))

    def warn(code: str, message: str, fact: Struct | None = None) -> None:
        out.append(Violation("warning", code, message, to_text(fact) if fact else ""))

    # --- predicate-level shape checks
    seen: set[Struct] = set()
    kinds: dict[str, set[str]] = {}
    groups: dict[str, list[str]] = {}
    for fact in facts:
        if fact in seen:
            warn("duplicate-fact", f"fact repeated: {to_text(fact)}", fact)
        seen.add(fact)
        if fact.key not in SCHEMA:
            err("unknown-predicate", f"{fact.key} is not a menu predicate", fact)
            continue
        for arg, kind in zip(fact.args, SCHEMA[fact.key]):
            if kind in ("money", "cal"):
                if not isinstance(arg, Num) or arg.value < 0:
                    err("bad-number", f"{kind} argument must be a non-negative integer", fact)
            elif kind == "dish_list":
                if not is_proper_list(arg):
                    err("bad-list", "option group members must be a list", fact)
            elif not isinstance(arg, Atom):
                err("bad-atom", f"{kind} argument must be an atom", fact)
        if fact.key in FOOD_DECL_PREDS and isinstance(fact.args[0], Atom):
            kinds.setdefault(fact.args[0].name, set()).add(fact.name)
        if fact.key == "combo_option_group/2" and is_proper_list(fact.args[1]):
            groups[fact.args[0].name] = [
                a.name for a in list_items(fact.args[1]) if isinstance(a, Atom)
            ]

    for name, declared in kinds.items():
        if len(declared) > 1:
            err("ambiguous-food", f"{name!r} declared as more than one kind: {sorted(declared)}")
    for group in groups:
        if group in kinds:
            err("group-name-clash", f"option group {group!r} collides with a food name")

    def kind_of(name: str) -> str | None:
        declared = kinds.get(name)
        return next(iter(declared)) if declared and len(declared) == 1 else None

    # --- referential closure and per-kind constraints
    index: dict[str, list[Struct]] = {}
    for fact in facts:
        index.setdefault(fact.key, []).append(fact)

    def check_name(fact: Struct, pos: int, wanted: tuple[str, ...], what: str) -> None:
        arg = fact.args[pos]
        if not isinstance(arg, Atom):
            return
        kind = kind_of(arg.name)
        if kind is None:
            err("undeclared-food", f"{what} {arg.name!r} is not a declared food", fact)
        elif kind not in wanted:
            err(
                "wrong-kind",
                f"{what} {arg.name!r} is a {kind}, expected {' or '.join(wanted)}",
                fact,
            )

    for fact in facts:
        if fact.key not in SCHEMA:
            continue
        for pos, kind in enumerate(SCHEMA[fact.key]):
            arg = fact.args[pos]
            if kind == "food":
                check_name(fact, pos, ("dish", "combo", "ingredient", "sauce"), "food")
            elif kind == "dish":
                check_name(fact, pos, ("dish",), "dish")
            elif kind == "combo":
                check_name(fact, pos, ("combo",), "combo")
            elif kind == "topping":
                check_name(fact, pos, ("ingredient", "sauce"), "ingredient/sauce")
            elif kind == "category":
                if isinstance(arg, Atom) and arg.name not in CATEGORIES:
                    err("unknown-category", f"{arg.name!r} is not a known category", fact)
            elif kind == "style":
                if isinstance(arg, Atom) and arg.name not in STYLES:
                    err("unknown-style", f"{arg.name!r} is not a known style", fact)
            elif kind == "member":
                if isinstance(arg, Atom) and arg.name not in groups:
                    check_name(fact, pos, ("dish",), "combo member")
            elif kind == "group":
                if isinstance(arg, Atom) and arg.name not in groups:
                    err("unknown-group", f"{arg.name!r} is not a defined option group", fact)
            elif kind == "dish_list":
                if is_proper_list(arg):
                    for item in list_items(arg):
                        if isinstance(item, Atom):
                            k = kind_of(item.name)
                            if k != "dish":
                                err(
                                    "bad-group-member",
                                    f"group member {item.name!r} is not a dish",
                                    fact,
                                )

    # --- cardinality: prices and categories
    def names_of(key: str) -> list[str]:
        return [f.args[0].name for f in index.get(key, []) if isinstance(f.args[0], Atom)]

    price_count: dict[str, int] = {}
    for fact in index.get("original_price/2", []):
        if isinstance(fact.args[0], Atom):
            price_count[fact.args[0].name] = price_count.get(fact.args[0].name, 0) + 1
    category_count: dict[str, int] = {}
    for fact in index.get("category/2", []):
        if isinstance(fact.args[0], Atom):
            category_count[fact.args[0].name] = category_count.get(fact.args[0].name, 0) + 1

    for dish in names_of("dish/1"):
        if price_count.get(dish, 0) != 1:
            err("price-cardinality", f"dish {dish!r} must have exactly one original_price")
        if category_count.get(dish, 0) != 1:
            err("category-cardinality", f"dish {dish!r} must have exactly one category")
    contents_count: dict[str, int] = {}
    for fact in index.get("combo_contain/2", []):
        if isinstance(fact.args[0], Atom):
            contents_count[fact.args[0].name] = contents_count.get(fact.args[0].name, 0) + 1
    for combo in names_of("combo/1"):
        if price_count.get(combo, 0) != 1:
            err("price-cardinality", f"combo {combo!r} must have exactly one original_price")
        if contents_count.get(combo, 0) == 0:
            err("combo-no-content", f"combo {combo!r} contains no dishes or option groups")
    if len(index.get("upgrade_size_price/1", [])) > 1:
        err("size-price-cardinality", "more than one upgrade_size_price fact")

    # --- cross-fact expectations (warnings)
    def pairs(key: str) -> set[tuple[str, str]]:
        return {
            (f.args[0].name, f.args[1].name)
            for f in index.get(key, [])
            if isinstance(f.args[0], Atom) and isinstance(f.args[1], Atom)
        }

    available = pairs("available_topping/2")
    upgrade_priced = {
        (f.args[0].name, f.args[1].name) for f in index.get("upgrade_price/3", [])
    }
    upgrade_cal = {(f.args[0].name, f.args[1].name) for f in index.get("upgrade_cal/3", [])}
    for pair in sorted(pairs("popular_topping/2") - available):
        warn("popular-not-available", f"popular topping {pair[1]!r} is not addable on {pair[0]!r}")
    for pair in sorted(available - upgrade_priced):
        warn("missing-upgrade-price", f"no upgrade_price for topping {pair[1]!r} on {pair[0]!r}")
    for pair in sorted(upgrade_priced - upgrade_cal):
        warn("missing-upgrade-cal", f"no upgrade_cal for priced topping {pair[1]!r} on {pair[0]!r}")

    included = pairs("included_ingredient/2")
    for fact in index.get("replaceable_ingredient/3", []):
        dish, orig, _repl = (a.name for a in fact.args if isinstance(a, Atom))
        if (dish, orig) not in included:
            warn(
                "replace-not-included",
                f"replaceable ingredient {orig!r} is not included in {dish!r}",
                fact,
            )
    replace_priced = {
        (f.args[0].name, f.args[1].name, f.args[2].name)
        for f in index.get("replacement_price/4", [])
    }
    for fact in index.get("replaceable_ingredient/3", []):
        triple = tuple(a.name for a in fact.args)
        if triple not in replace_priced:
            warn("missing-replacement-price", f"no replacement_price for {triple}", fact)

    styled = pairs("available_special_style/2")
    style_priced = {
        (f.args[0].name, f.args[1].name) for f in index.get("special_style_price/3", [])
    }
    for pair in sorted(styled - style_priced):
        warn("missing-style-price", f"no special_style_price for {pair[1]} on {pair[0]!r}")

    group_prices = index.get("group_upgrade_price/3", [])
    for fact in group_prices:
        group, dish = fact.args[0].name, fact.args[1].name
        if group in groups and dish not in groups[group]:
            err("upgrade-outside-group", f"{dish!r} is not a member of group {group!r}", fact)

    for drink in names_of("size_changable_drink/1"):
        cat = next(
            (f.args[1].name for f in index.get("category/2", []) if f.args[0] == Atom(drink)),
            None,
        )
        if cat is not None and cat != "drink":
            warn("sized-non-drink", f"size-changable {drink!r} has category {cat!r}")

    return out


# ============================================================
# Loading and mutating
# ============================================================


def load_kb(text: str, version: int = 1) -> MenuKB:
    """Parse and validate menu text; raise KBValidationError on errors."""
    facts, rules = parse_program(text)
    if rules:
        raise KBValidationError(
            [Violation("error", "rules-in-kb", f"menu files hold facts only, found rule: {rules[0]}")]
        )
    violations = validate_facts(facts)
    for violation in violations:
        if violation.severity == "warning":
            log.warning("kb: %s (%s)", violation.message, violation.code)
    if any(v.severity == "error" for v in violations):
        raise KBValidationError(violations)
    return MenuKB(facts, version)


def load_kb_file(path: str) -> MenuKB:
    with open(path, encoding="utf-8") as handle:
        return load_kb(handle.read())


def default_menu() -> MenuKB:
    """The drive-thru menu bundled with the package."""
    from importlib import resources

    text = (resources.files("duotalk") / "data" / "menu.lp").read_text(encoding="utf-8")
    return load_kb(text)


def apply_mutations(kb: MenuKB, mutations: MutationSet) -> MenuKB:
    """Atomically apply a mutation set, returning a new validated snapshot.

    Raises MutationError for removes that target missing facts or adds
    that duplicate existing ones, and KBValidationError when the result
    would violate the schema.  The input snapshot is never modified.
    """
    facts = list(kb.facts)
    for fact in mutations.removes:
        try:
            facts.remove(fact)
        except ValueError:
            raise MutationError(f"cannot remove missing fact {to_text(fact)}") from None
    for fact in mutations.adds:
        if fact in facts:
            raise MutationError(f"fact already present: {to_text(fact)}")
        facts.append(fact)
    violations = validate_facts(facts)
    if any(v.severity == "error" for v in violations):
        raise KBValidationError(violations)
    return MenuKB(facts, kb.version + 1)


def delete_food_mutations(kb: MenuKB, food: str) -> MutationSet:
    """The closure of facts to drop when a food leaves the menu.

    Scans every fact: any fact naming the food in an argument is
    removed; option-group lists containing it are rewritten without it;
    a group emptied this way disappears along with the facts that
    reference the group.
    """
    target = Atom(food)
    removes: list[Struct] = []
    adds: list[Struct] = []
    emptied_groups: set[str] = set()
    for fact in kb.facts:
        if target in fact.args:
            removes.append(fact)
            continue
        for pos, arg in enumerate(fact.args):
            if is_proper_list(arg) and target in list_items(arg):
                removes.append(fact)
                remaining = [t for t in list_items(arg) if t != target]
                if remaining:
                    new_args = list(fact.args)
                    new_args[pos] = make_list(remaining)
                    adds.append(Struct(fact.name, tuple(new_args)))
                elif fact.key == "combo_option_group/2":
                    emptied_groups.add(fact.args[0].name)  # type: ignore[union-attr]
                break
    for group in emptied_groups:
        for fact in kb.facts:
            if fact.key in ("combo_contain/2", "group_upgrade_price/3") and fact.args[
                1 if fact.key == "combo_contain/2" else 0
            ] == Atom(group):
                if fact not in removes:
                    removes.append(fact)
    return MutationSet(adds=tuple(adds), removes=tuple(removes))
