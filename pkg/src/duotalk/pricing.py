"""Exact integer-cent pricing and calorie totals for order lines.

Each paid modifier maps to one menu fact; a modifier whose fact is
missing raises :class:`PricingError` naming that fact.  Removals and
declined styles are free.  All arithmetic is on integer cents; only
display formatting (see :func:`duotalk.terms.format_cents`) produces a
decimal string.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .kb import MenuKB
from .orders import OrderLine, OrderLines, SpecifyRecord, UpdateRecord
from .schema import STYLES
from .terms import format_cents


class PricingError(Exception):
    """A modifier was applied but its price/calorie fact is absent."""


@dataclass
class PriceBreakdown:
    base: int
    adjustments: list[tuple[str, int]] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.base + sum(cents for _, cents in self.adjustments)


def _fact_value(kb: MenuKB, predicate: str, args: list[object | None]) -> int:
    fact = kb.first(predicate, args + [None])
    if fact is None:
        shown = ", ".join("_" if a is None else repr(a) for a in args + [None])
        raise PricingError(f"missing fact {predicate}({shown})")
    return fact.args[-1].value  # type: ignore[union-attr]


def _upgrade_size_price(kb: MenuKB) -> int:
    fact = kb.first("upgrade_size_price", [None])
    if fact is None:
        raise PricingError("missing fact upgrade_size_price(_)")
    return fact.args[0].value  # type: ignore[union-attr]


def _update_charge(kb: MenuKB, dish: str, record: UpdateRecord) -> tuple[str, int] | None:
    """The (source fact label, cents) pair one update contributes."""
    if record.free:
        return None
    if record.op == "add":
        cents = _fact_value(kb, "upgrade_price", [dish, record.option])
        return (f"upgrade_price({dish!r}, {record.option!r})", cents)
    if record.op == "extra":
        cents = _fact_value(kb, "extra_price", [record.option])
        return (f"extra_price({record.option!r})", cents)
    if record.op == "change":
        cents = _fact_value(kb, "replacement_price", [dish, record.origin, record.option])
        return (
            f"replacement_price({dish!r}, {record.origin!r}, {record.option!r})",
            cents,
        )
    if record.op in STYLES:  # option == "yes" (no is free)
        cents = _fact_value(kb, "special_style_price", [dish, record.op])
        return (f"special_style_price({dish!r}, {record.op!r})", cents)
    if record.op == "size":  # option == "large" (regular is free)
        return ("upgrade_size_price", _upgrade_size_price(kb))
    raise PricingError(f"unpriceable operation {record.op!r}")


def price_line(kb: MenuKB, line: OrderLine) -> PriceBreakdown:
    """Base price plus one adjustment per paid modifier."""
    base = kb.price(line.food)
    if base is None:
        raise PricingError(f"missing fact original_price({line.food!r}, _)")
    breakdown = PriceBreakdown(base)
    for record in line.modifiers:
        if isinstance(record, SpecifyRecord):
            fact = kb.first("group_upgrade_price", [record.group, record.dish, None])
            if fact is not None:
                cents = fact.args[2].value  # type: ignore[union-attr]
                breakdown.adjustments.append(
                    (f"group_upgrade_price({record.group!r}, {record.dish!r})", cents)
                )
            continue
        target = record.member if record.member is not None else line.food
        charge = _update_charge(kb, target, record)
        if charge is not None:
            breakdown.adjustments.append(charge)
    return breakdown


def price_order(kb: MenuKB, order: OrderLines) -> int:
    """Sum of line totals, in cents."""
    return sum(price_line(kb, line).total for line in order)


def calories_line(kb: MenuKB, line: OrderLine) -> int:
    """Calorie total: base plus additions; removals and styles count 0."""
    base = kb.calories(line.food)
    if base is None:
        raise PricingError(f"missing fact original_cal({line.food!r}, _)")
    total = base
    for record in line.modifiers:
        if isinstance(record, SpecifyRecord):
            continue
        if record.op == "add":
            target = record.member if record.member is not None else line.food
            total += _fact_value(kb, "upgrade_cal", [target, record.option])
        elif record.op == "extra":
            total += _fact_value(kb, "extra_cal", [record.option])
    return total


def display_price(cents: int) -> str:
    return format_cents(cents)


def parse_price(value: object) -> int:
    """Dollar text to integer cents; integers pass through as cents.

    Accepts "2.99", "$3.8", "4" (whole dollars).  Raises ValueError on
    anything else.
    """
    if isinstance(value, int):
        return value
    text = str(value).strip().lstrip("$").strip()
    if re.fullmatch(r"\d+", text):
        return int(text) * 100
    match = re.fullmatch(r"(\d+)\.(\d{1,2})", text)
    if match:
        dollars, frac = match.group(1), match.group(2)
        return int(dollars) * 100 + int(frac.ljust(2, "0"))
    raise ValueError(f"not a price: {value!r}")
