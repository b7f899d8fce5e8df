"""Order lines: what the customer has successfully put on the ticket.

A line is one instance of a dish or combo.  Ordering the same food
twice yields two lines with instance indices 1 and 2, because several
operations (``no onions``, ``large``) may be applied at most once per
instance.  Modifier records accumulate in application order; ticket
rendering decides how to display them.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .schema import FREE_OPERATIONS, SIZES, STYLES, UPDATE_OPERATIONS


@dataclass(frozen=True)
class UpdateRecord:
    """One applied update: op/option, on the line's own food or, for a
    combo line, on the chosen member dish."""

    op: str
    option: str
    origin: str | None = None  # the replaced ingredient, for `change`
    member: str | None = None  # combo member dish the update targets

    def __post_init__(self) -> None:
        if self.op not in UPDATE_OPERATIONS:
            raise ValueError(f"unknown update operation {self.op!r}")
        if self.op in STYLES and self.option not in ("yes", "no"):
            raise ValueError(f"style option must be yes/no, got {self.option!r}")
        if self.op == "size" and self.option not in SIZES:
            raise ValueError(f"size option must be regular/large, got {self.option!r}")

    @property
    def free(self) -> bool:
        if self.op in FREE_OPERATIONS:
            return True
        if self.op in STYLES and self.option == "no":
            return True
        if self.op == "size" and self.option == "regular":
            return True
        return False


@dataclass(frozen=True)
class SpecifyRecord:
    """A combo option-group slot resolved to a concrete dish."""

    group: str
    dish: str


ModifierRecord = UpdateRecord | SpecifyRecord


@dataclass(frozen=True)
class OrderLine:
    food: str
    instance: int
    is_combo: bool = False
    modifiers: tuple[ModifierRecord, ...] = ()

    def with_modifier(self, record: ModifierRecord) -> "OrderLine":
        return replace(self, modifiers=self.modifiers + (record,))

    @property
    def combo_slots(self) -> dict[str, str]:
        return {m.group: m.dish for m in self.modifiers if isinstance(m, SpecifyRecord)}

    def updates(self) -> list[UpdateRecord]:
        return [m for m in self.modifiers if isinstance(m, UpdateRecord)]

    def has_update(self, op: str, option: str | None = None, member: str | None = None) -> bool:
        for m in self.updates():
            if m.op == op and (option is None or m.option == option) and m.member == member:
                return True
        return False


@dataclass
class OrderLines:
    """All lines in admission order, with per-food instance numbering."""

    lines: list[OrderLine] = field(default_factory=list)

    def add(self, food: str, is_combo: bool = False) -> OrderLine:
        instance = 1 + sum(1 for line in self.lines if line.food == food)
        line = OrderLine(food, instance, is_combo)
        self.lines.append(line)
        return line

    def replace_line(self, old: OrderLine, new: OrderLine) -> None:
        self.lines[self.lines.index(old)] = new

    def instances_of(self, food: str) -> list[OrderLine]:
        return [line for line in self.lines if line.food == food]

    def __iter__(self):
        return iter(self.lines)

    def __len__(self) -> int:
        return len(self.lines)

    def __bool__(self) -> bool:
        return bool(self.lines)
