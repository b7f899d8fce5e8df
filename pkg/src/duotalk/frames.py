"""Semantic frames: the structured meaning extracted from an utterance.

Each conversation round turns user text into a list of frames, the
agent consumes the frames, and the transcript records them in term
syntax (``order(Soft Taco, 2).``).  Manager and customer vocabularies
are disjoint; both include a few internal frames the parser emits for
flow control (``done`` closes a multi-valued slot, ``decline`` turns
down the currently open question).
"""

from __future__ import annotations

from dataclasses import dataclass

from .schema import SIZES, STYLES, UPDATE_OPERATIONS
from .terms import Atom, Num, Struct, Term, to_text


class FrameError(ValueError):
    """A frame's kind/arguments do not fit the role's vocabulary."""


# Properties a manager may add/edit/delete on a food.
MANAGER_PROPERTIES = (
    "category",
    "price",
    "calories",
    "included_ingredient",
    "popular_topping",
    "available_topping",
    "replaceable_ingredient",
    "combo_contain",
    "veggie",
    "best_seller",
    "cantina_chicken",
    "size_changable_drink",
)

ADDABLE_KINDS = ("dish", "combo", "ingredient")

QUERY_CATEGORIES = (
    "price",
    "calories",
    "ingredient",
    "add-on",
    "replacement",
    "style",
    "combo-content",
    "category",
)

RECOMMEND_TYPES = ("category", "upgrade")

_MANAGER_ARITIES = {
    "runout": (1,),
    "restore": (1,),
    "add": (1, 2, 3),
    "edit": (3, 4),
    "delete": (1, 2, 3),
    "quit": (0,),
    "irrelevant": (0,),
    "done": (0,),
}

_CUSTOMER_ARITIES = {
    "need_recommend": (2,),
    "order": (2,),
    "specify": (2,),
    "update": (3,),
    "query": (2,),
    "completed": (0,),
    "quit": (0,),
    "irrelevant": (0,),
    "decline": (0,),
}


def _term_args(args: tuple) -> tuple[Term, ...]:
    out: list[Term] = []
    for a in args:
        out.append(Num(a) if isinstance(a, int) else Atom(str(a)))
    return tuple(out)


@dataclass(frozen=True)
class ManagerFrame:
    kind: str
    args: tuple = ()

    def __post_init__(self) -> None:
        arities = _MANAGER_ARITIES.get(self.kind)
        if arities is None:
            raise FrameError(f"unknown manager frame kind {self.kind!r}")
        if len(self.args) not in arities:
            raise FrameError(f"{self.kind}/{len(self.args)} is not a manager frame")
        if self.kind == "add" and len(self.args) == 2 and self.args[0] not in ADDABLE_KINDS:
            raise FrameError(f"add type must be one of {ADDABLE_KINDS}, got {self.args[0]!r}")
        if self.kind in ("edit", "delete", "add") and len(self.args) >= 2:
            prop = self.args[1]
            if len(self.args) >= 3 or self.kind == "delete":
                if self.kind == "add" and len(self.args) == 2:
                    pass  # add(type, food) has no property
                elif prop not in MANAGER_PROPERTIES:
                    raise FrameError(f"unknown property {prop!r}")

    def to_term(self) -> Struct:
        return Struct(self.kind, _term_args(self.args))


@dataclass(frozen=True)
class CustomerFrame:
    kind: str
    args: tuple = ()

    def __post_init__(self) -> None:
        arities = _CUSTOMER_ARITIES.get(self.kind)
        if arities is None:
            raise FrameError(f"unknown customer frame kind {self.kind!r}")
        if len(self.args) not in arities:
            raise FrameError(f"{self.kind}/{len(self.args)} is not a customer frame")
        if self.kind == "order":
            count = self.args[1]
            if not isinstance(count, int) or count < 1:
                raise FrameError(f"order quantity must be a positive integer, got {count!r}")
        if self.kind == "update":
            op, option = self.args[1], self.args[2]
            if op not in UPDATE_OPERATIONS:
                raise FrameError(f"unknown update operation {op!r}")
            if op in STYLES and option not in ("yes", "no"):
                raise FrameError(f"{op} option must be yes or no, got {option!r}")
            if op == "size" and option not in SIZES:
                raise FrameError(f"size option must be one of {SIZES}, got {option!r}")
        if self.kind == "need_recommend" and self.args[1] not in RECOMMEND_TYPES:
            raise FrameError(f"recommendation type must be one of {RECOMMEND_TYPES}")
        if self.kind == "query" and self.args[0] not in QUERY_CATEGORIES:
            raise FrameError(f"unknown query category {self.args[0]!r}")

    def to_term(self) -> Struct:
        return Struct(self.kind, _term_args(self.args))


Frame = ManagerFrame | CustomerFrame


def render_frames(frames: list[Frame]) -> str:
    """Transcript form: `order(Soft Taco, 2). completed.`"""
    return " ".join(to_text(f.to_term()) + "." for f in frames)
