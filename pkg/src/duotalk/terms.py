"""Logic terms, facts, and rules: parsing, unification, and rendering.

This module is the shared vocabulary for everything symbolic in the
package: knowledge-base facts, rules for the inference engine, semantic
frames, and the predicate bundles the agents hand to the text generator.

Concrete syntax accepted by the parser:

    % a comment runs to end of line
    dish('Soft Taco').
    original_price('Soft Taco', 179).
    combo_option_group(drink, ['Pepsi', 'Mountain Dew']).
    unavailable(Dish) :- dish(Dish), included_ingredient(Dish, I), runout(I).
    all_unavailable([First|Rest]) :- unavailable(First), all_unavailable(Rest).
    false :- new_runout(X), new_restore(X).

Atoms starting with a lowercase letter may be written bare; anything else
is single-quoted.  Identifiers starting with an uppercase letter or
underscore are variables.  Numbers are integers (money is carried as
integer cents).  `not` marks negation as failure; `=`, `\\=`, `<`, `=<`,
`>`, `>=`, and `member/2` are built-in test literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


# ============================================================
# Term types
# ============================================================


class Term:
    """Base class for every logic term."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Atom(Term):
    """A symbolic constant, e.g. `taco` or `'Soft Taco'`."""

    name: str


@dataclass(frozen=True, slots=True)
class Num(Term):
    """An integer constant.  Money is carried as integer cents."""

    value: int


@dataclass(frozen=True, slots=True)
class Money(Term):
    """An integer amount of cents that renders as dollars, e.g. 757 -> 7.57.

    Used only inside response predicates for display; knowledge-base
    facts store plain integers.
    """

    cents: int


@dataclass(frozen=True, slots=True)
class Var(Term):
    """A logic variable, e.g. `Dish` or `X`."""

    name: str


@dataclass(frozen=True, slots=True)
class Struct(Term):
    """A compound term `name(arg1, ..., argN)`; also used for facts and goals.

    A zero-argument struct (`args == ()`) models a propositional atom in
    head/goal position, e.g. `quit`.
    """

    name: str
    args: tuple[Term, ...] = ()

    @property
    def key(self) -> str:
        """Predicate indexing key, e.g. `'runout/1'`."""
        return f"{self.name}/{len(self.args)}"


@dataclass(frozen=True, slots=True)
class Cons(Term):
    """One cell of a logic list; a proper list ends in `NIL`."""

    head: Term
    tail: Term


NIL = Atom("[]")

BUILTIN_PREDS = {"=/2", "\\=/2", "</2", "=</2", ">/2", ">=/2", "member/2"}
FALSE_HEAD = "false"  # reserved head for integrity constraints


@dataclass(frozen=True, slots=True)
class Literal:
    """One body element of a rule: a goal, possibly negated."""

    pred: Struct
    negated: bool = False


@dataclass(frozen=True, slots=True)
class Rule:
    """`head :- body.`  A fact is represented as a bare ground Struct instead."""

    head: Struct
    body: tuple[Literal, ...]

    def __str__(self) -> str:
        return to_source_clause(self)


class TermSyntaxError(ValueError):
    """Raised when a fact/rule file or goal string cannot be parsed."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


# ============================================================
# List helpers
# ============================================================


def make_list(items: list[Term] | tuple[Term, ...], tail: Term = NIL) -> Term:
    """Build a logic list term from Python items."""
    out = tail
    for item in reversed(items):
        out = Cons(item, out)
    return out


def list_items(term: Term) -> list[Term]:
    """Return the elements of a proper logic list; raises on anything else."""
    items: list[Term] = []
    while isinstance(term, Cons):
        items.append(term.head)
        term = term.tail
    if term != NIL:
        raise ValueError(f"not a proper list: ends in {to_text(term)}")
    return items


def is_proper_list(term: Term) -> bool:
    while isinstance(term, Cons):
        term = term.tail
    return term == NIL


# ============================================================
# Substitutions and unification
# ============================================================

Subst = dict[str, Term]


def walk(term: Term, subst: Subst) -> Term:
    """Resolve a variable through the substitution chain."""
    while isinstance(term, Var):
        bound = subst.get(term.name)
        if bound is None:
            return term
        term = bound
    return term


def substitute(term: Term, subst: Subst) -> Term:
    """Apply a substitution through a whole term."""
    term = walk(term, subst)
    if isinstance(term, Struct):
        return Struct(term.name, tuple(substitute(a, subst) for a in term.args))
    if isinstance(term, Cons):
        return Cons(substitute(term.head, subst), substitute(term.tail, subst))
    return term


def unify(a: Term, b: Term, subst: Subst | None = None) -> Subst | None:
    """Unify two terms, returning an extended substitution or None."""
    if subst is None:
        subst = {}
    stack = [(a, b)]
    subst = dict(subst)
    while stack:
        x, y = stack.pop()
        x = walk(x, subst)
        y = walk(y, subst)
        if x == y:
            continue
        if isinstance(x, Var):
            subst[x.name] = y
        elif isinstance(y, Var):
            subst[y.name] = x
        elif isinstance(x, Struct) and isinstance(y, Struct):
            if x.name != y.name or len(x.args) != len(y.args):
                return None
            stack.extend(zip(x.args, y.args))
        elif isinstance(x, Cons) and isinstance(y, Cons):
            stack.append((x.head, y.head))
            stack.append((x.tail, y.tail))
        else:
            return None
    return subst


def variables(term: Term) -> set[str]:
    """All variable names occurring in a term."""
    out: set[str] = set()
    stack = [term]
    while stack:
        t = stack.pop()
        if isinstance(t, Var):
            out.add(t.name)
        elif isinstance(t, Struct):
            stack.extend(t.args)
        elif isinstance(t, Cons):
            stack.append(t.head)
            stack.append(t.tail)
    return out


def is_ground(term: Term) -> bool:
    return not variables(term)


def rename_clause(rule: Rule, suffix: str) -> Rule:
    """Freshen all variables in a rule with a unique suffix."""
    mapping = {name: Var(f"{name}#{suffix}") for name in _rule_vars(rule)}

    def ren(t: Term) -> Term:
        if isinstance(t, Var):
            return mapping[t.name]
        if isinstance(t, Struct):
            return Struct(t.name, tuple(ren(a) for a in t.args))
        if isinstance(t, Cons):
            return Cons(ren(t.head), ren(t.tail))
        return t

    head = ren(rule.head)
    assert isinstance(head, Struct)
    body = tuple(Literal(ren(l.pred), l.negated) for l in rule.body)  # type: ignore[arg-type]
    return Rule(head, body)


def _rule_vars(rule: Rule) -> set[str]:
    out = variables(rule.head)
    for lit in rule.body:
        out |= variables(lit.pred)
    return out


# ============================================================
# Rendering
# ============================================================

_BARE_ATOM = re.compile(r"[a-z][A-Za-z0-9_]*$")


def format_cents(cents: int) -> str:
    """Render integer cents as a dollar string: 757 -> '7.57'."""
    sign = "-" if cents < 0 else ""
    cents = abs(cents)
    return f"{sign}{cents // 100}.{cents % 100:02d}"


def to_text(term: Term) -> str:
    """Conversation-facing rendering: atoms print bare, money as dollars."""
    return _render(term, quote=False)


def to_source(term: Term) -> str:
    """File-facing rendering: atoms are quoted whenever needed to reparse."""
    return _render(term, quote=True)


def _render(term: Term, quote: bool) -> str:
    if isinstance(term, Atom):
        if term == NIL:
            return "[]"
        if quote and not _BARE_ATOM.match(term.name):
            escaped = term.name.replace("'", "''")
            return f"'{escaped}'"
        return term.name
    if isinstance(term, Num):
        return str(term.value)
    if isinstance(term, Money):
        return format_cents(term.cents)
    if isinstance(term, Var):
        return term.name.split("#")[0]
    if isinstance(term, Struct):
        if not term.args:
            return term.name
        args = ", ".join(_render(a, quote) for a in term.args)
        return f"{term.name}({args})"
    if isinstance(term, Cons):
        items = []
        t: Term = term
        while isinstance(t, Cons):
            items.append(_render(t.head, quote))
            t = t.tail
        if t == NIL:
            return "[" + ", ".join(items) + "]"
        return "[" + ", ".join(items) + "|" + _render(t, quote) + "]"
    raise TypeError(f"cannot render {term!r}")


def to_source_fact(fact: Struct) -> str:
    """One fact as a reparseable line, e.g. `original_price('Soft Taco', 179).`"""
    return to_source(fact) + "."


def to_source_clause(rule: Rule) -> str:
    body = ", ".join(
        ("not " if lit.negated else "") + _render_literal(lit.pred) for lit in rule.body
    )
    return f"{to_source(rule.head)} :- {body}."


def _render_literal(pred: Struct) -> str:
    if pred.key in BUILTIN_PREDS and pred.name != "member":
        return f"{to_source(pred.args[0])} {pred.name} {to_source(pred.args[1])}"
    return to_source(pred)


# ============================================================
# Tokenizer
# ============================================================

_TOKEN_RE = re.compile(
    r"""
      (?P<ws>\s+)
    | (?P<comment>%[^\n]*)
    | (?P<num>-?\d+)
    | (?P<qatom>'(?:[^']|'')*')
    | (?P<name>[a-z][A-Za-z0-9_]*)
    | (?P<var>[A-Z_][A-Za-z0-9_]*)
    | (?P<punct>:-|\\=|=<|>=|[=<>()\[\],|.])
    """,
    re.VERBOSE,
)


@dataclass(slots=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if not match:
            raise TermSyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = match.lastgroup or ""
        value = match.group()
        if kind not in ("ws", "comment"):
            tokens.append(_Token(kind, value, line, pos - line_start + 1))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            line_start = pos + value.rindex("\n") + 1
        pos = match.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


# ============================================================
# Parser
# ============================================================


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.anon_counter = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value: str) -> _Token:
        tok = self.next()
        if tok.value != value:
            raise TermSyntaxError(
                f"expected {value!r}, found {tok.value!r}", tok.line, tok.column
            )
        return tok

    def fail(self, message: str) -> TermSyntaxError:
        tok = self.peek()
        return TermSyntaxError(message, tok.line, tok.column)

    # ---- clauses -------------------------------------------------

    def program(self) -> tuple[list[Struct], list[Rule]]:
        facts: list[Struct] = []
        rules: list[Rule] = []
        while self.peek().kind != "eof":
            head = self.callable_term()
            if self.peek().value == ":-":
                self.next()
                body = self.body()
                self.expect(".")
                rules.append(Rule(head, tuple(body)))
            else:
                self.expect(".")
                if not is_ground(head):
                    raise self.fail(f"fact {to_source(head)} contains variables")
                facts.append(head)
        return facts, rules

    def body(self) -> list[Literal]:
        literals = [self.literal()]
        while self.peek().value == ",":
            self.next()
            literals.append(self.literal())
        return literals

    def literal(self) -> Literal:
        negated = False
        tok = self.peek()
        if tok.kind == "name" and tok.value == "not":
            self.next()
            negated = True
        pred = self.callable_or_comparison()
        return Literal(pred, negated)

    def callable_or_comparison(self) -> Struct:
        # A body element is either `name(args)` / bare `name`, or an infix
        # comparison `term OP term`.
        start = self.pos
        tok = self.peek()
        if tok.kind == "name" and self.tokens[self.pos + 1].value not in (
            "=", "\\=", "<", "=<", ">", ">=",
        ):
            return self.callable_term()
        if tok.kind == "name" and self.tokens[self.pos + 1].value == "(":
            return self.callable_term()
        left = self.term()
        op = self.peek()
        if op.value in ("=", "\\=", "<", "=<", ">", ">="):
            self.next()
            right = self.term()
            return Struct(op.value, (left, right))
        self.pos = start
        return self.callable_term()

    def callable_term(self) -> Struct:
        tok = self.next()
        if tok.kind == "qatom":
            name = _unquote(tok.value)
        elif tok.kind == "name":
            name = tok.value
        else:
            raise TermSyntaxError(
                f"expected a predicate name, found {tok.value!r}", tok.line, tok.column
            )
        if self.peek().value == "(":
            self.next()
            args = [self.term()]
            while self.peek().value == ",":
                self.next()
                args.append(self.term())
            self.expect(")")
            return Struct(name, tuple(args))
        return Struct(name, ())

    # ---- terms ---------------------------------------------------

    def term(self) -> Term:
        tok = self.peek()
        if tok.kind == "num":
            self.next()
            return Num(int(tok.value))
        if tok.kind == "qatom":
            self.next()
            return Atom(_unquote(tok.value))
        if tok.kind == "var":
            self.next()
            if tok.value == "_":
                self.anon_counter += 1
                return Var(f"_G{self.anon_counter}")
            return Var(tok.value)
        if tok.value == "[":
            return self.list_term()
        if tok.kind == "name":
            self.next()
            if self.peek().value == "(":
                self.next()
                args = [self.term()]
                while self.peek().value == ",":
                    self.next()
                    args.append(self.term())
                self.expect(")")
                return Struct(tok.value, tuple(args))
            return Atom(tok.value)
        raise TermSyntaxError(f"expected a term, found {tok.value!r}", tok.line, tok.column)

    def list_term(self) -> Term:
        self.expect("[")
        if self.peek().value == "]":
            self.next()
            return NIL
        items = [self.term()]
        while self.peek().value == ",":
            self.next()
            items.append(self.term())
        tail: Term = NIL
        if self.peek().value == "|":
            self.next()
            tail = self.term()
        self.expect("]")
        return make_list(items, tail)


def _unquote(source: str) -> str:
    return source[1:-1].replace("''", "'")


def parse_program(text: str) -> tuple[list[Struct], list[Rule]]:
    """Parse a fact/rule file into (ground facts, rules)."""
    return _Parser(text).program()


def parse_goal(text: str) -> Struct:
    """Parse a single goal such as `unavailable(X)` or `quit`."""
    parser = _Parser(text.strip().rstrip("."))
    goal = parser.callable_term()
    tok = parser.peek()
    if tok.kind != "eof":
        raise TermSyntaxError(f"trailing input {tok.value!r}", tok.line, tok.column)
    return goal


def parse_fact(text: str) -> Struct:
    """Parse a single ground fact such as `runout('Tomatoes')`."""
    goal = parse_goal(text)
    if not is_ground(goal):
        raise ValueError(f"fact {text!r} contains variables")
    return goal


# Convenience constructors used throughout the package and tests.


def atom(name: str) -> Atom:
    return Atom(name)


def num(value: int) -> Num:
    return Num(value)


def struct(name: str, *args: Term) -> Struct:
    return Struct(name, tuple(args))
