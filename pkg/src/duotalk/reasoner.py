"""Query-driven rule engine with stratified negation as failure.

The engine answers goals top-down: starting from the query, it resolves
against rules and facts, tabling every subgoal so recursive programs
(including left recursion over lists or graphs) terminate.  Negation is
interpreted as *negation as failure* restricted to stratified programs:
`not p(t)` succeeds when a fully evaluated sub-query for `p(t)` produces
no answers.  Because every program is checked for stratification up
front, a negated subgoal can always be completed before its caller needs
the result.

Every answer carries a justification tree that records which facts,
rules, built-ins, and failure-closures support it; `render_proof` prints
the tree for inspection and `replay` in the test-suite re-validates each
node independently.

Evaluation strategy, in outline:

* each distinct call variant gets a table of ground answers;
* one evaluation pass resolves a goal depth-first, consuming the answers
  already tabled for subgoals that are currently being evaluated higher
  up the call stack (this breaks cycles);
* passes repeat until no table grows, i.e. the reachable part of the
  perfect model is complete;
* a negated subgoal triggers a nested pass-loop of its own, which is
  safe because stratification guarantees the subgoal's predicate never
  depends on the caller's.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .terms import (
    BUILTIN_PREDS,
    FALSE_HEAD,
    Cons,
    Literal,
    Money,
    Num,
    Rule,
    Struct,
    Subst,
    Term,
    Var,
    is_ground,
    list_items,
    rename_clause,
    substitute,
    to_text,
    unify,
    variables,
    walk,
)

DEFAULT_MAX_DEPTH = 512


class RuleSafetyError(ValueError):
    """A rule uses a variable in a position where it cannot be bound."""


class StratificationError(ValueError):
    """The program has a cycle through negation."""

    def __init__(self, cycle: list[str]):
        super().__init__(
            "program is not stratified; cycle through negation: " + " -> ".join(cycle)
        )
        self.cycle = cycle


class SolveError(RuntimeError):
    """Raised for runtime evaluation faults (depth, unbound built-ins)."""


# ============================================================
# Static checks
# ============================================================


def check_rule_safety(rule: Rule) -> None:
    """Reject rules whose negated/built-in literals or head can be unbound.

    Scanning the body left to right, a positive non-built-in literal
    binds all of its variables.  Negated literals and built-ins must
    only use variables bound earlier, and every head variable must be
    bound somewhere in the body.
    """
    bound: set[str] = set()
    for lit in rule.body:
        lit_vars = variables(lit.pred)
        if lit.negated or lit.pred.key in BUILTIN_PREDS:
            unbound = lit_vars - bound
            if unbound:
                kind = "negated literal" if lit.negated else "built-in"
                raise RuleSafetyError(
                    f"unsafe rule {rule}: variable(s) {sorted(unbound)} in {kind} "
                    f"{to_text(lit.pred)} are not bound by an earlier positive literal"
                )
        else:
            bound |= lit_vars
    head_unbound = variables(rule.head) - bound
    if head_unbound:
        raise RuleSafetyError(
            f"unsafe rule {rule}: head variable(s) {sorted(head_unbound)} "
            "are not bound by any positive body literal"
        )


def check_stratified(rules: list[Rule]) -> dict[str, int]:
    """Assign a stratum to every predicate, or raise StratificationError.

    Propagates `stratum(head) >= stratum(positive dep)` and
    `stratum(head) >= stratum(negated dep) + 1` to a fixpoint; failure
    to converge means a cycle that passes through negation.
    """
    preds: set[str] = set()
    deps: list[tuple[str, str, bool]] = []  # (head, body, negated)
    for rule in rules:
        preds.add(rule.head.key)
        for lit in rule.body:
            if lit.pred.key in BUILTIN_PREDS:
                continue
            preds.add(lit.pred.key)
            deps.append((rule.head.key, lit.pred.key, lit.negated))

    strata = {p: 0 for p in preds}
    for _ in range(len(preds) + 1):
        changed = False
        for head, dep, negated in deps:
            need = strata[dep] + (1 if negated else 0)
            if strata[head] < need:
                strata[head] = need
                changed = True
        if not changed:
            return strata
    raise StratificationError(_negative_cycle(deps))


def _negative_cycle(deps: list[tuple[str, str, bool]]) -> list[str]:
    """Find one cycle that includes a negated edge, for error reporting."""
    graph: dict[str, list[tuple[str, bool]]] = {}
    for head, dep, negated in deps:
        graph.setdefault(head, []).append((dep, negated))

    for start in graph:
        stack: list[tuple[str, list[str], bool]] = [(start, [start], False)]
        seen_states: set[tuple[str, bool]] = set()
        while stack:
            node, path, saw_neg = stack.pop()
            for nxt, negated in graph.get(node, []):
                neg2 = saw_neg or negated
                if nxt == start and neg2:
                    return path + [start]
                if (nxt, neg2) not in seen_states and len(path) <= len(graph):
                    seen_states.add((nxt, neg2))
                    stack.append((nxt, path + [nxt], neg2))
    return ["<unknown>"]


# ============================================================
# Program
# ============================================================


class Program:
    """An immutable bundle of rules plus ground facts, ready to query."""

    def __init__(self, rules: list[Rule], facts: list[Struct]):
        for rule in rules:
            if rule.head.key in BUILTIN_PREDS:
                raise RuleSafetyError(f"rule head {rule.head.key} is a built-in")
            check_rule_safety(rule)
        self.rules = list(rules)
        self.strata = check_stratified(rules)
        self.rule_index: dict[str, list[Rule]] = {}
        for rule in rules:
            self.rule_index.setdefault(rule.head.key, []).append(rule)
        self.fact_index: dict[str, list[Struct]] = {}
        for fact in facts:
            if not is_ground(fact):
                raise ValueError(f"fact {to_text(fact)} contains variables")
            self.fact_index.setdefault(fact.key, []).append(fact)

    def extended(self, extra_facts: list[Struct]) -> "Program":
        """A copy of this program with additional facts overlaid."""
        merged = [f for fs in self.fact_index.values() for f in fs] + list(extra_facts)
        return Program(self.rules, merged)

    def constraint_rules(self) -> list[Rule]:
        return self.rule_index.get(f"{FALSE_HEAD}/0", [])


# ============================================================
# Justifications
# ============================================================


@dataclass(frozen=True)
class Justification:
    """One node of a proof tree.

    kind is `fact`, `rule`, `builtin`, or `naf` (a negation-as-failure
    closure: the goal was fully evaluated and produced no answers).
    """

    kind: str
    goal: Struct
    rule: Rule | None = None
    children: tuple["Justification", ...] = ()


@dataclass(frozen=True)
class Answer:
    """One solution: the ground goal instance, bindings, and its proof."""

    instance: Struct
    bindings: dict[str, Term]
    justification: Justification


def render_proof(just: Justification, indent: int = 0) -> str:
    """Pretty-print a justification tree as indented ASCII."""
    pad = "  " * indent
    if just.kind == "fact":
        line = f"{pad}{to_text(just.goal)}   [fact]"
    elif just.kind == "builtin":
        line = f"{pad}{to_text(just.goal)}   [built-in]"
    elif just.kind == "naf":
        line = f"{pad}not {to_text(just.goal)}   [no proof exists]"
    else:
        line = f"{pad}{to_text(just.goal)}   [rule: {just.rule}]"
    parts = [line]
    for child in just.children:
        parts.append(render_proof(child, indent + 1))
    return "\n".join(parts)


# ============================================================
# Evaluation
# ============================================================


class _Table:
    __slots__ = ("answers", "seen")

    def __init__(self) -> None:
        self.answers: list[tuple[Struct, Justification]] = []
        self.seen: set[Struct] = set()

    def add(self, instance: Struct, just: Justification) -> bool:
        if instance in self.seen:
            return False
        self.seen.add(instance)
        self.answers.append((instance, just))
        return True


def _variant_key(goal: Struct) -> tuple:
    """Canonical key for a call pattern: variables numbered left to right."""
    mapping: dict[str, int] = {}

    def canon(t: Term) -> object:
        t = t if not isinstance(t, Var) else t
        if isinstance(t, Var):
            if t.name not in mapping:
                mapping[t.name] = len(mapping)
            return ("v", mapping[t.name])
        if isinstance(t, Struct):
            return ("s", t.name, tuple(canon(a) for a in t.args))
        if isinstance(t, Cons):
            return ("c", canon(t.head), canon(t.tail))
        if isinstance(t, Num):
            return ("n", t.value)
        if isinstance(t, Money):
            return ("n", t.cents)
        return ("a", t.name)  # type: ignore[union-attr]

    return canon(goal)  # type: ignore[return-value]


class _Engine:
    def __init__(self, program: Program, max_depth: int):
        self.program = program
        self.max_depth = max_depth
        self.tables: dict[tuple, _Table] = {}
        self.answer_count = 0
        self.active: set[tuple] = set()
        self.pass_done: set[tuple] = set()
        self.rename_counter = itertools.count()

    # ---- public -------------------------------------------------

    def solve_complete(self, goal: Struct, depth: int = 0) -> _Table:
        """Evaluate a goal to fixpoint: repeat passes until no table grows."""
        while True:
            before = self.answer_count
            saved_done, saved_active = self.pass_done, self.active
            self.pass_done, self.active = set(), set()
            try:
                table = self._eval(goal, depth)
            finally:
                self.pass_done, self.active = saved_done, saved_active
            if self.answer_count == before:
                return table

    # ---- core ---------------------------------------------------

    def _eval(self, goal: Struct, depth: int) -> _Table:
        if depth > self.max_depth:
            raise SolveError(
                f"exceeded maximum derivation depth {self.max_depth} "
                f"while evaluating {to_text(goal)}"
            )
        key = _variant_key(goal)
        table = self.tables.get(key)
        if table is None:
            table = self.tables[key] = _Table()
        if key in self.active or key in self.pass_done:
            return table
        self.active.add(key)
        try:
            for fact in self.program.fact_index.get(goal.key, []):
                if unify(goal, fact) is not None:
                    if table.add(fact, Justification("fact", fact)):
                        self.answer_count += 1
            for rule in self.program.rule_index.get(goal.key, []):
                fresh = rename_clause(rule, str(next(self.rename_counter)))
                subst = unify(goal, fresh.head)
                if subst is None:
                    continue
                for out, children in self._body(fresh.body, 0, subst, depth):
                    instance = substitute(fresh.head, out)
                    assert isinstance(instance, Struct)
                    just = Justification("rule", instance, rule, tuple(children))
                    if table.add(instance, just):
                        self.answer_count += 1
        finally:
            self.active.discard(key)
        self.pass_done.add(key)
        return table

    def _body(
        self, body: tuple[Literal, ...], i: int, subst: Subst, depth: int
    ):
        """Yield (substitution, justification list) for body[i:] solutions."""
        if i == len(body):
            yield subst, []
            return
        lit = body[i]
        goal = substitute(lit.pred, subst)
        assert isinstance(goal, Struct)
        if goal.key in BUILTIN_PREDS:
            ok, just = self._builtin(goal)
            if ok:
                for out, children in self._body(body, i + 1, subst, depth):
                    yield out, [just] + children
            return
        if lit.negated:
            if not is_ground(goal):
                raise SolveError(f"negated goal {to_text(goal)} is not ground")
            sub_table = self.solve_complete(goal, depth + 1)
            if not sub_table.answers:
                just = Justification("naf", goal)
                for out, children in self._body(body, i + 1, subst, depth):
                    yield out, [just] + children
            return
        sub_table = self._eval(goal, depth + 1)
        # Snapshot: answers added later in this pass are picked up by the
        # next pass of the enclosing fixpoint loop.
        for instance, just in list(sub_table.answers):
            extended = unify(goal, instance, subst)
            if extended is not None:
                for out, children in self._body(body, i + 1, extended, depth):
                    yield out, [just] + children

    # ---- built-ins ----------------------------------------------

    def _builtin(self, goal: Struct) -> tuple[bool, Justification]:
        if not is_ground(goal):
            raise SolveError(f"built-in {to_text(goal)} has unbound arguments")
        left, right = goal.args
        name = goal.name
        if name == "=":
            ok = left == right
        elif name == "\\=":
            ok = left != right
        elif name == "member":
            try:
                ok = left in list_items(right)
            except ValueError as exc:
                raise SolveError(f"member/2: {exc}") from exc
        else:
            lv = _numeric(left, goal)
            rv = _numeric(right, goal)
            ok = {
                "<": lv < rv,
                "=<": lv <= rv,
                ">": lv > rv,
                ">=": lv >= rv,
            }[name]
        return ok, Justification("builtin", goal)


def _numeric(term: Term, goal: Struct) -> int:
    if isinstance(term, Num):
        return term.value
    if isinstance(term, Money):
        return term.cents
    raise SolveError(f"built-in {to_text(goal)} applied to non-number {to_text(term)}")


# ============================================================
# Public API
# ============================================================


def solve(
    program: Program, goal: Struct, max_depth: int = DEFAULT_MAX_DEPTH
) -> list[Answer]:
    """All answers for a goal, each with bindings and a justification tree.

    Answer order is deterministic: derivations are explored in rule
    order, then fact load order, and repeated passes only append newly
    discovered answers.
    """
    engine = _Engine(program, max_depth)
    table = engine.solve_complete(goal)
    goal_vars = variables(goal)
    answers: list[Answer] = []
    for instance, just in table.answers:
        subst = unify(goal, instance)
        if subst is None:
            continue
        bindings = {name: substitute(Var(name), subst) for name in sorted(goal_vars)}
        answers.append(Answer(instance, bindings, just))
    return answers


def holds(
    program: Program, goal: Struct, max_depth: int = DEFAULT_MAX_DEPTH
) -> tuple[bool, Justification]:
    """Decide a ground goal; on failure the justification is the NAF closure."""
    if not is_ground(goal):
        raise ValueError(f"holds() requires a ground goal, got {to_text(goal)}")
    answers = solve(program, goal, max_depth)
    if answers:
        return True, answers[0].justification
    return False, Justification("naf", goal)


def violated_constraints(
    program: Program, max_depth: int = DEFAULT_MAX_DEPTH
) -> list[Justification]:
    """Evaluate integrity constraints (`false :- body.`); return violations."""
    if f"{FALSE_HEAD}/0" not in program.rule_index:
        return []
    engine = _Engine(program, max_depth)
    table = engine.solve_complete(Struct(FALSE_HEAD, ()))
    return [just for _, just in table.answers]
