"""Shortage state shared by the manager and customer-service agents.

The manager reports ingredient shortages and restocks during its
conversations; the service agent reads them when deciding what can be
sold.  Both sides observe immutable ``(MenuKB, ShortageState)`` snapshot
pairs handed out by a :class:`SharedStore`, which serializes every
change behind one lock:

* shortage reconciliation happens once per conversation round and takes
  effect from the next round on,
* menu mutations are queued and commit only when no conversation is
  active, together with any shortage change they were paired with.

Reconciliation and availability are not ad-hoc set code: both are
evaluated by the rule engine over the rule files shipped in
``data/update_rules.lp`` and ``data/shared_rules.lp``.
"""

from __future__ import annotations

import datetime as _dt
import functools
import logging
import pathlib
import threading
from dataclasses import dataclass
from importlib import resources

from .kb import KBValidationError, MenuKB, MutationError, MutationSet, apply_mutations
from .reasoner import Justification, Program, Rule, holds, solve, violated_constraints
from .terms import Struct, atom, is_ground, parse_goal, parse_program, struct, to_source_fact, to_text

log = logging.getLogger(__name__)

# Base predicates that may appear staged with a `new_` prefix.
STAGEABLE = {
    "runout": 1,
    "restore": 1,
    "order": 2,
    "update": 3,
    "specify": 2,
}


class StateError(Exception):
    """Base class for shared-state failures."""


class UnknownName(StateError):
    """A staged or queried name is not declared in the menu."""


class InconsistentDelta(StateError):
    """A delta contradicts itself (e.g. runout and restore of one name)."""


class DeltaError(StateError):
    """A staged fact does not fit the `new_<base>` contract."""


# ------------------------------------------------------------
# Rule files
# ------------------------------------------------------------


def _data_text(name: str) -> str:
    return (resources.files("duotalk") / "data" / name).read_text(encoding="utf-8")


@functools.lru_cache(maxsize=None)
def _load_rule_file(name: str) -> tuple[tuple[Struct, ...], tuple[Rule, ...]]:
    facts, rules = parse_program(_data_text(name))
    return tuple(facts), tuple(rules)


def availability_rules() -> tuple[tuple[Struct, ...], tuple[Rule, ...]]:
    """Facts and rules defining `unavailable/1` (shared by both agents)."""
    return _load_rule_file("shared_rules.lp")


def reconciliation_rules() -> tuple[tuple[Struct, ...], tuple[Rule, ...]]:
    """Rules computing `updated_runout/1` from staged changes."""
    return _load_rule_file("update_rules.lp")


# ------------------------------------------------------------
# State and deltas
# ------------------------------------------------------------


@dataclass(frozen=True)
class ShortageState:
    """The set of ingredient/sauce names currently out of stock."""

    runout: tuple[str, ...] = ()
    version: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "runout", tuple(sorted(set(self.runout))))

    def facts(self) -> list[Struct]:
        return [struct("runout", atom(name)) for name in self.runout]

    def __contains__(self, name: str) -> bool:
        return name in self.runout


@dataclass(frozen=True)
class StateDelta:
    """Ground `new_*` facts staged by one session's active round."""

    staged: tuple[Struct, ...] = ()
    origin: str = ""

    def __post_init__(self) -> None:
        for fact in self.staged:
            if not isinstance(fact, Struct) or not is_ground(fact):
                raise DeltaError(f"staged fact must be ground: {fact!r}")
            if not fact.name.startswith("new_"):
                raise DeltaError(f"staged fact lacks the new_ prefix: {to_text(fact)}")
            base = fact.name[len("new_") :]
            if STAGEABLE.get(base) != len(fact.args):
                raise DeltaError(f"no stageable base predicate for {to_text(fact)}")

    @classmethod
    def shortage(
        cls,
        origin: str,
        runout: tuple[str, ...] | list[str] = (),
        restore: tuple[str, ...] | list[str] = (),
    ) -> "StateDelta":
        staged = [struct("new_runout", atom(n)) for n in runout]
        staged += [struct("new_restore", atom(n)) for n in restore]
        return cls(tuple(staged), origin)

    def shortage_names(self) -> list[str]:
        return [
            fact.args[0].name  # type: ignore[union-attr]
            for fact in self.staged
            if fact.name in ("new_runout", "new_restore")
        ]


def _require_known(kb: MenuKB, name: str) -> None:
    kind = kb.food_kind(name)
    if kind is None:
        raise UnknownName(f"{name!r} is not on the menu")
    if kind not in ("ingredient", "sauce"):
        raise UnknownName(f"{name!r} is a {kind}; shortages track ingredients and sauces")


# ------------------------------------------------------------
# Core operations
# ------------------------------------------------------------


def consistency_check(kb: MenuKB, state: ShortageState, delta: StateDelta) -> list[str]:
    """Validate a round's staged changes against the menu and each other.

    Returns a list of human-readable problems (empty when consistent).
    Contradictions are detected by evaluating the integrity constraints
    of the reconciliation rule file, not by hand-rolled set logic.
    """
    problems: list[str] = []
    for name in state.runout:
        if kb.food_kind(name) not in ("ingredient", "sauce"):
            problems.append(f"state names {name!r} which the menu does not declare")
    for name in delta.shortage_names():
        try:
            _require_known(kb, name)
        except UnknownName as exc:
            problems.append(str(exc))
    facts, rules = reconciliation_rules()
    program = Program(list(rules), list(facts) + state.facts() + list(delta.staged))
    for violation in violated_constraints(program):
        problems.append(f"contradictory staging: {to_text(violation.goal)}")
    return problems


def reconcile(kb: MenuKB, state: ShortageState, delta: StateDelta) -> ShortageState:
    """Fold one round's staged shortage changes into the next state.

    The next runout set is whatever `updated_runout/1` derives: current
    names not being restored, plus newly reported ones.  The version
    advances even for an empty delta.
    """
    for name in delta.shortage_names():
        _require_known(kb, name)
    facts, rules = reconciliation_rules()
    program = Program(list(rules), list(facts) + state.facts() + list(delta.staged))
    if violated_constraints(program):
        raise InconsistentDelta(
            "delta both runs out and restores a name: " + ", ".join(delta.shortage_names())
        )
    answers = solve(program, parse_goal("updated_runout(X)."))
    names = tuple(answer.bindings["X"].name for answer in answers)  # type: ignore[union-attr]
    return ShortageState(names, state.version + 1)


def _first_runout(just: Justification) -> str | None:
    if just.kind == "fact" and just.goal.name == "runout":
        return just.goal.args[0].name  # type: ignore[union-attr]
    for child in just.children:
        found = _first_runout(child)
        if found is not None:
            return found
    return None


def _reason(just: Justification, food: str) -> Struct:
    cause = _first_runout(just)
    if cause is None or cause == food:
        return struct("runout", atom("none"))
    return struct("runout", atom(cause))


def availability_program(kb: MenuKB, state: ShortageState) -> Program:
    """The menu, the shared availability rules, and the current shortages."""
    facts, rules = availability_rules()
    return Program(list(rules), list(kb.facts) + list(facts) + state.facts())


def unavailability(
    kb: MenuKB, state: ShortageState, food: str = "all"
) -> list[tuple[str, Struct]]:
    """Every unavailable food with its `runout(...)` reason.

    With a food name, the result is that single entry or empty; with
    `all`, every transitively unavailable food.  Reasons carry the
    missing ingredient, or `none` when the food itself ran out.
    """
    program = availability_program(kb, state)
    if food == "all":
        out = []
        for answer in solve(program, parse_goal("unavailable(X).")):
            name = answer.bindings["X"].name  # type: ignore[union-attr]
            out.append((name, _reason(answer.justification, name)))
        return out
    if kb.food_kind(food) is None:
        raise UnknownName(f"{food!r} is not on the menu")
    ok, just = holds(program, struct("unavailable", atom(food)))
    if not ok:
        return []
    return [(food, _reason(just, food))]


# ------------------------------------------------------------
# The store
# ------------------------------------------------------------


@dataclass
class CommitTicket:
    """Tracks one queued menu+shortage change until it lands."""

    mutations: MutationSet
    shortage: StateDelta
    status: str = "pending"  # pending | committed | failed
    error: str | None = None


class SharedStore:
    """Single source of truth for `(MenuKB, ShortageState)` snapshots.

    One lock serializes snapshots, round reconciliations, and commits,
    so observed `(kb.version, state.version)` pairs always form one
    linear history.  Menu changes queue as :class:`CommitTicket`s and
    land when the last session closes; each lands atomically with the
    shortage delta it was paired with, and both versions advance
    together.
    """

    def __init__(
        self,
        kb: MenuKB,
        state: ShortageState | None = None,
        state_dir: str | pathlib.Path | None = None,
    ):
        self._lock = threading.RLock()
        self._kb = kb
        self._state = state or ShortageState()
        self._active: set[str] = set()
        self._pending: list[CommitTicket] = []
        self.counters = {
            "snapshots": 0,
            "reconciles": 0,
            "consistency_checks": 0,
            "commits": 0,
        }
        self._state_dir = pathlib.Path(state_dir) if state_dir else None
        if self._state_dir:
            self._state_dir.mkdir(parents=True, exist_ok=True)
            self._write_state_file()

    # -- snapshots ------------------------------------------------

    def snapshot(self) -> tuple[MenuKB, ShortageState]:
        with self._lock:
            self.counters["snapshots"] += 1
            return self._kb, self._state

    def peek(self) -> tuple[MenuKB, ShortageState]:
        """Read-only inspection: same view as snapshot(), no accounting."""
        with self._lock:
            return self._kb, self._state

    @property
    def kb_version(self) -> int:
        with self._lock:
            return self._kb.version

    @property
    def state_version(self) -> int:
        with self._lock:
            return self._state.version

    # -- session lifecycle ----------------------------------------

    def begin_session(self, session_id: str) -> None:
        with self._lock:
            self._active.add(session_id)

    def end_session(self, session_id: str) -> list[CommitTicket]:
        """Close a session; when it was the last one, flush the queue."""
        with self._lock:
            self._active.discard(session_id)
            return self._flush_pending()

    @property
    def active_sessions(self) -> set[str]:
        with self._lock:
            return set(self._active)

    # -- per-round shortage sync ----------------------------------

    def round_sync(self, delta: StateDelta) -> ShortageState:
        """The once-per-round consistency check + reconciliation."""
        with self._lock:
            self.counters["consistency_checks"] += 1
            problems = consistency_check(self._kb, self._state, delta)
            if problems:
                raise InconsistentDelta("; ".join(problems))
            self.counters["reconciles"] += 1
            self._state = reconcile(self._kb, self._state, delta)
            self._log_delta(delta)
            self._write_state_file()
            return self._state

    # -- menu commits ----------------------------------------------

    def request_commit(
        self, mutations: MutationSet, shortage: StateDelta | None = None
    ) -> CommitTicket:
        """Queue a menu change; it lands once no session is active."""
        ticket = CommitTicket(mutations, shortage or StateDelta())
        with self._lock:
            self._pending.append(ticket)
            self._flush_pending()
            return ticket

    @property
    def pending_commits(self) -> list[CommitTicket]:
        with self._lock:
            return list(self._pending)

    def _flush_pending(self) -> list[CommitTicket]:
        flushed: list[CommitTicket] = []
        if self._active:
            return flushed
        while self._pending:
            ticket = self._pending.pop(0)
            try:
                next_kb = apply_mutations(self._kb, ticket.mutations)
                next_state = reconcile(next_kb, self._state, ticket.shortage)
            except (KBValidationError, MutationError, StateError) as exc:
                ticket.status = "failed"
                ticket.error = str(exc)
                log.warning("commit failed, both halves rolled back: %s", exc)
            else:
                self._kb = next_kb
                self._state = next_state
                self.counters["commits"] += 1
                ticket.status = "committed"
                self._log_delta(ticket.shortage)
                self._write_state_file()
            flushed.append(ticket)
        return flushed

    # -- persistence -----------------------------------------------

    def _log_delta(self, delta: StateDelta) -> None:
        if not self._state_dir or not delta.staged:
            return
        stamp = _dt.datetime.now(_dt.timezone.utc).isoformat()
        with open(self._state_dir / "delta.log", "a", encoding="utf-8") as handle:
            for fact in delta.staged:
                handle.write(f"{stamp}\t{delta.origin}\t{to_source_fact(fact)}\n")

    def _write_state_file(self) -> None:
        if not self._state_dir:
            return
        lines = [f"% shortage state, version {self._state.version}"]
        lines += [to_source_fact(fact) for fact in self._state.facts()]
        (self._state_dir / "state.lp").write_text("\n".join(lines) + "\n", encoding="utf-8")
