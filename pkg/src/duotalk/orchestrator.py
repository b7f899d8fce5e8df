"""Session orchestration: every round is snapshot → parse → reason → generate.

The orchestrator owns the conversation loop for both roles.  Each round
takes exactly one `(menu, shortage)` snapshot from the shared store,
parses the utterance against the session's open question, steps the
agent over the snapshot, syncs any staged shortage delta, and renders
the response predicates.  Per-phase wall times are recorded in integer
nanoseconds so the phase sum can never exceed the recorded total.
"""

from __future__ import annotations

import json
import logging
import time
import uuid
from dataclasses import dataclass, field
from importlib import resources

from .frames import CustomerFrame, Frame, ManagerFrame, render_frames
from .kb import MenuKB
from .manager_agent import ManagerSession, manager_step, open_manager_session
from .nl import GREETINGS, DeterministicGenerator, DeterministicParser, ParseContext, Vocabulary
from .service_agent import ServiceSession, next_question, open_service_session, service_step
from .shared_state import InconsistentDelta, SharedStore
from .terms import Struct, atom, struct, to_text

log = logging.getLogger(__name__)

__all__ = [
    "Orchestrator",
    "Round",
    "RoundTiming",
    "Session",
    "SessionError",
    "load_script",
    "replay",
    "run_bench",
]

APOLOGY = "Sorry, something went wrong on our end. Could you say that again?"


class SessionError(Exception):
    """Bad session lifecycle call (unknown id, double close, message after close)."""


@dataclass(frozen=True)
class RoundTiming:
    """Wall time per phase, in nanoseconds (integers, so sums are exact)."""

    parse_ns: int
    reasoning_ns: int
    generate_ns: int
    total_ns: int

    @property
    def parse_ms(self) -> float:
        return self.parse_ns / 1e6

    @property
    def reasoning_ms(self) -> float:
        return self.reasoning_ns / 1e6

    @property
    def generate_ms(self) -> float:
        return self.generate_ns / 1e6

    @property
    def total_ms(self) -> float:
        return self.total_ns / 1e6

    def as_dict(self) -> dict[str, float]:
        return {
            "parse_ms": self.parse_ms,
            "reasoning_ms": self.reasoning_ms,
            "generate_ms": self.generate_ms,
            "total_ms": self.total_ms,
        }


@dataclass
class Round:
    index: int
    utterance: str
    frames: list[Frame]
    predicates: list[Struct]
    reply: str
    timing: RoundTiming
    kb_version: int
    state_version: int

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "utterance": self.utterance,
            "frames": render_frames(self.frames),
            "predicates": " ".join(to_text(p) + "." for p in self.predicates),
            "reply": self.reply,
            "timing": self.timing.as_dict(),
            "kb_version": self.kb_version,
            "state_version": self.state_version,
        }


@dataclass
class Session:
    sid: str
    role: str
    agent: ManagerSession | ServiceSession
    greeting: str
    rounds: list[Round] = field(default_factory=list)
    last_recommendation: str | None = None
    pending_commits: list = field(default_factory=list)
    closed: bool = False
    finalized: bool = False
    result: dict | None = None


class Orchestrator:
    """Runs conversations for both roles over one shared store."""

    def __init__(self, store: SharedStore, parser_factory=None, generator_factory=None):
        self.store = store
        self._make_parser = parser_factory or DeterministicParser
        self._make_generator = generator_factory or DeterministicGenerator
        self._sessions: dict[str, Session] = {}
        self._parsers: dict[str, object] = {}
        self._generators: dict[str, object] = {}
        self._vocab_cache: tuple[int, Vocabulary] | None = None

    # -- lifecycle --------------------------------------------------

    def open_session(self, role: str, sid: str | None = None) -> Session:
        if role not in ("manager", "customer"):
            raise SessionError(f"unknown role {role!r}")
        sid = sid or uuid.uuid4().hex[:12]
        if sid in self._sessions:
            raise SessionError(f"session {sid!r} already exists")
        if role == "manager":
            kb, _ = self.store.snapshot()
            agent = open_manager_session(sid, kb)
        else:
            agent = open_service_session(sid)
        session = Session(sid=sid, role=role, agent=agent, greeting=GREETINGS[role])
        self._sessions[sid] = session
        self.store.begin_session(sid)
        return session

    def get_session(self, sid: str) -> Session:
        try:
            return self._sessions[sid]
        except KeyError:
            raise SessionError(f"unknown session {sid!r}") from None

    def close_session(self, sid: str) -> dict:
        session = self.get_session(sid)
        if session.closed:
            raise SessionError(f"session {sid!r} is already closed")
        session.closed = True
        return self._finalize(session)

    def _finalize(self, session: Session) -> dict:
        if session.finalized:
            return session.result or {}
        session.finalized = True
        result: dict = {"sid": session.sid, "role": session.role}
        if session.role == "manager":
            ckt = session.agent.ckt
            if ckt is not None:
                log.warning(
                    "session %s closed with an unfinished add-food questionnaire for %s;"
                    " the partial entry is dropped",
                    session.sid,
                    ckt.target,
                )
            tickets = [self.store.request_commit(m) for m in session.pending_commits]
            session.pending_commits = []
            result["commits"] = tickets
        else:
            result["ticket"] = session.agent.last_ticket
        self.store.end_session(session.sid)
        result["kb_version"] = self.store.kb_version
        result["state_version"] = self.store.state_version
        session.result = result
        return result

    # -- the round --------------------------------------------------

    def message(self, sid: str, text: str) -> Round:
        session = self.get_session(sid)
        if session.closed or session.agent.closed:
            raise SessionError(f"session {sid!r} is closed")

        t_start = time.perf_counter_ns()
        kb, shortage = self.store.snapshot()  # the round's one snapshot

        p0 = time.perf_counter_ns()
        frames = self._parse(session, kb, text)
        p1 = time.perf_counter_ns()

        predicates = self._reason(session, kb, shortage, frames)
        r1 = time.perf_counter_ns()

        reply = self._generate(session, predicates)
        g1 = time.perf_counter_ns()

        timing = RoundTiming(
            parse_ns=p1 - p0,
            reasoning_ns=r1 - p1,
            generate_ns=g1 - r1,
            total_ns=g1 - t_start,
        )
        round_ = Round(
            index=len(session.rounds) + 1,
            utterance=text,
            frames=frames,
            predicates=predicates,
            reply=reply,
            timing=timing,
            kb_version=kb.version,
            state_version=shortage.version,
        )
        session.rounds.append(round_)
        if session.agent.closed:
            self._finalize(session)
        return round_

    def _context(self, session: Session, kb: MenuKB) -> ParseContext:
        if session.role == "manager":
            vocab = Vocabulary.from_kb(session.agent.projected_kb)
            ckt = session.agent.ckt
            open_q = None
            if ckt is not None:
                open_q = struct("ask", atom(ckt.target), atom(ckt.current_slot()))
            return ParseContext("manager", vocab, open_question=open_q)
        if self._vocab_cache is None or self._vocab_cache[0] != kb.version:
            self._vocab_cache = (kb.version, Vocabulary.from_kb(kb))
        vocab = self._vocab_cache[1]
        agent: ServiceSession = session.agent
        open_q = None
        if agent.phase == "asking":
            open_q = next_question(kb, agent.order, agent.declined)
        return ParseContext(
            "customer",
            vocab,
            open_question=open_q,
            last_recommendation=session.last_recommendation,
            ordered_foods=tuple(line.food for line in agent.order.lines),
        )

    def _irrelevant(self, role: str) -> list[Frame]:
        return [ManagerFrame("irrelevant") if role == "manager" else CustomerFrame("irrelevant")]

    def _parse(self, session: Session, kb: MenuKB, text: str) -> list[Frame]:
        if not text.strip():
            return self._irrelevant(session.role)
        parser = self._parsers.get(session.role)
        if parser is None:
            parser = self._parsers[session.role] = self._make_parser(session.role)
        context = self._context(session, kb)
        from .nl.llm import TransportError

        try:
            return parser.parse(text, context)
        except TransportError as first:
            log.warning("parser transport error, retrying once: %s", first)
            try:
                return parser.parse(text, context)
            except TransportError as second:
                log.error("parser transport failed twice, giving up: %s", second)
                return self._irrelevant(session.role)

    def _reason(self, session: Session, kb, shortage, frames: list[Frame]) -> list[Struct]:
        if session.role == "manager":
            step = manager_step(session.agent, frames)
            session.agent = step.session
            session.pending_commits.extend(step.commits)
            predicates = step.predicates
            if step.delta.staged:
                try:
                    self.store.round_sync(step.delta)
                except InconsistentDelta as exc:
                    log.warning("round delta rejected: %s", exc)
                    name = to_text(step.delta.staged[0].args[0])
                    predicates = [struct("confirm", atom("rejected"), atom(name))]
            return predicates
        step = service_step(session.agent, kb, shortage, frames)
        session.agent = step.session
        for pred in step.predicates:
            if pred.name == "recommend" and to_text(pred.args[1]) != "none":
                session.last_recommendation = to_text(pred.args[1])
        return step.predicates

    def _generate(self, session: Session, predicates: list[Struct]) -> str:
        if not predicates:
            return ""  # deliberately silent rounds exist in the checkout phase
        generator = self._generators.get(session.role)
        if generator is None:
            generator = self._generators[session.role] = self._make_generator(session.role)
        from .nl.llm import TransportError

        try:
            return generator.generate(predicates)
        except TransportError as first:
            log.warning("generator transport error, retrying once: %s", first)
            try:
                return generator.generate(predicates)
            except TransportError as second:
                log.error("generator transport failed twice, giving up: %s", second)
                return APOLOGY

    # -- transcripts --------------------------------------------------

    def transcript(self, sid: str) -> list[dict]:
        session = self.get_session(sid)
        head = {
            "index": 0,
            "utterance": "",
            "frames": "",
            "predicates": "",
            "reply": session.greeting,
            "timing": None,
            "kb_version": None,
            "state_version": None,
        }
        return [head] + [r.as_dict() for r in session.rounds]

    def render_transcript(self, sid: str) -> str:
        session = self.get_session(sid)
        lines = [f"[{session.role}] bot: {session.greeting}"]
        for r in session.rounds:
            lines.append(f"[{session.role}] user: {r.utterance}")
            lines.append(f"[{session.role}] frames: {render_frames(r.frames)}")
            preds = " ".join(to_text(p) + "." for p in r.predicates)
            lines.append(f"[{session.role}] predicates: {preds}")
            lines.append(f"[{session.role}] bot: {r.reply}")
        return "\n".join(lines)


# ------------------------------------------------------------
# scripted replay
# ------------------------------------------------------------


def load_script(source: str) -> dict:
    """Load a replay script from a file path or a bundled script name."""
    if "/" not in source and not source.endswith(".json"):
        path = resources.files("duotalk") / "data" / "scripts" / f"{source}.json"
        script = json.loads(path.read_text(encoding="utf-8"))
    else:
        with open(source, encoding="utf-8") as handle:
            script = json.loads(handle.read())
    turns = script.get("turns")
    if not isinstance(turns, list):
        raise ValueError("script needs a 'turns' list")
    for i, turn in enumerate(turns):
        if not isinstance(turn, dict) or turn.get("role") not in ("manager", "customer"):
            raise ValueError(f"turn {i}: 'role' must be manager or customer")
        if not isinstance(turn.get("text"), str):
            raise ValueError(f"turn {i}: 'text' must be a string")
    return script


def replay(store: SharedStore, script: dict, parser_factory=None, generator_factory=None):
    """Run a scripted conversation; returns (orchestrator, round dicts)."""
    orch = Orchestrator(store, parser_factory, generator_factory)
    by_role: dict[str, Session] = {}
    rows: list[dict] = []
    for turn in script["turns"]:
        role, text = turn["role"], turn["text"]
        session = by_role.get(role)
        if session is None or session.closed or session.agent.closed:
            session = orch.open_session(role)
            by_role[role] = session
            rows.append({"role": role, "event": "greeting", "reply": session.greeting})
        round_ = orch.message(session.sid, text)
        row = {"role": role, "event": "round", **round_.as_dict()}
        rows.append(row)
    for session in by_role.values():
        if not session.closed:
            orch.close_session(session.sid)
    return orch, rows


# ------------------------------------------------------------
# latency bench
# ------------------------------------------------------------

_BENCH_MANAGER_TURNS = [
    "We have no more tomatoes.",
    "The tomatoes are restocked.",
    "We ran out of lettuce.",
    "The lettuce is back in stock.",
]

_BENCH_CUSTOMER_TURNS = [
    "Add tomatoes to the soft taco.",
    "Extra beans on the soft taco.",
    "Add sour cream to the soft taco.",
    "No lettuce on the soft taco.",
    "Add jalapenos to the soft taco.",
]


def run_bench(
    store: SharedStore,
    role: str,
    rounds: int,
    requirements: int = 10,
    parser_factory=None,
    generator_factory=None,
) -> dict:
    """Time `rounds` conversational rounds; returns mean/max ms per phase."""
    orch = Orchestrator(store, parser_factory, generator_factory)
    session = orch.open_session(role)
    turns = _BENCH_MANAGER_TURNS if role == "manager" else _BENCH_CUSTOMER_TURNS
    if role == "customer" and requirements > 0:
        orch.message(session.sid, f"Can I have {requirements} soft tacos?")
    timings: list[RoundTiming] = []
    for i in range(rounds):
        round_ = orch.message(session.sid, turns[i % len(turns)])
        timings.append(round_.timing)
    orch.close_session(session.sid)

    def stats(values: list[float]) -> dict:
        return {
            "mean_ms": sum(values) / len(values),
            "max_ms": max(values),
        }

    kb, _ = store.snapshot()
    return {
        "role": role,
        "rounds": rounds,
        "requirements": requirements if role == "customer" else 0,
        "kb_facts": len(kb.facts),
        "parse": stats([t.parse_ms for t in timings]),
        "reasoning": stats([t.reasoning_ms for t in timings]),
        "generate": stats([t.generate_ms for t in timings]),
        "total": stats([t.total_ms for t in timings]),
    }
