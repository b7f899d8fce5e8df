"""HTTP facade over the orchestrator.

Every response carries the store's current `kb_version` and
`state_version`, so clients can detect staleness, and the body of any
GET is a pure function of `(kb_version, state_version, transcript)`.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .kb import default_menu
from .orchestrator import Orchestrator, SessionError
from .shared_state import CommitTicket, SharedStore
from .terms import to_source_fact, to_text

__all__ = ["create_app"]


class OpenSessionBody(BaseModel):
    role: str = Field(pattern="^(manager|customer)$")


class MessageBody(BaseModel):
    text: str


def _ticket_dict(ticket: CommitTicket) -> dict:
    return {
        "status": ticket.status,
        "error": ticket.error,
        "adds": [to_source_fact(f) for f in ticket.mutations.adds],
        "removes": [to_source_fact(f) for f in ticket.mutations.removes],
        "shortage": {
            "staged": [to_source_fact(f) for f in ticket.shortage.staged],
        },
    }


def create_app(store: SharedStore | None = None, orchestrator: Orchestrator | None = None) -> FastAPI:
    store = store or SharedStore(default_menu())
    orch = orchestrator or Orchestrator(store)
    app = FastAPI(title="duotalk", docs_url=None, redoc_url=None)

    def versions() -> dict:
        return {"kb_version": store.kb_version, "state_version": store.state_version}

    def session_or_error(sid: str):
        try:
            return orch.get_session(sid)
        except SessionError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.post("/sessions")
    def open_session(body: OpenSessionBody):
        session = orch.open_session(body.role)
        return {
            "id": session.sid,
            "role": session.role,
            "greeting": session.greeting,
            **versions(),
        }

    @app.post("/sessions/{sid}/message")
    def message(sid: str, body: MessageBody):
        session_or_error(sid)
        try:
            round_ = orch.message(sid, body.text)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        data = round_.as_dict()
        return {
            "reply": data["reply"],
            "frames": data["frames"],
            "predicates": data["predicates"],
            "timing": data["timing"],
            "round": data["index"],
            **versions(),
        }

    @app.get("/sessions/{sid}/transcript")
    def transcript(sid: str):
        session_or_error(sid)
        return {"transcript": orch.transcript(sid), **versions()}

    @app.get("/sessions/{sid}/ticket")
    def ticket(sid: str):
        session = session_or_error(sid)
        if session.role != "customer":
            raise HTTPException(status_code=409, detail="manager sessions have no ticket")
        return {"ticket": session.agent.last_ticket, **versions()}

    @app.delete("/sessions/{sid}")
    def close(sid: str):
        session_or_error(sid)
        try:
            result = orch.close_session(sid)
        except SessionError as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        out = {"id": sid, "role": result["role"], **versions()}
        if "ticket" in result:
            out["ticket"] = result["ticket"]
        if "commits" in result:
            out["commits"] = [_ticket_dict(t) for t in result["commits"]]
        return out

    @app.get("/kb")
    def kb_facts(predicate: str | None = None, food: str | None = None):
        kb, _ = store.peek()
        if predicate:
            facts = kb.lookup(predicate, None)
        else:
            facts = list(kb.facts)
        if food:
            facts = [f for f in facts if any(to_text(a) == food for a in f.args)]
        return {"facts": [to_source_fact(f) for f in facts], "count": len(facts), **versions()}

    @app.get("/state")
    def state():
        _, shortage = store.peek()
        return {
            "runout": list(shortage.runout),
            "active_sessions": sorted(store.active_sessions),
            "pending_commits": [_ticket_dict(t) for t in store.pending_commits],
            "counters": dict(store.counters),
            **versions(),
        }

    return app
