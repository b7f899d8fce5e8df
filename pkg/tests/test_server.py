"""HTTP API tests: the FastAPI app is exercised in-process through the
ASGI test client, so no network socket is involved."""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from duotalk.kb import default_menu
from duotalk.server import create_app
from duotalk.shared_state import SharedStore


@pytest.fixture()
def client():
    store = SharedStore(default_menu())
    app = create_app(store)
    with TestClient(app) as c:
        c.store = store  # handy for white-box assertions
        yield c


def open_session(client, role):
    resp = client.post("/sessions", json={"role": role})
    assert resp.status_code == 200, resp.text
    return resp.json()


def say(client, sid, text):
    resp = client.post(f"/sessions/{sid}/message", json={"text": text})
    assert resp.status_code == 200, resp.text
    return resp.json()


# ------------------------------------------------------------
# session lifecycle
# ------------------------------------------------------------


def test_open_session_returns_greeting_and_versions(client):
    body = open_session(client, "customer")
    assert body["role"] == "customer"
    assert body["greeting"]
    assert body["kb_version"] == 1
    assert body["state_version"] == 1
    assert body["id"]


def test_bad_role_is_rejected_by_validation(client):
    resp = client.post("/sessions", json={"role": "chef"})
    assert resp.status_code == 422


def test_message_unknown_session_is_404(client):
    resp = client.post("/sessions/nope/message", json={"text": "Hi."})
    assert resp.status_code == 404


def test_close_then_second_close_conflicts(client):
    sid = open_session(client, "customer")["id"]
    first = client.delete(f"/sessions/{sid}")
    assert first.status_code == 200
    assert first.json()["role"] == "customer"
    second = client.delete(f"/sessions/{sid}")
    assert second.status_code == 409


def test_message_after_close_conflicts(client):
    sid = open_session(client, "customer")["id"]
    client.delete(f"/sessions/{sid}")
    resp = client.post(f"/sessions/{sid}/message", json={"text": "One Pepsi."})
    assert resp.status_code == 409


# ------------------------------------------------------------
# cross-session shortage flow, entirely over HTTP
# ------------------------------------------------------------


def test_manager_runout_blocks_customer_over_http(client):
    manager = open_session(client, "manager")["id"]
    body = say(client, manager, "We have run out of Slow-Roasted Chicken.")
    assert "confirm(runout, Slow-Roasted Chicken)." in body["predicates"]
    assert body["state_version"] == 2  # staged delta already reconciled

    customer = open_session(client, "customer")["id"]
    answer = say(client, customer, "Can I get a Cantina Chicken Soft Taco?")
    expected = "unavailable(Cantina Chicken Soft Taco, runout(Slow-Roasted Chicken))"
    assert expected in answer["predicates"]
    assert "Slow-Roasted Chicken" in answer["reply"]


def test_round_payload_has_frames_predicates_timing(client):
    sid = open_session(client, "customer")["id"]
    body = say(client, sid, "Can I have two Crunchy Tacos?")
    assert body["round"] == 1
    assert body["frames"] == "order(Crunchy Taco, 2)."
    assert "confirm(order, Crunchy Taco)." in body["predicates"]
    timing = body["timing"]
    assert set(timing) >= {"parse_ms", "reasoning_ms", "generate_ms", "total_ms"}
    assert timing["total_ms"] >= 0.0


def test_transcript_lists_greeting_then_rounds(client):
    sid = open_session(client, "customer")["id"]
    say(client, sid, "One Pepsi, please.")
    say(client, sid, "That's all.")
    body = client.get(f"/sessions/{sid}/transcript").json()
    rows = body["transcript"]
    assert rows[0]["index"] == 0 and rows[0]["utterance"] == ""
    assert rows[0]["reply"]  # the greeting line
    assert [r["utterance"] for r in rows[1:]] == ["One Pepsi, please.", "That's all."]
    assert all("reply" in r for r in rows[1:])


# ------------------------------------------------------------
# ticket endpoint
# ------------------------------------------------------------


def test_ticket_endpoint_matches_close_result(client):
    sid = open_session(client, "customer")["id"]
    say(client, sid, "One Pepsi, please.")
    say(client, sid, "That's everything.")   # answers: which size?
    say(client, sid, "Regular is fine.")
    live = client.get(f"/sessions/{sid}/ticket").json()
    assert live["ticket"]["total_cents"] == 319
    assert live["ticket"]["total"] == "3.19"
    assert [line["food"] for line in live["ticket"]["lines"]] == ["Pepsi"]
    closed = client.delete(f"/sessions/{sid}").json()
    assert closed["ticket"] == live["ticket"]


def test_ticket_endpoint_is_null_before_checkout(client):
    sid = open_session(client, "customer")["id"]
    say(client, sid, "One Pepsi, please.")
    assert client.get(f"/sessions/{sid}/ticket").json()["ticket"] is None


def test_manager_has_no_ticket_endpoint(client):
    sid = open_session(client, "manager")["id"]
    resp = client.get(f"/sessions/{sid}/ticket")
    assert resp.status_code == 409


# ------------------------------------------------------------
# KB and state inspection
# ------------------------------------------------------------


def test_kb_filter_by_predicate_and_food(client):
    body = client.get("/kb", params={"predicate": "original_price", "food": "Pepsi"}).json()
    assert body["count"] == 1
    assert body["facts"] == ["original_price('Pepsi', 319)."]
    unfiltered = client.get("/kb").json()
    assert unfiltered["count"] > 1000
    assert unfiltered["kb_version"] == 1


def test_state_reports_runouts_sessions_and_counters(client):
    manager = open_session(client, "manager")["id"]
    say(client, manager, "We are out of Tomatoes.")
    body = client.get("/state").json()
    assert body["runout"] == ["Tomatoes"]
    assert body["active_sessions"] == [manager]
    assert body["counters"]["snapshots"] >= 1
    assert body["state_version"] == 2


def test_pending_commit_appears_in_state_then_flushes(client):
    manager = open_session(client, "manager")["id"]
    customer = open_session(client, "customer")["id"]  # holds the gate open
    walk = [
        "Let's add a new dish called Crunch Wrap.",
        "It's a burrito.",
        "Let's say $3.99.",
        "Lettuce, tomatoes and cheddar cheese.",
        "That's all.",
        "It has 540 calories.",
        "Done.",
    ]
    for line in walk:
        say(client, manager, line)
    closed = client.delete(f"/sessions/{manager}").json()
    assert [t["status"] for t in closed["commits"]] == ["pending"]
    state = client.get("/state").json()
    assert len(state["pending_commits"]) == 1
    assert any("dish('Crunch Wrap')" in fact for fact in state["pending_commits"][0]["adds"])
    assert state["kb_version"] == 1

    client.delete(f"/sessions/{customer}")
    after = client.get("/state").json()
    assert after["pending_commits"] == []
    assert after["kb_version"] == 2
    menu = client.get("/kb", params={"predicate": "dish", "food": "Crunch Wrap"}).json()
    assert menu["count"] == 1


def test_get_endpoints_are_pure(client):
    sid = open_session(client, "customer")["id"]
    say(client, sid, "One Pepsi, please.")
    for path in ("/kb?predicate=dish", "/state", f"/sessions/{sid}/transcript"):
        first = client.get(path).json()
        second = client.get(path).json()
        assert first == second, path


def test_every_response_carries_versions(client):
    sid = open_session(client, "customer")["id"]
    payloads = [
        client.post("/sessions", json={"role": "manager"}).json(),
        say(client, sid, "One Pepsi, please."),
        client.get(f"/sessions/{sid}/transcript").json(),
        client.get(f"/sessions/{sid}/ticket").json(),
        client.get("/kb").json(),
        client.get("/state").json(),
        client.delete(f"/sessions/{sid}").json(),
    ]
    for body in payloads:
        assert {"kb_version", "state_version"} <= set(body), body
