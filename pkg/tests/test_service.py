"""HTTP API: endpoint contracts, error codes, schema strictness."""

import json

import pytest
from fastapi.testclient import TestClient

from diet_advisor.engine import AdvisorEngine
from diet_advisor.service import create_app

from conftest import build_store


@pytest.fixture
def client(tmp_path):
    app = create_app(AdvisorEngine(build_store()),
                     transcript_log=str(tmp_path / "turns.jsonl"))
    with TestClient(app) as test_client:
        yield test_client


def open_session(client, **payload):
    response = client.post("/sessions", json=payload)
    assert response.status_code == 201
    return response.json()["session_id"]


def test_health_reports_store_counts(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "dishes": 10, "users": 2}


def test_full_meal_turn_over_http(client):
    session_id = open_session(client)
    response = client.post(f"/sessions/{session_id}/messages",
                           json={"text": "prepare a meal for Anna"})
    assert response.status_code == 200
    record = response.json()
    assert record["session_id"] == session_id
    assert record["turn_index"] == 1
    assert record["intent_kind"] == "meal_preparation"
    assert not record["awaiting_clarification"]
    assert record["plans"][0]["dishes"] == ["grilled chicken", "lentil soup",
                                            "rice bowl"]
    assert record["disclosed_notes"][0]["stage"] == "IntentReceived"
    stages = [t["stage"] for t in record["timings"]]
    assert "Solver" in stages and "TotalTurn" in stages
    assert all(t["seconds"] > 0 for t in record["timings"])


def test_transcript_accumulates_turns(client):
    session_id = open_session(client)
    client.post(f"/sessions/{session_id}/messages",
                json={"text": "what's in the rice bowl?"})
    client.post(f"/sessions/{session_id}/messages",
                json={"text": "tell me a joke"})
    transcript = client.get(f"/sessions/{session_id}/transcript").json()
    assert [t["turn_index"] for t in transcript] == [1, 2]
    assert transcript[1]["intent_kind"] == "out_of_scope"


def test_clarification_over_http(client):
    session_id = open_session(client)
    first = client.post(f"/sessions/{session_id}/messages",
                        json={"text": "register a new user called Pia"}).json()
    assert first["awaiting_clarification"]
    second = client.post(
        f"/sessions/{session_id}/messages",
        json={"text": "1600 kcal, 200 carbs, 65 proteins, 45 fats"}).json()
    assert "registered pia" in second["reply"]


def test_unknown_session_is_404(client):
    assert client.post("/sessions/nope/messages",
                       json={"text": "hi"}).status_code == 404
    assert client.get("/sessions/nope/transcript").status_code == 404


def test_closed_session_is_404(client):
    session_id = open_session(client)
    service = client.app.state.service
    service._sessions[session_id].session.close()
    assert client.post(f"/sessions/{session_id}/messages",
                       json={"text": "hi"}).status_code == 404


def test_empty_text_is_422(client):
    session_id = open_session(client)
    assert client.post(f"/sessions/{session_id}/messages",
                       json={"text": "   "}).status_code == 422
    assert client.post(f"/sessions/{session_id}/messages",
                       json={}).status_code == 422


def test_unknown_fields_rejected(client):
    assert client.post("/sessions", json={"verbosity": 3}).status_code == 422
    session_id = open_session(client)
    assert client.post(f"/sessions/{session_id}/messages",
                       json={"text": "hi", "priority": 1}).status_code == 422
    assert client.post("/sessions",
                       json={"solver": {"beam_width": 4}}).status_code == 422


def test_bad_session_options_are_400(client):
    assert client.post("/sessions", json={"replan_cap": 0}).status_code == 400
    assert client.post("/sessions",
                       json={"solver": {"threshold": 0.0}}).status_code == 400


def test_concurrent_turn_is_409(client):
    session_id = open_session(client)
    entry = client.app.state.service._sessions[session_id]
    assert entry.lock.acquire(blocking=False)
    try:
        response = client.post(f"/sessions/{session_id}/messages",
                               json={"text": "hello"})
        assert response.status_code == 409
    finally:
        entry.lock.release()
    # and the session still works once the lock is free
    assert client.post(f"/sessions/{session_id}/messages",
                       json={"text": "what's in the rice bowl?"}).status_code == 200


def test_transparency_flag_hides_notes(client):
    session_id = open_session(client, transparency=False)
    record = client.post(f"/sessions/{session_id}/messages",
                         json={"text": "what's in the rice bowl?"}).json()
    assert record["disclosed_notes"] == []


def test_solver_overrides_scope_to_one_session(client):
    limited = open_session(client, solver={"max_solutions": 1})
    record = client.post(f"/sessions/{limited}/messages",
                         json={"text": "prepare a meal for Anna"}).json()
    assert len(record["plans"]) == 1
    default = open_session(client)
    record = client.post(f"/sessions/{default}/messages",
                         json={"text": "prepare a meal for Anna"}).json()
    assert len(record["plans"]) > 1


def test_sessions_are_isolated(client):
    a = open_session(client)
    b = open_session(client)
    client.post(f"/sessions/{a}/messages",
                json={"text": "register a new user called Pia"})
    record = client.post(f"/sessions/{b}/messages",
                         json={"text": "what's in the rice bowl?"}).json()
    assert not record["awaiting_clarification"]
    assert len(client.get(f"/sessions/{a}/transcript").json()) == 1


def test_transcript_log_appends_jsonl(client, tmp_path):
    session_id = open_session(client)
    client.post(f"/sessions/{session_id}/messages",
                json={"text": "what's in the rice bowl?"})
    lines = (tmp_path / "turns.jsonl").read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["intent_kind"] == "dish_info"


def test_openapi_schema_is_strict(client):
    spec = client.get("/openapi.json").json()
    schemas = spec["components"]["schemas"]
    for model in ("MessageRequest", "SessionCreateRequest", "SolverOverrides"):
        assert schemas[model].get("additionalProperties") is False
    record = schemas["TurnRecordModel"]
    assert set(record["required"]) >= {"session_id", "turn_index", "utterance",
                                       "reply", "intent_kind",
                                       "awaiting_clarification",
                                       "disclosed_notes", "timings", "plans"}
