from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from duet.orchestrator import RunConfig
from duet.policies import oracle_agent_factory, oracle_user_factory
from duet.runner import execute_run
from duet.server import create_app
from duet.store import RunStore
from duet.tasks import write_suite
from duet.telecom import build_environment

APPENDIX_ID = "[service_issue]airplane_mode_on|unseat_sim_card"


@pytest.fixture(scope="module")
def serve_root(tmp_path_factory, request):
    universe = request.getfixturevalue("universe")
    root = tmp_path_factory.mktemp("serve")
    tasks = [t for t in universe if t.n_subtasks <= 2][:40]
    by_id = {t.id: t for t in tasks}
    assert APPENDIX_ID in by_id
    suite = root / "tasks.json"
    write_suite(suite, tasks, domain="telecom")
    store = RunStore(root / "store")
    execute_run(
        [by_id[APPENDIX_ID]],
        oracle_agent_factory,
        oracle_user_factory,
        build_environment,
        RunConfig(trials_per_task=1),
        store=store,
        run_id="oracle-run",
    )
    return root


@pytest.fixture(scope="module")
def client(serve_root):
    app = create_app(store_root=serve_root / "store", tasks_path=serve_root / "tasks.json")
    return TestClient(app)


def test_health_and_tasks(client):
    assert client.get("/health").json()["status"] == "ok"
    tasks = client.get("/tasks").json()
    assert any(t["id"] == APPENDIX_ID for t in tasks)
    index = next(t["index"] for t in tasks if t["id"] == APPENDIX_ID)
    detail = client.get(f"/tasks/{index}").json()
    assert detail["doc"]["id"] == APPENDIX_ID
    assert "## Ticket" in detail["markdown"]
    assert client.get("/tasks/999999").status_code == 404


def test_stored_run_browsing(client):
    runs = client.get("/runs").json()
    assert runs and runs[0]["run_id"] == "oracle-run"
    trajectories = client.get("/runs/oracle-run/trajectories").json()
    assert len(trajectories) == 1
    name = trajectories[0]["file"]
    doc = client.get(f"/runs/oracle-run/trajectories/{name}").json()
    assert doc["header"]["task_id"] == APPENDIX_ID
    assert doc["footer"]["stop_reason"] == "user_stop"
    assert doc["malformed"] == []
    user_tool_events = [
        e for e in doc["events"] if e["actor"] == "user" and e["action"]["kind"] == "tool_call"
    ]
    assert len(user_tool_events) == 2


def test_malformed_trajectory_line_reported(client, serve_root):
    name = client.get("/runs/oracle-run/trajectories").json()[0]["file"]
    path = serve_root / "store" / "oracle-run" / "trajectories" / name
    with open(path, "a") as f:
        f.write("{this is not json}\n")
    doc = client.get(f"/runs/oracle-run/trajectories/{name}").json()
    assert doc["malformed"] and doc["malformed"][0]["raw"].startswith("{this")
    assert doc["events"]  # rest of the trajectory still renders


def _play_user_session(client, task_id):
    r = client.post("/sessions", json={"task_id": task_id, "mode": "default", "human_role": "user"})
    assert r.status_code == 200
    sid = r.json()["session_id"]

    def act(action):
        resp = client.post(f"/sessions/{sid}/action", json={"action": action})
        assert resp.status_code == 200, resp.text
        return resp.json()

    state = client.get(f"/sessions/{sid}").json()
    assert state["your_turn"] is True
    assert state["criteria"][0]["passed"] is False
    act({"kind": "message", "text": "Hi, no service since this morning. John Smith, 555-123-2002."})
    act({"kind": "tool_call", "name": "toggle_airplane_mode", "args": {}})
    act({"kind": "message", "text": "Airplane mode is off now but still no signal."})
    state = act({"kind": "tool_call", "name": "reseat_sim_card", "args": {}})
    assert state["criteria"][0]["passed"] is True
    act({"kind": "message", "text": "Full signal now, thank you!"})
    state = act({"kind": "message", "text": "Bye! ###STOP###"})
    return sid, state


def test_human_as_user_session(client):
    sid, state = _play_user_session(client, APPENDIX_ID)
    assert state["done"] is True
    assert state["stop_reason"] == "user_stop"
    assert state["reward"] == 1


def test_session_view_hides_agent_tools(client):
    r = client.post(
        "/sessions", json={"task_id": "[service_issue]line_suspended", "mode": "default", "human_role": "user"}
    )
    sid = r.json()["session_id"]
    state = client.post(
        f"/sessions/{sid}/action",
        json={"action": {"kind": "message", "text": "Hi, my line seems dead. John Smith 555-123-2002."}},
    ).json()
    blob = json.dumps(state)
    # resume_line runs on the agent side; its result must never reach the user view
    assert "resume_line" not in json.dumps(state["view"]["visible_history"])
    assert all(t["name"].startswith(("get_", "check_", "run_", "can_", "toggle_", "reseat_",
                                     "unlock_", "reboot_", "reset_", "power_", "connect_",
                                     "disconnect_", "remove_", "turn_", "charge_", "lock_"))
               for t in state["view"]["tools"])


def test_out_of_turn_rejected(client):
    r = client.post("/sessions", json={"task_id": APPENDIX_ID, "mode": "default", "human_role": "user"})
    sid = r.json()["session_id"]
    # it IS our turn; burn it with a message, then immediately... the oracle agent
    # responds instantly, so force the over-state instead:
    client.post(f"/sessions/{sid}/action", json={"action": {"kind": "message", "text": "###STOP###"}})
    resp = client.post(f"/sessions/{sid}/action", json={"action": {"kind": "message", "text": "hello"}})
    assert resp.status_code == 409


def test_unknown_session_and_task(client):
    assert client.get("/sessions/doesnotexist").status_code == 404
    r = client.post("/sessions", json={"task_id": "[x]nope", "mode": "default", "human_role": "user"})
    assert r.status_code == 404


def test_rewind_forks_branch(client):
    sid, state = _play_user_session(client, APPENDIX_ID)
    r = client.post(f"/sessions/{sid}/rewind", json={"event_index": 4, "note": "redo from sim step"})
    assert r.status_code == 200
    fork_id = r.json()["session_id"]
    fork = client.get(f"/sessions/{fork_id}").json()
    assert fork["parent_session_id"] == sid
    assert fork["event_count"] == 4
    assert fork["done"] is False
    sessions = client.get("/sessions").json()
    ids = {s["session_id"] for s in sessions}
    assert {sid, fork_id} <= ids  # both branches stored
    original = client.get(f"/sessions/{sid}").json()
    assert original["done"] is True  # original untouched
    client.post(f"/sessions/{fork_id}/close")


def test_sse_stream_replays_history(client):
    sid, _ = _play_user_session(client, APPENDIX_ID)
    events = []
    with client.stream("GET", f"/sessions/{sid}/stream") as resp:
        assert resp.headers["content-type"].startswith("text/event-stream")
        for line in resp.iter_lines():
            events.append(line)
            if line.startswith("event: end"):
                break
    history_count = sum(1 for l in events if l.startswith("event: history"))
    assert history_count >= 8
    assert any(l.startswith("event: end") for l in events)
