from __future__ import annotations

import json

import pytest

from duet.orchestrator import RunConfig
from duet.policies import oracle_agent_factory, oracle_user_factory
from duet.runner import execute_run
from duet.store import (
    RunManifest,
    RunStore,
    event_from_json,
    event_to_json,
    replay_trajectory,
    sanitize_task_id,
    trajectory_from_lines,
    trajectory_to_lines,
)
from duet.telecom import build_environment, seed_fixture_digests
from duet.world import AGENT, USER, Event, IncomingMessage, Message, ToolCall, ToolResult


def test_event_codec_round_trip():
    events = [
        Event(0, AGENT, Message("hello"), IncomingMessage(AGENT, "hello")),
        Event(1, USER, ToolCall("toggle_airplane_mode", {}), ToolResult("done")),
        Event(2, USER, ToolCall("x", {"a": 1}), ToolResult({"k": [1, 2]}, is_error=True)),
        Event(3, AGENT, ToolCall("y", {"b": None}), None),
    ]
    for event in events:
        assert event_from_json(json.loads(json.dumps(event_to_json(event)))) == event


def test_sanitize_task_id():
    sanitized = sanitize_task_id("[service_issue]airplane_mode_on|unseat_sim_card")
    assert "/" not in sanitized and " " not in sanitized
    assert "airplane_mode_on" in sanitized


@pytest.fixture
def stored_run(tmp_path, appendix_task, tasks_by_id):
    store = RunStore(tmp_path / "store")
    transfer_task = tasks_by_id["[service_issue]esim_transfer_request"]
    outcome = execute_run(
        [appendix_task, transfer_task],
        oracle_agent_factory,
        oracle_user_factory,
        build_environment,
        RunConfig(trials_per_task=2, seed=5),
        store=store,
        run_id="r1",
        fixture_digests=seed_fixture_digests(),
        policy_ids={"agent": "oracle", "user": "oracle"},
    )
    return store, outcome, [appendix_task, transfer_task]


def test_store_round_trip(stored_run):
    store, outcome, tasks = stored_run
    assert store.list_runs() == ["r1"]
    manifest = store.read_manifest("r1")
    assert manifest.mode == "default"
    assert manifest.hash_algorithm == "sha256"
    assert set(manifest.domain_fixture_digests) == {"agent_db", "user_db"}

    loaded = store.read_trajectory("r1", tasks[0].id, 0)
    original = outcome.trajectories[0]
    assert loaded.events == original.events
    assert loaded.stop_reason == original.stop_reason
    assert loaded.final_world_hashes == original.final_world_hashes

    records = store.read_results("r1")
    assert [r.reward for r in records] == [r.reward for r in outcome.records]
    assert all(r.reward == 1 for r in records)


def test_replay_confirms_hashes(stored_run, tasks_by_id):
    store, outcome, tasks = stored_run
    trajectory = store.read_trajectory("r1", tasks[0].id, 0)
    result = replay_trajectory(trajectory, tasks[0], build_environment())
    assert result.ok


def test_replay_detects_tampering(stored_run, tasks_by_id):
    store, outcome, tasks = stored_run
    path = store.trajectory_path("r1", tasks[0].id, 0)
    lines = path.read_text().splitlines()
    # drop one tool-call line: replay must land on different hashes
    doctored = [l for l in lines if '"reseat_sim_card"' not in l]
    assert len(doctored) < len(lines)
    trajectory = trajectory_from_lines(doctored)
    result = replay_trajectory(trajectory, tasks[0], build_environment())
    assert not result.ok


def test_manifest_immutable(stored_run):
    store, outcome, _ = stored_run
    with pytest.raises(FileExistsError):
        store.write_manifest(outcome.manifest)


def test_trajectory_lines_shape(stored_run):
    store, outcome, tasks = stored_run
    lines = trajectory_to_lines(outcome.trajectories[0])
    header = json.loads(lines[0])
    footer = json.loads(lines[-1])
    assert header["kind"] == "trajectory_header"
    assert footer["kind"] == "trajectory_end"
    body = [json.loads(l) for l in lines[1:-1]]
    assert [e["index"] for e in body] == list(range(len(body)))
    assert trajectory_from_lines(lines).task_id == tasks[0].id
