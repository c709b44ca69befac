"""Run persistence: manifests, line-delimited trajectory files, results, replay.

Layout: one directory per run containing manifest.json, trajectories/*.jsonl
(one header line, one line per event, one footer line), results.jsonl and
tables.csv. Files are append-only and diffable.
"""

from __future__ import annotations

import json
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Iterator, Sequence

from . import __version__
from .engine import Environment, apply_init, execute_tool
from .evaluation import BreakdownRow, TrialRecord, CriterionResult, rows_to_csv
from .orchestrator import Trajectory
from .tasks import CompositeTask
from .world import (
    HASH_ALGORITHM,
    Event,
    IncomingMessage,
    Message,
    ToolCall,
    ToolResult,
)


@dataclass(frozen=True)
class RunManifest:
    run_id: str
    mode: str
    config: dict[str, Any]
    domain: str
    domain_fixture_digests: dict[str, str]
    policy_ids: dict[str, str]
    hash_algorithm: str = HASH_ALGORITHM
    code_version: str = __version__


def action_to_json(action) -> dict[str, Any]:
    if isinstance(action, ToolCall):
        return {"kind": "tool_call", "name": action.name, "args": action.args}
    if isinstance(action, Message):
        return {"kind": "message", "text": action.text}
    raise TypeError(f"unknown action type: {type(action).__name__}")


def action_from_json(doc: dict[str, Any]):
    if doc["kind"] == "tool_call":
        return ToolCall(doc["name"], doc["args"])
    if doc["kind"] == "message":
        return Message(doc["text"])
    raise ValueError(f"unknown action kind: {doc['kind']!r}")


def observation_to_json(obs) -> dict[str, Any] | None:
    if obs is None:
        return None
    if isinstance(obs, ToolResult):
        return {"kind": "tool_result", "payload": obs.payload, "is_error": obs.is_error}
    if isinstance(obs, IncomingMessage):
        return {"kind": "incoming_message", "from": obs.from_player, "text": obs.text}
    raise TypeError(f"unknown observation type: {type(obs).__name__}")


def observation_from_json(doc: dict[str, Any] | None):
    if doc is None:
        return None
    if doc["kind"] == "tool_result":
        return ToolResult(doc["payload"], doc["is_error"])
    if doc["kind"] == "incoming_message":
        return IncomingMessage(doc["from"], doc["text"])
    raise ValueError(f"unknown observation kind: {doc['kind']!r}")


def event_to_json(event: Event) -> dict[str, Any]:
    return {
        "index": event.index,
        "actor": event.actor,
        "action": action_to_json(event.action),
        "observation": observation_to_json(event.observation),
    }


def event_from_json(doc: dict[str, Any]) -> Event:
    return Event(
        index=doc["index"],
        actor=doc["actor"],
        action=action_from_json(doc["action"]),
        observation=observation_from_json(doc["observation"]),
    )


def _dumps(doc: dict[str, Any]) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True)


def trajectory_to_lines(trajectory: Trajectory) -> list[str]:
    header = {
        "kind": "trajectory_header",
        "task_id": trajectory.task_id,
        "trial_index": trajectory.trial_index,
    }
    footer = {
        "kind": "trajectory_end",
        "stop_reason": trajectory.stop_reason,
        "final_world_hashes": trajectory.final_world_hashes,
    }
    return (
        [_dumps(header)]
        + [_dumps(event_to_json(e)) for e in trajectory.events]
        + [_dumps(footer)]
    )


def trajectory_from_lines(lines: Sequence[str]) -> Trajectory:
    header = json.loads(lines[0])
    footer = json.loads(lines[-1])
    if header.get("kind") != "trajectory_header" or footer.get("kind") != "trajectory_end":
        raise ValueError("not a trajectory file (missing header/footer lines)")
    events = [event_from_json(json.loads(line)) for line in lines[1:-1]]
    return Trajectory(
        task_id=header["task_id"],
        trial_index=header["trial_index"],
        events=events,
        stop_reason=footer["stop_reason"],
        final_world_hashes=footer["final_world_hashes"],
    )


def sanitize_task_id(task_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.|-]+", "-", task_id).strip("-")


class RunStore:
    """Append-only store rooted at one directory; one subdirectory per run."""

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def list_runs(self) -> list[str]:
        return sorted(
            p.name for p in self.root.iterdir() if (p / "manifest.json").exists()
        )

    def write_manifest(self, manifest: RunManifest) -> Path:
        run_dir = self.run_dir(manifest.run_id)
        run_dir.mkdir(parents=True, exist_ok=True)
        path = run_dir / "manifest.json"
        if path.exists():
            raise FileExistsError(f"manifest already written for run {manifest.run_id}")
        path.write_text(json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n")
        return path

    def read_manifest(self, run_id: str) -> RunManifest:
        doc = json.loads((self.run_dir(run_id) / "manifest.json").read_text())
        return RunManifest(**doc)

    def trajectory_path(self, run_id: str, task_id: str, trial_index: int) -> Path:
        name = f"{sanitize_task_id(task_id)}__trial{trial_index}.jsonl"
        return self.run_dir(run_id) / "trajectories" / name

    def write_trajectory(self, run_id: str, trajectory: Trajectory) -> Path:
        path = self.trajectory_path(run_id, trajectory.task_id, trajectory.trial_index)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(trajectory_to_lines(trajectory)) + "\n")
        return path

    def read_trajectory(self, run_id: str, task_id: str, trial_index: int) -> Trajectory:
        path = self.trajectory_path(run_id, task_id, trial_index)
        lines = path.read_text().splitlines()
        return trajectory_from_lines(lines)

    def list_trajectories(self, run_id: str) -> list[Path]:
        directory = self.run_dir(run_id) / "trajectories"
        if not directory.exists():
            return []
        return sorted(directory.glob("*.jsonl"))

    def write_results(self, run_id: str, records: Sequence[TrialRecord]) -> Path:
        path = self.run_dir(run_id) / "results.jsonl"
        lines = []
        for r in records:
            doc = asdict(r)
            doc["criteria"] = [asdict(c) for c in r.criteria]
            lines.append(_dumps(doc))
        path.write_text("\n".join(lines) + ("\n" if lines else ""))
        return path

    def read_results(self, run_id: str) -> list[TrialRecord]:
        path = self.run_dir(run_id) / "results.jsonl"
        records = []
        for line in path.read_text().splitlines():
            doc = json.loads(line)
            doc["criteria"] = tuple(CriterionResult(**c) for c in doc["criteria"])
            records.append(TrialRecord(**doc))
        return records

    def write_pass_k(self, run_id: str, values: Sequence[float]) -> Path:
        path = self.run_dir(run_id) / "pass_k.json"
        doc = {f"pass^{k}": v for k, v in enumerate(values, start=1)}
        path.write_text(json.dumps(doc, indent=2) + "\n")
        return path

    def write_tables(self, run_id: str, rows: Sequence[BreakdownRow]) -> Path:
        path = self.run_dir(run_id) / "tables.csv"
        path.write_text(rows_to_csv(rows))
        return path

    def write_trial_table(self, run_id: str, table_csv: str) -> Path:
        path = self.run_dir(run_id) / "trials.csv"
        path.write_text(table_csv)
        return path


@dataclass
class ReplayResult:
    task_id: str
    trial_index: int
    ok: bool
    expected_hashes: dict[str, str]
    replayed_hashes: dict[str, str]
    detail: str = ""


def replay_trajectory(
    trajectory: Trajectory, task: CompositeTask, env: Environment, mode: str = "default"
) -> ReplayResult:
    """Re-execute the stored tool calls from the initialized seed world and
    compare final hashes with the recorded ones (replay determinism)."""
    from .orchestrator import grant_union_registry

    apply_init(env, list(task.init_actions))
    if mode == "no_user":
        grant_union_registry(env)
    for event in trajectory.events:
        if isinstance(event.action, ToolCall) and event.action.name != "__policy_error__":
            execute_tool(env, event.actor, event.action)
    replayed = env.world.hashes()
    ok = replayed == trajectory.final_world_hashes
    return ReplayResult(
        task_id=trajectory.task_id,
        trial_index=trajectory.trial_index,
        ok=ok,
        expected_hashes=trajectory.final_world_hashes,
        replayed_hashes=replayed,
        detail="hashes match" if ok else "final database hashes differ from recording",
    )
