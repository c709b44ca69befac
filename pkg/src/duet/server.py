"""HTTP API over the store and live sessions.

A session runs the normal orchestrator loop in a background thread with one
role's policy replaced by a queue fed from POST /sessions/{id}/action. State
responses only ever contain the human role's policy view, so information
hiding holds across the wire. Rewinding forks a session: recorded actions are
replayed up to the fork point, then live policies resume.
"""

from __future__ import annotations

import json
import queue
import threading
import time
import uuid
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from fastapi import Body, FastAPI, HTTPException
from fastapi.responses import HTMLResponse, StreamingResponse

from .engine import apply_init, evaluate_assertion
from .evaluation import check_env_assertions
from .orchestrator import MODES, PolicyError, PolicyView, RunConfig, run_simulation
from .policies import (
    ComplianceUser,
    NullAgent,
    OracleAgent,
    OracleUser,
)
from .store import (
    RunStore,
    action_from_json,
    event_from_json,
    event_to_json,
    trajectory_to_lines,
)
from .tasks import CompositeTask, read_suite, task_to_doc, task_to_markdown
from .telecom import build_environment
from .world import AGENT, USER, Event, GlobalState, Message, ToolCall, other_player
from .orchestrator import visible_events


@dataclass
class InterventionRecord:
    session_id: str
    parent_session_id: str
    event_index: int
    replacement_action: dict | None
    operator_note: str


class _SessionClosed(PolicyError):
    pass


class QueuePolicy:
    """Blocks the simulation loop until a human action arrives."""

    def __init__(self, session: "Session", role: str):
        self.session = session
        self.role = role
        self.inbox: "queue.Queue[Any]" = queue.Queue()
        self.consumed = 0  # actions handed to the loop so far

    def decide(self, view: PolicyView):
        with self.session.condition:
            self.session.human_blocked = True
            self.session.condition.notify_all()
        try:
            item = self.inbox.get()
        finally:
            with self.session.condition:
                self.session.human_blocked = False
                self.consumed += 1
                self.session.condition.notify_all()
        if item is None:
            raise _SessionClosed("session closed")
        return item


class ReplayThenLive:
    """Feeds recorded actions first (rewind), then delegates to a live policy.

    With advance_live set, the live policy is also consulted (and overridden)
    during replay so a deterministic scripted opponent reaches the fork point
    with its internal state in sync; queue-backed human policies must not be
    advanced this way or replay would block.
    """

    def __init__(self, recorded: list[Any], live, advance_live: bool = False):
        self.recorded = list(recorded)
        self.live = live
        self.advance_live = advance_live

    def decide(self, view: PolicyView):
        if self.recorded:
            item = self.recorded.pop(0)
            if self.advance_live:
                try:
                    self.live.decide(view)
                except PolicyError:
                    pass
            if isinstance(item, PolicyError):
                raise item
            return item
        return self.live.decide(view)


def _opponent_policy(kind: str, role: str, task: CompositeTask, env) -> Any:
    if role == AGENT:
        return NullAgent() if kind == "null" else OracleAgent(task)
    return ComplianceUser(task, env) if kind == "compliance" else OracleUser(task, env)


class Session:
    def __init__(
        self,
        session_id: str,
        task: CompositeTask,
        mode: str,
        human_role: str,
        opponent: str,
        config: RunConfig,
        parent_id: str | None = None,
        replay_events: list[Event] | None = None,
        replacement: dict | None = None,
    ):
        self.session_id = session_id
        self.task = task
        self.mode = mode
        self.human_role = human_role
        self.opponent_kind = opponent
        self.config = config
        self.parent_id = parent_id
        self.condition = threading.Condition()
        self.human_blocked = False
        self.trajectory = None
        self.error: str | None = None

        self.env = build_environment()
        apply_init(self.env, list(task.init_actions))
        self.state = GlobalState(self.env.world, [])
        self.queue_policy = QueuePolicy(self, human_role)

        live_human = self.queue_policy
        live_other = _opponent_policy(opponent, other_player(human_role), task, self.env)
        policies = {human_role: live_human, other_player(human_role): live_other}
        if replay_events:
            per_role: dict[str, list[Any]] = {AGENT: [], USER: []}
            for i, event in enumerate(replay_events):
                if isinstance(event.action, ToolCall) and event.action.name == "__policy_error__":
                    per_role[event.actor].append(PolicyError(event.action.args.get("detail", "")))
                    continue
                if replacement is not None and i == len(replay_events) - 1:
                    per_role[event.actor].append(action_from_json(replacement))
                else:
                    per_role[event.actor].append(event.action)
            policies = {
                role: ReplayThenLive(
                    per_role[role], policies[role], advance_live=role != human_role
                )
                for role in policies
            }
        self.agent_policy = policies[AGENT]
        self.user_policy = policies[USER] if mode != "no_user" else None
        self.thread = threading.Thread(target=self._run, daemon=True)

    def start(self) -> None:
        self.thread.start()

    def _run(self) -> None:
        try:
            self.trajectory = run_simulation(
                self.task,
                self.agent_policy,
                self.user_policy,
                self.env,
                self.config,
                state=self.state,
                apply_task_init=False,
            )
        except _SessionClosed:
            self.error = "closed"
        except Exception as exc:  # surfaced via the state endpoint
            self.error = f"{type(exc).__name__}: {exc}"
        with self.condition:
            self.condition.notify_all()

    @property
    def done(self) -> bool:
        return self.trajectory is not None or self.error is not None

    def awaiting(self) -> str | None:
        if self.done:
            return None
        return self.human_role if self.human_blocked else other_player(self.human_role)

    def criteria_status(self) -> list[dict[str, Any]]:
        results = check_env_assertions(
            self.state, self.task.evaluation.env_assertions, self.env
        )
        return [{"id": r.id, "kind": r.kind, "passed": r.passed, "detail": r.detail} for r in results]

    def reward(self) -> int | None:
        if not self.done:
            return None
        return int(all(c["passed"] for c in self.criteria_status()))

    def visible(self) -> list[Event]:
        return list(visible_events(self.human_role, self.state.history))

    def post_action(self, action) -> None:
        self.queue_policy.inbox.put(action)

    def close(self) -> None:
        if not self.done and self.human_blocked:
            self.queue_policy.inbox.put(None)


def _view_payload(session: Session) -> dict[str, Any]:
    from .orchestrator import build_view

    view = build_view(
        session.human_role, session.task, session.mode, session.state.history, session.env
    )
    return {
        "role": view.role,
        "instructions": view.instructions,
        "tools": [
            {
                "name": s.name,
                "kind": s.kind,
                "doc": s.doc,
                "params": [
                    {
                        "name": p.name,
                        "type": p.type,
                        "required": p.required,
                        "description": p.description,
                    }
                    for p in s.params
                ],
            }
            for s in view.tool_specs
        ],
        "visible_history": [event_to_json(e) for e in view.visible_history],
    }


def create_app(store_root: str | Path, tasks_path: str | Path) -> FastAPI:
    store = RunStore(store_root)
    domain, tasks = read_suite(tasks_path)
    tasks_by_id = {t.id: t for t in tasks}
    sessions: dict[str, Session] = {}
    interventions: list[InterventionRecord] = []
    sessions_dir = Path(store_root) / "sessions"
    sessions_dir.mkdir(parents=True, exist_ok=True)

    app = FastAPI(title="duet review API")

    def _checkpoint(session: Session) -> None:
        if session.trajectory is not None:
            lines = trajectory_to_lines(session.trajectory)
        else:
            header = {
                "kind": "trajectory_header",
                "task_id": session.task.id,
                "trial_index": 0,
            }
            lines = [json.dumps(header, sort_keys=True)] + [
                json.dumps(event_to_json(e), sort_keys=True) for e in session.state.history
            ]
        path = sessions_dir / f"{session.session_id}.jsonl"
        path.write_text("\n".join(lines) + "\n")

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok", "domain": domain}

    @app.get("/tasks")
    def list_tasks() -> list[dict[str, Any]]:
        return [
            {
                "index": i,
                "id": t.id,
                "intent": t.intent,
                "persona": t.persona,
                "n_subtasks": t.n_subtasks,
                "n_actions": t.n_actions,
                "requires_transfer": t.requires_transfer,
            }
            for i, t in enumerate(tasks)
        ]

    @app.get("/tasks/{index}")
    def get_task(index: int) -> dict[str, Any]:
        if index < 0 or index >= len(tasks):
            raise HTTPException(404, "task index out of range")
        task = tasks[index]
        return {"index": index, "doc": task_to_doc(task), "markdown": task_to_markdown(task)}

    @app.get("/runs")
    def list_runs() -> list[dict[str, Any]]:
        out = []
        for run_id in store.list_runs():
            manifest = store.read_manifest(run_id)
            out.append(
                {
                    "run_id": run_id,
                    "mode": manifest.mode,
                    "domain": manifest.domain,
                    "policy_ids": manifest.policy_ids,
                    "n_trajectories": len(store.list_trajectories(run_id)),
                }
            )
        return out

    @app.get("/runs/{run_id}/trajectories")
    def list_run_trajectories(run_id: str) -> list[dict[str, Any]]:
        paths = store.list_trajectories(run_id)
        if not paths and run_id not in store.list_runs():
            raise HTTPException(404, f"unknown run: {run_id}")
        out = []
        for path in paths:
            header = json.loads(path.read_text().splitlines()[0])
            out.append(
                {
                    "file": path.name,
                    "task_id": header.get("task_id"),
                    "trial_index": header.get("trial_index"),
                }
            )
        return out

    @app.get("/runs/{run_id}/trajectories/{name}")
    def get_trajectory(run_id: str, name: str) -> dict[str, Any]:
        path = store.run_dir(run_id) / "trajectories" / name
        if not path.exists():
            raise HTTPException(404, "trajectory not found")
        header: dict[str, Any] | None = None
        footer: dict[str, Any] | None = None
        events: list[dict[str, Any]] = []
        malformed: list[dict[str, Any]] = []
        for line_no, line in enumerate(path.read_text().splitlines()):
            try:
                doc = json.loads(line)
                kind = doc.get("kind")
                if kind == "trajectory_header":
                    header = doc
                elif kind == "trajectory_end":
                    footer = doc
                else:
                    # Round-trip to validate; malformed lines go to the error list.
                    events.append(event_to_json(event_from_json(doc)))
            except Exception as exc:
                malformed.append({"line": line_no, "error": str(exc), "raw": line[:200]})
        return {"header": header, "events": events, "footer": footer, "malformed": malformed}

    @app.get("/runs/{run_id}/results")
    def get_results(run_id: str) -> list[dict[str, Any]]:
        try:
            records = store.read_results(run_id)
        except FileNotFoundError:
            raise HTTPException(404, "no results for run")
        out = []
        for r in records:
            doc = asdict(r)
            doc["criteria"] = [asdict(c) for c in r.criteria]
            out.append(doc)
        return out

    @app.post("/sessions")
    def start_session(body: dict = Body(...)) -> dict[str, Any]:
        task_id = body.get("task_id")
        mode = body.get("mode", "default")
        human_role = body.get("human_role", "user")
        opponent = body.get("opponent_policy", "oracle")
        if task_id not in tasks_by_id:
            raise HTTPException(404, f"unknown task: {task_id}")
        if mode not in MODES:
            raise HTTPException(422, f"unknown mode: {mode}")
        if human_role not in (AGENT, USER):
            raise HTTPException(422, f"unknown role: {human_role}")
        config = RunConfig(
            mode=mode,
            max_steps=int(body.get("max_steps", 200)),
            max_consecutive_errors=int(body.get("max_consecutive_errors", 3)),
        )
        session_id = uuid.uuid4().hex[:12]
        session = Session(session_id, tasks_by_id[task_id], mode, human_role, opponent, config)
        sessions[session_id] = session
        session.start()
        _wait_for_turn_or_done(session)
        return {"session_id": session_id}

    def _get_session(session_id: str) -> Session:
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session: {session_id}")
        return session

    def _wait_for_turn_or_done(
        session: Session, after_consumed: int | None = None, timeout: float = 10.0
    ) -> None:
        """Block until the human holds the turn again (or the session ended).

        When `after_consumed` is given, a stale pre-action turn does not count:
        the loop must first consume that many actions.
        """
        deadline = time.monotonic() + timeout
        with session.condition:
            while not session.done:
                settled = session.human_blocked and (
                    after_consumed is None or session.queue_policy.consumed > after_consumed
                )
                if settled:
                    break
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                session.condition.wait(remaining)

    def _session_state(session: Session) -> dict[str, Any]:
        return {
            "session_id": session.session_id,
            "task_id": session.task.id,
            "mode": session.mode,
            "human_role": session.human_role,
            "parent_session_id": session.parent_id,
            "done": session.done,
            "error": session.error,
            "stop_reason": session.trajectory.stop_reason if session.trajectory else None,
            "awaiting": session.awaiting(),
            "your_turn": session.awaiting() == session.human_role,
            "event_count": len(session.state.history),
            "criteria": session.criteria_status(),
            "reward": session.reward(),
            "view": _view_payload(session),
        }

    @app.get("/sessions")
    def list_sessions() -> list[dict[str, Any]]:
        return [
            {
                "session_id": s.session_id,
                "task_id": s.task.id,
                "human_role": s.human_role,
                "done": s.done,
                "parent_session_id": s.parent_id,
            }
            for s in sessions.values()
        ]

    @app.get("/sessions/{session_id}")
    def get_session_state(session_id: str) -> dict[str, Any]:
        return _session_state(_get_session(session_id))

    @app.post("/sessions/{session_id}/action")
    def post_human_action(session_id: str, body: dict = Body(...)) -> dict[str, Any]:
        session = _get_session(session_id)
        if session.done:
            raise HTTPException(409, "session is over")
        if not session.human_blocked:
            raise HTTPException(409, "not your turn")
        try:
            action = action_from_json(body["action"])
        except (KeyError, ValueError) as exc:
            raise HTTPException(422, f"bad action: {exc}")
        before = session.queue_policy.consumed
        session.post_action(action)
        _wait_for_turn_or_done(session, after_consumed=before)
        _checkpoint(session)
        return _session_state(session)

    @app.post("/sessions/{session_id}/rewind")
    def rewind(session_id: str, body: dict = Body(...)) -> dict[str, Any]:
        session = _get_session(session_id)
        try:
            index = int(body["event_index"])
        except (KeyError, ValueError):
            raise HTTPException(422, "event_index required")
        history = list(session.state.history)
        if index < 0 or index > len(history):
            raise HTTPException(422, f"event_index out of range (0..{len(history)})")
        replacement = body.get("replacement_action")
        prefix = history[:index]
        if replacement is not None:
            if index == 0:
                raise HTTPException(422, "replacement requires at least one replayed event")
        new_id = uuid.uuid4().hex[:12]
        fork = Session(
            new_id,
            session.task,
            session.mode,
            session.human_role,
            session.opponent_kind,
            session.config,
            parent_id=session.session_id,
            replay_events=prefix,
            replacement=replacement,
        )
        sessions[new_id] = fork
        interventions.append(
            InterventionRecord(
                session_id=new_id,
                parent_session_id=session.session_id,
                event_index=index,
                replacement_action=replacement,
                operator_note=str(body.get("note", "")),
            )
        )
        (sessions_dir / "interventions.jsonl").open("a").write(
            json.dumps(asdict(interventions[-1]), sort_keys=True) + "\n"
        )
        fork.start()
        _wait_for_turn_or_done(fork)
        _checkpoint(fork)
        return {"session_id": new_id, "parent_session_id": session.session_id}

    @app.post("/sessions/{session_id}/close")
    def close_session(session_id: str) -> dict[str, Any]:
        session = _get_session(session_id)
        session.close()
        _checkpoint(session)
        return {"closed": True}

    @app.get("/sessions/{session_id}/stream")
    def stream_session(session_id: str) -> StreamingResponse:
        session = _get_session(session_id)

        def generate():
            sent = 0
            yield "event: hello\ndata: {}\n\n"
            while True:
                with session.condition:
                    session.condition.wait(0.25)
                visible = session.visible()
                while sent < len(visible):
                    payload = json.dumps(event_to_json(visible[sent]), sort_keys=True)
                    yield f"event: history\ndata: {payload}\n\n"
                    sent += 1
                if session.done:
                    state = json.dumps(
                        {
                            "stop_reason": session.trajectory.stop_reason
                            if session.trajectory
                            else None,
                            "reward": session.reward(),
                            "error": session.error,
                        }
                    )
                    yield f"event: end\ndata: {state}\n\n"
                    return

        return StreamingResponse(generate(), media_type="text/event-stream")

    ui_dist = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dist.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dist, html=True), name="ui")

    @app.get("/", response_class=HTMLResponse)
    def index() -> str:
        if ui_dist.is_dir():
            return '<html><head><meta http-equiv="refresh" content="0; url=/ui/"></head></html>'
        return "<html><body><h1>duet review API</h1><p>UI bundle not built.</p></body></html>"

    return app
