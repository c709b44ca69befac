"""Turn-taking simulation loop over two policies and the shared environment.

Control rules: the agent opens; a tool call returns its observation to the
caller, who keeps acting; a message hands control to the other player. The
loop ends on a user stop/transfer token, an agent stop (no-user mode), the
step cap, or too many consecutive errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

from .engine import ConfigurationError, Environment, apply_init, step, to_chat_tool_declarations
from .prompts import (
    GROUND_TRUTH_NOTE,
    NO_USER_NOTE,
    STOP_TOKEN,
    TRANSFER_TOKEN,
    agent_instructions,
)
from .tasks import CompositeTask, render_ticket, render_user_instructions
from .world import (
    AGENT,
    USER,
    Action,
    Event,
    GlobalState,
    Message,
    ToolCall,
    ToolResult,
    append_event,
    other_player,
)

MODES = ("default", "no_user", "ground_truth")

STOP_REASONS = ("user_stop", "user_transfer", "agent_stop", "max_steps", "error_limit")


@dataclass(frozen=True)
class RunConfig:
    max_steps: int = 200
    max_consecutive_errors: int = 3
    seed: int = 0
    trials_per_task: int = 4
    mode: str = "default"

    def __post_init__(self) -> None:
        if self.max_steps <= 0 or self.max_consecutive_errors <= 0 or self.trials_per_task <= 0:
            raise ConfigurationError("run config counts must be positive")
        if self.mode not in MODES:
            raise ConfigurationError(f"unknown mode: {self.mode!r}")


@dataclass(frozen=True)
class PolicyView:
    role: str
    instructions: str
    tool_specs: tuple
    visible_history: tuple[Event, ...]


class Policy(Protocol):
    def decide(self, view: PolicyView) -> Action: ...


PolicyFactory = Callable[[CompositeTask, Environment, RunConfig], Policy]


class PolicyError(Exception):
    """The policy produced no usable action (unparsable output, transport failure)."""


@dataclass
class Trajectory:
    task_id: str
    trial_index: int
    events: list[Event]
    stop_reason: str
    final_world_hashes: dict[str, str]


def grant_union_registry(env: Environment) -> None:
    """No-user mode: the agent executes the user's tools as well."""
    env.tools = {**env.tools, AGENT: {**env.tools[AGENT], **env.tools[USER]}}


def detect_stop(message_text: str) -> str:
    """Scan a user message for stop tokens; transfer wins if both appear."""
    if TRANSFER_TOKEN in message_text:
        return "transfer"
    if STOP_TOKEN in message_text:
        return "stop"
    return "none"


def visible_events(role: str, history: list[Event]) -> tuple[Event, ...]:
    """Events a role may see: its own, plus the other player's messages."""
    return tuple(
        ev for ev in history if ev.actor == role or isinstance(ev.action, Message)
    )


def build_view(
    role: str,
    task: CompositeTask,
    mode: str,
    history: list[Event],
    env: Environment,
) -> PolicyView:
    if mode not in MODES:
        raise ConfigurationError(f"unknown mode: {mode!r}")
    if role == AGENT:
        parts = [agent_instructions()]
        if mode == "no_user":
            parts.append(NO_USER_NOTE)
            parts.append(f"Ticket:\n{render_ticket(task)}")
        if mode == "ground_truth":
            plan = "\n".join(
                f"{i + 1}. {a.requestor}: {a.name}({', '.join(f'{k}={v!r}' for k, v in a.args.items())})"
                for i, a in enumerate(task.evaluation.expected_actions)
            )
            parts.append(GROUND_TRUTH_NOTE)
            parts.append(f"Known solution actions:\n{plan}")
        specs = env.specs(AGENT)
        if mode == "no_user":
            specs = specs + env.specs(USER)
        return PolicyView(
            role=AGENT,
            instructions="\n\n".join(parts),
            tool_specs=tuple(specs),
            visible_history=visible_events(AGENT, history),
        )
    if role == USER:
        from .prompts import USER_SIMULATOR_GUIDELINES

        instructions = USER_SIMULATOR_GUIDELINES + "\n" + render_user_instructions(task)
        return PolicyView(
            role=USER,
            instructions=instructions,
            tool_specs=tuple(env.specs(USER)),
            visible_history=visible_events(USER, history),
        )
    raise ConfigurationError(f"unknown role: {role!r}")


def run_simulation(
    task: CompositeTask,
    agent_policy: Policy,
    user_policy: Policy | None,
    env: Environment,
    config: RunConfig,
    trial_index: int = 0,
    apply_task_init: bool = True,
    state: GlobalState | None = None,
) -> Trajectory:
    """Run one conversation to termination and record the full trajectory."""
    mode = config.mode
    if mode != "no_user" and user_policy is None:
        raise ConfigurationError(f"mode {mode!r} requires a user policy")
    if apply_task_init:
        apply_init(env, list(task.init_actions))
    if mode == "no_user":
        grant_union_registry(env)
    if state is None:
        state = GlobalState(env.world, [])
    turn = AGENT
    consecutive_errors = 0
    stop_reason = "max_steps"

    for _ in range(config.max_steps):
        policy = agent_policy if turn == AGENT else user_policy
        assert policy is not None
        view = build_view(turn, task, mode, state.history, env)
        try:
            action = policy.decide(view)
        except PolicyError as exc:
            # Recorded as an error observation delivered back to the same
            # policy; the offender keeps the turn.
            error_event = Event(
                index=len(state.history),
                actor=turn,
                action=ToolCall("__policy_error__", {"detail": str(exc)}),
                observation=ToolResult(f"invalid policy output: {exc}", is_error=True),
            )
            append_event(state, error_event)
            consecutive_errors += 1
            if consecutive_errors >= config.max_consecutive_errors:
                stop_reason = "error_limit"
                break
            continue

        obs = step(state, env, turn, action)
        if isinstance(obs, ToolResult) and obs.is_error:
            consecutive_errors += 1
            if consecutive_errors >= config.max_consecutive_errors:
                stop_reason = "error_limit"
                break
            continue
        consecutive_errors = 0

        if isinstance(action, Message):
            token = detect_stop(action.text)
            if turn == USER and token == "stop":
                stop_reason = "user_stop"
                break
            if turn == USER and token == "transfer":
                stop_reason = "user_transfer"
                break
            if turn == AGENT and mode == "no_user":
                if token == "stop":
                    stop_reason = "agent_stop"
                    break
                continue  # nobody to hand control to
            turn = other_player(turn)

    return Trajectory(
        task_id=task.id,
        trial_index=trial_index,
        events=state.history,
        stop_reason=stop_reason,
        final_world_hashes=env.world.hashes(),
    )


def run_trials(
    task: CompositeTask,
    make_agent: PolicyFactory,
    make_user: PolicyFactory | None,
    make_env: Callable[[], Environment],
    config: RunConfig,
) -> list[Trajectory]:
    """Independent trials on fresh environments with freshly instantiated policies."""
    trajectories = []
    for trial in range(config.trials_per_task):
        env = make_env()
        trial_config = replace(config, seed=config.seed + trial)
        agent = make_agent(task, env, trial_config)
        user = make_user(task, env, trial_config) if make_user is not None else None
        trajectories.append(
            run_simulation(task, agent, user, env, trial_config, trial_index=trial)
        )
    return trajectories
