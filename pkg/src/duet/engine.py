"""Tool registries and the transition function over the shared world.

Each player owns a set of typed tools. Executing an action either runs a
tool against the world (returning a ToolResult to the caller) or delivers a
message to the other player. All tool failures are in-band error
observations; the engine never raises for unknown or malformed calls.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .world import (
    AGENT,
    USER,
    Action,
    ContractViolation,
    Event,
    GlobalState,
    IncomingMessage,
    Message,
    Observation,
    ToolCall,
    ToolResult,
    WorldState,
    append_event,
    other_player,
)


class DomainError(Exception):
    """In-band domain failure (e.g. unknown customer id); becomes an error observation."""


class ConfigurationError(Exception):
    """Malformed task/domain configuration; aborts instead of producing observations."""


@dataclass(frozen=True)
class ToolParam:
    name: str
    type: str = "string"  # string | number | integer | boolean
    required: bool = True
    description: str = ""


@dataclass(frozen=True)
class ToolSpec:
    name: str
    owner: str
    kind: str  # read | write
    params: tuple[ToolParam, ...] = ()
    doc: str = ""


# A tool implementation receives the whole world (cross-database reads are
# allowed; writes must stay within the owner's database for player tools).
ToolImpl = Callable[..., Any]
InitImpl = Callable[..., None]
AssertionImpl = Callable[..., bool]


@dataclass(frozen=True)
class BoundTool:
    spec: ToolSpec
    impl: ToolImpl


@dataclass(frozen=True)
class InitCall:
    name: str
    env: str  # which database the function mutates: agent | user
    args: dict[str, Any] = field(default_factory=dict)


@dataclass
class Environment:
    """A world plus both players' tool registries and privileged init/assert functions."""

    world: WorldState
    tools: dict[str, dict[str, BoundTool]]  # player -> name -> tool
    inits: dict[str, tuple[str, InitImpl]]  # name -> (env type, impl)
    assertions: dict[str, AssertionImpl]
    init_log: list[InitCall] = field(default_factory=list)

    def specs(self, player: str) -> list[ToolSpec]:
        return [bound.spec for bound in self.tools[player].values()]


@dataclass
class EnvSnapshot:
    world: WorldState
    init_log: list[InitCall]


_JSON_TYPES = {
    "string": str,
    "number": (int, float),
    "integer": int,
    "boolean": bool,
}


def _validate_args(spec: ToolSpec, args: dict[str, Any]) -> str | None:
    declared = {p.name: p for p in spec.params}
    for name in args:
        if name not in declared:
            return f"invalid arguments: unexpected argument '{name}'"
    for param in spec.params:
        if param.name not in args:
            if param.required:
                return f"invalid arguments: missing required argument '{param.name}'"
            continue
        value = args[param.name]
        expected = _JSON_TYPES.get(param.type, str)
        if isinstance(value, bool) and param.type in ("number", "integer"):
            return f"invalid arguments: '{param.name}' must be a {param.type}"
        if not isinstance(value, expected):
            return f"invalid arguments: '{param.name}' must be a {param.type}"
    return None


def execute_tool(env: Environment, actor: str, call: ToolCall) -> Observation:
    """Run one tool call; failures come back as error observations, never exceptions."""
    bound = env.tools.get(actor, {}).get(call.name)
    if bound is None:
        owned_elsewhere = any(call.name in reg for reg in env.tools.values())
        if owned_elsewhere:
            return ToolResult(f"not permitted: '{call.name}' is not a {actor} tool", is_error=True)
        return ToolResult(f"unknown tool: '{call.name}'", is_error=True)
    problem = _validate_args(bound.spec, call.args)
    if problem is not None:
        return ToolResult(problem, is_error=True)
    try:
        payload = bound.impl(env.world, **call.args)
    except DomainError as exc:
        return ToolResult(str(exc), is_error=True)
    return ToolResult(payload)


def step(state: GlobalState, env: Environment, actor: str, action: Action) -> Observation:
    """Apply one player action, append the event, and return the observation.

    A tool call observes its own result; a message is observed by the other
    player as an IncomingMessage.
    """
    if actor not in env.tools:
        raise ContractViolation(f"unknown actor: {actor!r}")
    if isinstance(action, ToolCall):
        obs: Observation = execute_tool(env, actor, action)
    elif isinstance(action, Message):
        obs = IncomingMessage(from_player=actor, text=action.text)
    else:
        raise ContractViolation(f"unknown action type: {type(action).__name__}")
    append_event(state, Event(index=len(state.history), actor=actor, action=action, observation=obs))
    return obs


def apply_init(env: Environment, actions: list[InitCall]) -> Environment:
    """Run privileged setup calls in order; recorded in the preamble, not the history."""
    for call in actions:
        entry = env.inits.get(call.name)
        if entry is None:
            raise ConfigurationError(f"unknown init function: '{call.name}'")
        env_type, impl = entry
        if call.env != env_type:
            raise ConfigurationError(
                f"init function '{call.name}' targets the {env_type} environment, not {call.env}"
            )
        try:
            impl(env.world, **call.args)
        except TypeError as exc:
            raise ConfigurationError(f"bad arguments for init '{call.name}': {exc}") from exc
        env.init_log.append(call)
    return env


def snapshot(env: Environment) -> EnvSnapshot:
    return EnvSnapshot(world=env.world.copy(), init_log=list(env.init_log))


def restore(env: Environment, snap: EnvSnapshot) -> Environment:
    env.world = snap.world.copy()
    env.init_log = list(snap.init_log)
    return env


def evaluate_assertion(env: Environment, state: GlobalState, function: str, args: dict[str, Any]) -> bool:
    impl = env.assertions.get(function)
    if impl is None:
        raise ConfigurationError(f"unknown assertion function: '{function}'")
    return bool(impl(state, **args))


def to_chat_tool_declaration(spec: ToolSpec) -> dict[str, Any]:
    """Export one spec in the chat-completion tool-declaration wire format."""
    properties = {
        p.name: {"type": p.type, "description": p.description} for p in spec.params
    }
    required = [p.name for p in spec.params if p.required]
    return {
        "type": "function",
        "function": {
            "name": spec.name,
            "description": spec.doc,
            "parameters": {
                "type": "object",
                "properties": properties,
                "required": required,
            },
        },
    }


def to_chat_tool_declarations(specs: list[ToolSpec]) -> list[dict[str, Any]]:
    return [to_chat_tool_declaration(s) for s in specs]
