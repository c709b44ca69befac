"""Shared world state: players, actions, observations, event history, hashing.

The global state is the pair (world, history): two database trees plus an
append-only log of everything both players did and observed. Databases are
plain JSON-like dict trees so they can be canonically serialized and hashed
for replay/equality checks.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from typing import Any, Final

AGENT: Final = "agent"
USER: Final = "user"
PLAYERS: Final = (AGENT, USER)

# The digest recorded in run manifests; stored hashes are only comparable
# across runs that agree on this.
HASH_ALGORITHM: Final = "sha256"

Database = dict[str, Any]


class ContractViolation(Exception):
    """An operation was called outside its contract (harness bug, not in-band)."""


class EncodingError(Exception):
    """A database value cannot be canonically serialized."""


def other_player(player: str) -> str:
    if player == AGENT:
        return USER
    if player == USER:
        return AGENT
    raise ContractViolation(f"unknown player: {player!r}")


@dataclass(frozen=True)
class ToolCall:
    name: str
    args: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.name:
            raise ContractViolation("tool call name must be a non-empty identifier")


@dataclass(frozen=True)
class Message:
    text: str


Action = ToolCall | Message


@dataclass(frozen=True)
class ToolResult:
    payload: Any
    is_error: bool = False

    def render(self) -> str:
        """Human-readable form; structured payloads print as indented JSON."""
        if isinstance(self.payload, str):
            return self.payload
        return json.dumps(self.payload, indent=4, default=str)


@dataclass(frozen=True)
class IncomingMessage:
    from_player: str
    text: str


Observation = ToolResult | IncomingMessage


@dataclass(frozen=True)
class Event:
    """One interaction event. Ordering is by index only; no wall-clock time."""

    index: int
    actor: str
    action: Action
    observation: Observation | None = None


@dataclass
class WorldState:
    agent_db: Database
    user_db: Database

    def copy(self) -> "WorldState":
        return WorldState(copy.deepcopy(self.agent_db), copy.deepcopy(self.user_db))

    def hashes(self) -> dict[str, str]:
        return {"agent_db": state_hash(self.agent_db), "user_db": state_hash(self.user_db)}


@dataclass
class GlobalState:
    world: WorldState
    history: list[Event] = field(default_factory=list)


def append_event(state: GlobalState, event: Event) -> GlobalState:
    """Append one event; the index must equal the current history length."""
    if event.index != len(state.history):
        raise ContractViolation(
            f"event index {event.index} does not match history length {len(state.history)}"
        )
    state.history.append(event)
    return state


def _canonical_value(value: Any) -> Any:
    """Normalize a database value tree for order-independent serialization.

    Map keys sort lexicographically (json handles that); floats with no
    fractional part collapse to ints so 2.0 and 2 hash identically.
    """
    if value is None or isinstance(value, (str, bool, int)):
        return value
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise EncodingError(f"non-finite number not serializable: {value!r}")
        return int(value) if value.is_integer() else value
    if isinstance(value, dict):
        out = {}
        for key, item in value.items():
            if not isinstance(key, str):
                raise EncodingError(f"map keys must be strings, got {key!r}")
            out[key] = _canonical_value(item)
        return out
    if isinstance(value, (list, tuple)):
        return [_canonical_value(item) for item in value]
    raise EncodingError(f"value of type {type(value).__name__} is not serializable")


def canonical_serialize(db: Database) -> bytes:
    """Stable byte form of a database: sorted keys, explicit nulls, no NaN."""
    return json.dumps(
        _canonical_value(db), sort_keys=True, separators=(",", ":"), ensure_ascii=True
    ).encode("utf-8")


def state_hash(db: Database) -> str:
    """Fixed-width hex digest of the canonical form (HASH_ALGORITHM)."""
    return hashlib.sha256(canonical_serialize(db)).hexdigest()
