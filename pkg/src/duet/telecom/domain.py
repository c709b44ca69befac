"""Telecom domain assembly: seed world + tool registries + init/assert functions."""

from __future__ import annotations

import copy
import importlib.resources
import json
from typing import Any

from ..engine import Environment
from ..world import AGENT, USER, WorldState, state_hash
from .agent_tools import agent_tool_registry
from .assertions import assertion_registry
from .inits import init_registry
from .user_tools import user_tool_registry

DOMAIN_NAME = "telecom"

# Identity of the simulated caller; every task binds the phone to this account.
TASK_USER_NAME = "John Smith"
TASK_USER_PHONE = "555-123-2002"
TASK_CUSTOMER_ID = "C1001"
TASK_LINE_ID = "L1002"
SIM_PIN = "1234"


def _load_seed() -> dict[str, Any]:
    text = importlib.resources.files("duet.telecom").joinpath("seed_data.json").read_text()
    return json.loads(text)


_SEED = _load_seed()


def seed_world() -> WorldState:
    return WorldState(
        agent_db=copy.deepcopy(_SEED["agent_db"]),
        user_db=copy.deepcopy(_SEED["user_db"]),
    )


def seed_fixture_digests() -> dict[str, str]:
    world = seed_world()
    return {"agent_db": state_hash(world.agent_db), "user_db": state_hash(world.user_db)}


def build_environment(world: WorldState | None = None) -> Environment:
    return Environment(
        world=world if world is not None else seed_world(),
        tools={AGENT: agent_tool_registry(), USER: user_tool_registry()},
        inits=init_registry(),
        assertions=assertion_registry(),
    )
