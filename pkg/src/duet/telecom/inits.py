"""Privileged initialization functions for telecom tasks.

These are not player tools: tasks use them to break the world into the
configured defect state before the conversation starts. They may touch
either database.
"""

from __future__ import annotations

from ..engine import ConfigurationError, InitImpl
from ..world import WorldState
from .agent_tools import CURRENT_DATE


def set_user_info(world: WorldState, name: str, phone_number: str) -> None:
    world.user_db["user_name"] = name
    world.user_db["user_phone_number"] = phone_number


def turn_airplane_mode_on(world: WorldState) -> None:
    world.user_db["airplane_mode"] = True


def unseat_sim_card(world: WorldState) -> None:
    # Badly seated: still physically present but unreadable until re-seated.
    world.user_db["sim"]["active"] = False


def remove_sim_card(world: WorldState) -> None:
    world.user_db["sim"]["seated"] = False


def lock_sim_with_pin(world: WorldState) -> None:
    world.user_db["sim"]["lock_state"] = "pin_locked"


def turn_mobile_data_off(world: WorldState) -> None:
    world.user_db["mobile_data_enabled"] = False


def turn_data_roaming_off(world: WorldState) -> None:
    world.user_db["data_roaming_enabled"] = False


def turn_phone_off(world: WorldState) -> None:
    world.user_db["powered_on"] = False


def set_user_abroad(world: WorldState) -> None:
    world.user_db["abroad"] = True


def connect_to_wifi(world: WorldState) -> None:
    world.user_db["wifi_radio"] = True
    world.user_db["wifi_connected"] = True


def break_apn_settings(world: WorldState) -> None:
    world.user_db["apn_mms_correct"] = False


def _line(world: WorldState, line_id: str) -> dict:
    line = world.agent_db["lines"].get(line_id)
    if line is None:
        raise ConfigurationError(f"init references unknown line: {line_id}")
    return line


def set_line_roaming(world: WorldState, line_id: str, enabled: bool) -> None:
    _line(world, line_id)["roaming_enabled"] = enabled


def suspend_user_line(world: WorldState, line_id: str) -> None:
    line = _line(world, line_id)
    line["status"] = "Suspended"
    line["suspension_start_date"] = CURRENT_DATE


def set_data_used(world: WorldState, line_id: str, gb: float) -> None:
    _line(world, line_id)["data_used_gb"] = gb


def init_registry() -> dict[str, tuple[str, InitImpl]]:
    user = lambda fn: ("user", fn)
    agent = lambda fn: ("agent", fn)
    return {
        "set_user_info": user(set_user_info),
        "turn_airplane_mode_on": user(turn_airplane_mode_on),
        "unseat_sim_card": user(unseat_sim_card),
        "remove_sim_card": user(remove_sim_card),
        "lock_sim_with_pin": user(lock_sim_with_pin),
        "turn_mobile_data_off": user(turn_mobile_data_off),
        "turn_data_roaming_off": user(turn_data_roaming_off),
        "turn_phone_off": user(turn_phone_off),
        "set_user_abroad": user(set_user_abroad),
        "connect_to_wifi": user(connect_to_wifi),
        "break_apn_settings": user(break_apn_settings),
        "set_line_roaming": agent(set_line_roaming),
        "suspend_user_line": agent(suspend_user_line),
        "set_data_used": agent(set_data_used),
    }
