"""Derived network status: the pure coupling between phone state and CRM state.

Everything the user's phone displays (signal, data, MMS) is a deterministic
function of the phone record plus the matching line/plan in the agent
database. All user tools render through this one function so their outputs
can never drift from the world state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..engine import DomainError
from ..world import WorldState

CONNECTION_STATES = ("connected", "no_service", "searching")
DATA_SPEEDS = ("none", "slow", "excellent")
SIM_STATES = ("active", "missing", "invalid", "locked")

_SIGNAL_BARS = {"none": 0, "poor": 1, "fair": 2, "good": 3, "excellent": 4}


@dataclass(frozen=True)
class NetworkStatus:
    sim_status: str
    cellular_connection: str
    signal: str
    network_type: str
    roaming_active: bool
    data_working: bool
    data_speed: str
    mms_working: bool


def line_for_phone_number(agent_db: dict[str, Any], phone_number: str) -> dict[str, Any]:
    for line in agent_db["lines"].values():
        if line["phone_number"] == phone_number:
            return line
    raise DomainError(f"no line found for phone number {phone_number}")


def effective_data_remaining(line: dict[str, Any], plan: dict[str, Any]) -> float:
    return plan["data_limit_gb"] + line["data_refueling_gb"] - line["data_used_gb"]


def derive_network_status(world: WorldState) -> NetworkStatus:
    phone = world.user_db
    line = line_for_phone_number(world.agent_db, phone["user_phone_number"])
    plan = world.agent_db["plans"][line["plan_id"]]

    sim = phone["sim"]
    if not sim["seated"]:
        sim_status = "missing"
    elif sim["lock_state"] == "pin_locked":
        sim_status = "locked"
    elif not sim["active"]:
        sim_status = "invalid"
    else:
        sim_status = "active"

    ready = (
        phone["powered_on"]
        and not phone["airplane_mode"]
        and sim_status == "active"
        and line["status"] == "Active"
    )
    if ready and phone["abroad"] and not line["roaming_enabled"]:
        connection = "searching"  # radio is fine but no partner network will admit it
    elif ready:
        connection = "connected"
    else:
        connection = "no_service"

    roaming_active = connection == "connected" and phone["abroad"]
    signal = ("good" if roaming_active else "excellent") if connection == "connected" else "none"
    network_type = ("4G" if roaming_active else "5G") if connection == "connected" else "none"

    remaining = effective_data_remaining(line, plan)
    data_path_ok = (
        connection == "connected"
        and phone["mobile_data_enabled"]
        and (not roaming_active or phone["data_roaming_enabled"])
    )
    data_working = data_path_ok and remaining > 0
    if data_working:
        data_speed = "excellent"
    elif data_path_ok:
        data_speed = "slow"  # allowance exhausted: throttled, not cut off
    else:
        data_speed = "none"

    mms_working = (
        data_working
        and phone["apn_mms_correct"]
        and plan["mms_included"]
        and not phone["wifi_connected"]
    )
    return NetworkStatus(
        sim_status=sim_status,
        cellular_connection=connection,
        signal=signal,
        network_type=network_type,
        roaming_active=roaming_active,
        data_working=data_working,
        data_speed=data_speed,
        mms_working=mms_working,
    )


def render_status_bar(world: WorldState) -> str:
    """The phone's status bar, e.g. "[Signal 4] Excellent | 5G | [Data] Enabled | [Battery 80%]"."""
    phone = world.user_db
    if not phone["powered_on"]:
        return "[Powered Off]"
    status = derive_network_status(world)
    parts = []
    if status.cellular_connection == "connected":
        bars = _SIGNAL_BARS[status.signal]
        parts.append(f"[Signal {bars}] {status.signal.capitalize()} | {status.network_type}")
    else:
        parts.append("[No Signal]")
    if status.roaming_active:
        parts.append("[Roaming]")
    if status.data_working:
        parts.append("[Data] Enabled")
    parts.append(f"[Battery {phone['battery_percent']}%]")
    return " | ".join(parts)
