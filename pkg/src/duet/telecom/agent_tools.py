"""Agent-side CRM tools: 7 read, 6 write."""

from __future__ import annotations

import copy
from typing import Any

from ..engine import BoundTool, DomainError, ToolParam, ToolSpec
from ..world import AGENT, WorldState
from .status import effective_data_remaining

# Fixed in-simulation date; nothing in the world advances real time.
CURRENT_DATE = "2025-03-01"

_PREFIX_TABLE = {"L": "lines", "D": "devices", "P": "plans", "B": "bills"}

ELIGIBILITY_ACTIONS = (
    "enable_roaming",
    "disable_roaming",
    "refuel_data",
    "suspend_line",
    "resume_line",
)


def _customer(db: dict[str, Any], customer_id: str) -> dict[str, Any]:
    customer = db["customers"].get(customer_id)
    if customer is None:
        raise DomainError(f"customer not found: {customer_id}")
    return customer


def _line(db: dict[str, Any], line_id: str) -> dict[str, Any]:
    line = db["lines"].get(line_id)
    if line is None:
        raise DomainError(f"line not found: {line_id}")
    return line


def _customer_line(db: dict[str, Any], customer_id: str, line_id: str) -> dict[str, Any]:
    customer = _customer(db, customer_id)
    if line_id not in customer["line_ids"]:
        raise DomainError(f"line {line_id} does not belong to customer {customer_id}")
    return _line(db, line_id)


def get_customer_by_phone(world: WorldState, phone_number: str) -> dict[str, Any]:
    if not phone_number:
        raise DomainError("invalid arguments: phone_number must be non-empty")
    for customer in world.agent_db["customers"].values():
        if customer["phone_number"] == phone_number:
            return copy.deepcopy(customer)
    raise DomainError(f"customer not found for phone number {phone_number}")


def get_customer_by_id(world: WorldState, customer_id: str) -> dict[str, Any]:
    return copy.deepcopy(_customer(world.agent_db, customer_id))


def get_customer_by_name_dob(world: WorldState, full_name: str, date_of_birth: str) -> dict[str, Any]:
    for customer in world.agent_db["customers"].values():
        if customer["full_name"] == full_name and customer["date_of_birth"] == date_of_birth:
            return copy.deepcopy(customer)
    raise DomainError(f"customer not found for {full_name} born {date_of_birth}")


def get_details_by_id(world: WorldState, id: str) -> dict[str, Any]:
    table = _PREFIX_TABLE.get(id[:1])
    if table is None:
        raise DomainError(f"unknown id prefix: {id!r} (expected L/D/P/B)")
    record = world.agent_db[table].get(id)
    if record is None:
        raise DomainError(f"no {table[:-1]} found with id {id}")
    return copy.deepcopy(record)


def get_bills_for_customer(world: WorldState, customer_id: str) -> list[dict[str, Any]]:
    customer = _customer(world.agent_db, customer_id)
    return [copy.deepcopy(world.agent_db["bills"][b]) for b in customer["bill_ids"]]


def get_data_usage(world: WorldState, line_id: str) -> dict[str, Any]:
    line = _line(world.agent_db, line_id)
    plan = world.agent_db["plans"][line["plan_id"]]
    return {
        "line_id": line_id,
        "plan": plan["name"],
        "data_limit_gb": plan["data_limit_gb"],
        "data_used_gb": line["data_used_gb"],
        "data_refueling_gb": line["data_refueling_gb"],
        "effective_data_remaining_gb": round(effective_data_remaining(line, plan), 3),
    }


def check_line_eligibility(world: WorldState, line_id: str, action: str) -> dict[str, Any]:
    line = _line(world.agent_db, line_id)
    if action not in ELIGIBILITY_ACTIONS:
        raise DomainError(f"unknown action: {action!r}")
    status = line["status"]
    if action == "resume_line":
        ok, reason = status == "Suspended", f"line status is {status}"
    elif action == "suspend_line":
        ok, reason = status == "Active", f"line status is {status}"
    elif action == "enable_roaming":
        ok = status == "Active" and not line["roaming_enabled"]
        reason = "roaming already enabled" if line["roaming_enabled"] else f"line status is {status}"
    elif action == "disable_roaming":
        ok = line["roaming_enabled"]
        reason = "roaming is enabled" if ok else "roaming already disabled"
    else:  # refuel_data
        ok, reason = status == "Active", f"line status is {status}"
    return {"line_id": line_id, "action": action, "eligible": ok, "reason": "eligible" if ok else reason}


def enable_roaming(world: WorldState, customer_id: str, line_id: str) -> str:
    line = _customer_line(world.agent_db, customer_id, line_id)
    line["roaming_enabled"] = True
    return f"Roaming has been enabled for line {line_id}."


def disable_roaming(world: WorldState, customer_id: str, line_id: str) -> str:
    line = _customer_line(world.agent_db, customer_id, line_id)
    line["roaming_enabled"] = False
    return f"Roaming has been disabled for line {line_id}."


def refuel_data(world: WorldState, customer_id: str, line_id: str, gb: float) -> str:
    if gb <= 0:
        raise DomainError("invalid arguments: gb must be greater than 0")
    line = _customer_line(world.agent_db, customer_id, line_id)
    if line["status"] != "Active":
        raise DomainError(f"line {line_id} is not Active")
    line["data_refueling_gb"] = round(line["data_refueling_gb"] + gb, 3)
    return f"Refueled {gb} GB on line {line_id}. Extra data this cycle: {line['data_refueling_gb']} GB."


def suspend_line(world: WorldState, customer_id: str, line_id: str) -> str:
    line = _customer_line(world.agent_db, customer_id, line_id)
    if line["status"] != "Active":
        raise DomainError(f"line {line_id} is not Active (status: {line['status']})")
    line["status"] = "Suspended"
    line["suspension_start_date"] = CURRENT_DATE
    return f"Line {line_id} has been suspended."


def resume_line(world: WorldState, customer_id: str, line_id: str) -> str:
    line = _customer_line(world.agent_db, customer_id, line_id)
    if line["status"] != "Suspended":
        raise DomainError(f"line {line_id} is not Suspended (status: {line['status']})")
    line["status"] = "Active"
    line["suspension_start_date"] = None
    return f"Line {line_id} has been resumed and is now Active."


def transfer_to_human(world: WorldState, summary: str) -> str:
    # The transfer itself is evidenced by this call appearing in the history.
    return f"Transfer to a human specialist has been initiated. Case summary: {summary}"


def agent_tool_registry() -> dict[str, BoundTool]:
    def spec(name: str, kind: str, doc: str, *params: ToolParam) -> ToolSpec:
        return ToolSpec(name=name, owner=AGENT, kind=kind, params=tuple(params), doc=doc)

    p = ToolParam
    entries = [
        (
            spec(
                "get_customer_by_phone", "read",
                "Look up the full customer record by the phone number on the account.",
                p("phone_number", description="Phone number, e.g. 555-123-2002"),
            ),
            get_customer_by_phone,
        ),
        (
            spec(
                "get_customer_by_id", "read",
                "Look up the full customer record by customer id.",
                p("customer_id", description="Customer id, e.g. C1001"),
            ),
            get_customer_by_id,
        ),
        (
            spec(
                "get_customer_by_name_dob", "read",
                "Look up a customer by exact full name and date of birth (YYYY-MM-DD).",
                p("full_name"), p("date_of_birth"),
            ),
            get_customer_by_name_dob,
        ),
        (
            spec(
                "get_details_by_id", "read",
                "Fetch a line (L...), device (D...), plan (P...) or bill (B...) record by id.",
                p("id", description="Entity id with L/D/P/B prefix"),
            ),
            get_details_by_id,
        ),
        (
            spec(
                "get_bills_for_customer", "read",
                "List all bills on a customer's account.",
                p("customer_id"),
            ),
            get_bills_for_customer,
        ),
        (
            spec(
                "get_data_usage", "read",
                "Report plan limit, usage and remaining data for a line.",
                p("line_id"),
            ),
            get_data_usage,
        ),
        (
            spec(
                "check_line_eligibility", "read",
                "Check whether an account action can be applied to a line right now.",
                p("line_id"),
                p("action", description="One of: " + ", ".join(ELIGIBILITY_ACTIONS)),
            ),
            check_line_eligibility,
        ),
        (
            spec(
                "enable_roaming", "write",
                "Enable international roaming service on a line.",
                p("customer_id"), p("line_id"),
            ),
            enable_roaming,
        ),
        (
            spec(
                "disable_roaming", "write",
                "Disable international roaming service on a line.",
                p("customer_id"), p("line_id"),
            ),
            disable_roaming,
        ),
        (
            spec(
                "refuel_data", "write",
                "Add extra data (GB) to a line for the current billing cycle.",
                p("customer_id"), p("line_id"), p("gb", type="number"),
            ),
            refuel_data,
        ),
        (
            spec(
                "suspend_line", "write",
                "Suspend an active line.",
                p("customer_id"), p("line_id"),
            ),
            suspend_line,
        ),
        (
            spec(
                "resume_line", "write",
                "Resume a suspended line.",
                p("customer_id"), p("line_id"),
            ),
            resume_line,
        ),
        (
            spec(
                "transfer_to_human", "write",
                "Escalate the case to a human specialist with a short summary.",
                p("summary"),
            ),
            transfer_to_human,
        ),
    ]
    return {bound.spec.name: bound for bound in (BoundTool(s, f) for s, f in entries)}
