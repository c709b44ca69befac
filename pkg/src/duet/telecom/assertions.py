"""Task assertion library: pure predicates over the global state.

Assertion names and argument spellings are part of the task-file format, so
they must stay stable (e.g. assert_service_status / expected_status).
"""

from __future__ import annotations

from ..engine import AssertionImpl, ConfigurationError
from ..world import AGENT, GlobalState, ToolCall, ToolResult
from .status import CONNECTION_STATES, DATA_SPEEDS, derive_network_status

LINE_STATUSES = ("Active", "Suspended", "Pending", "Closed")


def assert_service_status(state: GlobalState, expected_status: str) -> bool:
    if expected_status not in CONNECTION_STATES:
        raise ConfigurationError(f"unknown expected_status: {expected_status!r}")
    return derive_network_status(state.world).cellular_connection == expected_status


def assert_data_speed(state: GlobalState, expected_speed: str) -> bool:
    if expected_speed not in DATA_SPEEDS:
        raise ConfigurationError(f"unknown expected_speed: {expected_speed!r}")
    return derive_network_status(state.world).data_speed == expected_speed


def assert_mms_working(state: GlobalState) -> bool:
    return derive_network_status(state.world).mms_working


def assert_line_status(state: GlobalState, line_id: str, expected_status: str) -> bool:
    if expected_status not in LINE_STATUSES:
        raise ConfigurationError(f"unknown expected_status: {expected_status!r}")
    line = state.world.agent_db["lines"].get(line_id)
    if line is None:
        raise ConfigurationError(f"assertion references unknown line: {line_id}")
    return line["status"] == expected_status


def assert_transfer_occurred(state: GlobalState) -> bool:
    for event in state.history:
        if (
            event.actor == AGENT
            and isinstance(event.action, ToolCall)
            and event.action.name == "transfer_to_human"
            and isinstance(event.observation, ToolResult)
            and not event.observation.is_error
        ):
            return True
    return False


def assertion_registry() -> dict[str, AssertionImpl]:
    return {
        "assert_service_status": assert_service_status,
        "assert_data_speed": assert_data_speed,
        "assert_mms_working": assert_mms_working,
        "assert_line_status": assert_line_status,
        "assert_transfer_occurred": assert_transfer_occurred,
    }
