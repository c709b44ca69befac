"""Telecom subtask roster: defect groups, scenario templates, sampling quotas.

Each defect group carries one member per user intent it applies to; a
member's assertion targets its intent's goal (service connected, data speed
excellent, MMS working). Groups are ordered the way a troubleshooting run
would naturally clear them, which fixes the composite id and solution order.
"""

from __future__ import annotations

from typing import Sequence

from ..engine import InitCall
from ..tasks import (
    AssertionSpec,
    AtomicSubtask,
    ComposeConstraints,
    CompositeTask,
    ScenarioRenderer,
    SolutionCall,
    SubtaskGroup,
    SubtaskScenario,
    compose_tasks,
)
from .domain import (
    DOMAIN_NAME,
    SIM_PIN,
    TASK_CUSTOMER_ID,
    TASK_LINE_ID,
    TASK_USER_NAME,
    TASK_USER_PHONE,
)

SERVICE = "service_issue"
DATA = "mobile_data_issue"
MMS = "mms_issue"

# Exhausted-data tasks set usage to exactly the plan limit; the consented
# refuel amount then leaves headroom again.
EXHAUSTED_USAGE_GB = 10.0
REFUEL_GB = 2.0

_INTENT_ASSERT = {
    SERVICE: AssertionSpec("user", "assert_service_status", {"expected_status": "connected"}),
    DATA: AssertionSpec("user", "assert_data_speed", {"expected_speed": "excellent"}),
    MMS: AssertionSpec("user", "assert_mms_working", {}),
}

_LINE_ACTIVE_ASSERT = AssertionSpec(
    "agent", "assert_line_status", {"line_id": TASK_LINE_ID, "expected_status": "Active"}
)
_TRANSFER_ASSERT = AssertionSpec("agent", "assert_transfer_occurred", {})

_ABROAD_KNOWN = "You are currently traveling abroad."
_HOME_KNOWN = "You are currently at home in the United States."


def _user_call(name: str, **args) -> SolutionCall:
    return SolutionCall("user", name, args)


def _agent_call(name: str, **args) -> SolutionCall:
    return SolutionCall("agent", name, args)


def _user_init(name: str, **args) -> InitCall:
    return InitCall(name, "user", args)


def _agent_init(name: str, **args) -> InitCall:
    return InitCall(name, "agent", args)


def _variants(
    name: str,
    group: str,
    intents: Sequence[str],
    init: tuple[InitCall, ...],
    solution,
    scenario: SubtaskScenario = SubtaskScenario(),
    extra_asserts: tuple[AssertionSpec, ...] = (),
    base_assert: bool = True,
) -> list[AtomicSubtask]:
    """One subtask per intent; `solution` may be a tuple or a per-intent callable."""
    out = []
    for intent in intents:
        sols = solution(intent) if callable(solution) else solution
        asserts = ((_INTENT_ASSERT[intent],) if base_assert else ()) + extra_asserts
        out.append(
            AtomicSubtask(
                id=name,
                intent=intent,
                group_id=group,
                init_calls=init,
                solution_calls=tuple(sols),
                assertion_calls=asserts,
                scenario=scenario,
            )
        )
    return out


def telecom_groups() -> list[SubtaskGroup]:
    all_intents = (SERVICE, DATA, MMS)
    data_up = (DATA, MMS)

    airplane = _variants(
        "airplane_mode_on", "airplane_mode", all_intents,
        init=(_user_init("turn_airplane_mode_on"),),
        solution=(_user_call("toggle_airplane_mode"),),
    )
    sim_unseated = _variants(
        "unseat_sim_card", "sim_seating", all_intents,
        init=(_user_init("unseat_sim_card"),),
        solution=(_user_call("reseat_sim_card"),),
    )
    sim_missing = _variants(
        "sim_card_missing", "sim_seating", all_intents,
        init=(_user_init("remove_sim_card"),),
        solution=(_user_call("reseat_sim_card"),),
        scenario=SubtaskScenario(
            known_info=("Your SIM card popped out earlier and you are not sure it went back in properly.",),
        ),
    )
    sim_locked = _variants(
        "sim_pin_locked", "sim_lock", all_intents,
        init=(_user_init("lock_sim_with_pin"),),
        solution=(_user_call("unlock_sim_with_pin", pin=SIM_PIN),),
        scenario=SubtaskScenario(known_info=(f"Your SIM PIN is {SIM_PIN}.",)),
    )
    phone_off = _variants(
        "phone_powered_off", "phone_power", all_intents,
        init=(_user_init("turn_phone_off"),),
        solution=(_user_call("power_cycle"),),
        scenario=SubtaskScenario(
            known_info=("You are contacting support from your computer; the affected phone is with you.",),
        ),
    )
    line_suspended = _variants(
        "line_suspended", "line_status", all_intents,
        init=(_agent_init("suspend_user_line", line_id=TASK_LINE_ID),),
        solution=(_agent_call("resume_line", customer_id=TASK_CUSTOMER_ID, line_id=TASK_LINE_ID),),
        scenario=SubtaskScenario(
            unknown_info=("You do not know that your line was suspended.",),
        ),
        extra_asserts=(_LINE_ACTIVE_ASSERT,),
    )

    abroad_scenario = SubtaskScenario(known_info=(_ABROAD_KNOWN,))
    roaming_disabled = _variants(
        "roaming_disabled_abroad", "roaming_abroad", all_intents,
        init=(
            _user_init("set_user_abroad"),
            _agent_init("set_line_roaming", line_id=TASK_LINE_ID, enabled=False),
        ),
        solution=lambda intent: (
            (_agent_call("enable_roaming", customer_id=TASK_CUSTOMER_ID, line_id=TASK_LINE_ID),)
            if intent == SERVICE
            else (
                _agent_call("enable_roaming", customer_id=TASK_CUSTOMER_ID, line_id=TASK_LINE_ID),
                _user_call("toggle_data_roaming"),
            )
        ),
        scenario=abroad_scenario,
    )
    data_roaming_off = _variants(
        "data_roaming_disabled_abroad", "roaming_abroad", data_up,
        init=(_user_init("set_user_abroad"),),
        solution=(_user_call("toggle_data_roaming"),),
        scenario=abroad_scenario,
    )
    mobile_data_off = _variants(
        "mobile_data_off", "data_mode", data_up,
        init=(_user_init("turn_mobile_data_off"),),
        solution=(_user_call("toggle_mobile_data"),),
    )
    data_exhausted = _variants(
        "data_exhausted", "data_refuel", data_up,
        init=(_agent_init("set_data_used", line_id=TASK_LINE_ID, gb=EXHAUSTED_USAGE_GB),),
        solution=(
            _agent_call(
                "refuel_data", customer_id=TASK_CUSTOMER_ID, line_id=TASK_LINE_ID, gb=REFUEL_GB
            ),
        ),
        scenario=SubtaskScenario(
            unknown_info=("You do not know how much data you have used this cycle.",),
            instructions=(
                f"You are willing to refuel {REFUEL_GB} GB of data if necessary, "
                "but you do not want to change your mobile data plan.",
            ),
            ticket=(f"They consent to refueling up to {REFUEL_GB} GB of data if needed.",),
        ),
    )
    apn_broken = _variants(
        "apn_misconfigured", "apn_settings", (MMS,),
        init=(_user_init("break_apn_settings"),),
        solution=(_user_call("reset_apn_settings"),),
        scenario=SubtaskScenario(
            unknown_info=("You do not know what APN settings are.",),
        ),
    )
    wifi_blocking = _variants(
        "wifi_blocking_mms", "wifi_interference", (MMS,),
        init=(_user_init("connect_to_wifi"),),
        solution=(_user_call("toggle_wifi"),),
        scenario=SubtaskScenario(
            instructions=("You do not need Wi-Fi on this phone right now; turning it off is fine.",),
        ),
    )
    esim_transfer = _variants(
        "esim_transfer_request", "human_escalation", all_intents,
        init=(),
        solution=(
            _agent_call(
                "transfer_to_human",
                summary="Customer requests an eSIM transfer to a new device.",
            ),
        ),
        scenario=SubtaskScenario(
            instructions=(
                "You also recently got a new phone and want your eSIM moved to it. "
                "You understand eSIM transfers are handled by a human specialist, and "
                "you accept being transferred once your other issue is addressed.",
            ),
            ticket=(
                "They also request an eSIM transfer to a new device, which must be "
                "handled by a human specialist.",
            ),
        ),
        extra_asserts=(_TRANSFER_ASSERT,),
        base_assert=False,
    )

    def group(group_id: str, *member_lists) -> SubtaskGroup:
        members = tuple(m for lst in member_lists for m in lst)
        return SubtaskGroup(group_id=group_id, members=members)

    return [
        group("airplane_mode", airplane),
        group("sim_seating", sim_unseated, sim_missing),
        group("sim_lock", sim_locked),
        group("phone_power", phone_off),
        group("line_status", line_suspended),
        group("roaming_abroad", roaming_disabled, data_roaming_off),
        group("data_mode", mobile_data_off),
        group("data_refuel", data_exhausted),
        group("apn_settings", apn_broken),
        group("wifi_interference", wifi_blocking),
        group("human_escalation", esim_transfer),
    ]


_REASONS = {
    SERVICE: "Your phone has been showing 'No Service' for the past few hours.",
    DATA: (
        "Your mobile data is not working properly. It either stops working or is very "
        "slow. You want to fix it and get excellent internet speed on your phone. "
        "You do not have access to wifi."
    ),
    MMS: (
        "You cannot send picture messages (MMS). Regular text messages work, but "
        "photos fail to send."
    ),
}

_GOALS = {
    SERVICE: "the status bar shows that you have signal",
    DATA: "speed test returns excellent internet speed",
    MMS: "you can send a picture message successfully",
}

_PURPOSES = {
    SERVICE: "Test resolution path: No Service/Connection Issues.",
    DATA: "Test resolution path: Mobile Data Issues.",
    MMS: "Test resolution path: MMS Issues.",
}

_TICKET_LEADS = {
    SERVICE: (
        "The user is experiencing issues with their phone service. They are unable "
        "to make or receive calls, and the status bar shows 'No Service'."
    ),
    DATA: "The user's mobile data is not working or is very slow.",
    MMS: "The user cannot send picture messages (MMS), although regular texts work.",
}

_TICKET_GOALS = {
    SERVICE: "They will consider the issue resolved when the status bar shows that they have signal.",
    DATA: "They will consider the issue resolved when a speed test returns excellent internet speed.",
    MMS: "They will consider the issue resolved when a test picture message sends successfully.",
}


class TelecomRenderer(ScenarioRenderer):
    domain = DOMAIN_NAME

    def preamble_inits(self, intent, members):
        # Every task binds the phone to the scenario identity first.
        return (
            InitCall(
                "set_user_info",
                "user",
                {"name": TASK_USER_NAME, "phone_number": TASK_USER_PHONE},
            ),
        )

    def build(self, intent, members):
        from ..tasks import UserScenario

        known = [f"You are {TASK_USER_NAME} with phone number {TASK_USER_PHONE}."]
        abroad = any(_ABROAD_KNOWN in m.scenario.known_info for m in members)
        if intent != SERVICE and not abroad:
            known.append(_HOME_KNOWN)
        for m in members:
            known.extend(m.scenario.known_info)
        unknown = [line for m in members for line in m.scenario.unknown_info]
        instructions = [
            (
                "If the agent suggests actions that don't immediately fix the issue, "
                "follow their guidance but express mild frustration after the first "
                f"unsuccessful attempt. You will consider the issue resolved when "
                f"{_GOALS[intent]}. If the tool call does not return updated status "
                "information, you might need to perform another tool call to get the "
                "updated status."
            )
        ]
        instructions.extend(line for m in members for line in m.scenario.instructions)
        ticket_parts = [
            _TICKET_LEADS[intent],
            f"Customer name: {TASK_USER_NAME}, phone number: {TASK_USER_PHONE}.",
            _TICKET_GOALS[intent],
        ]
        ticket_parts.extend(line for m in members for line in m.scenario.ticket)
        scenario = UserScenario(
            domain=self.domain,
            reason_for_call=_REASONS[intent],
            known_info=" ".join(known),
            unknown_info=" ".join(unknown) if unknown else None,
            task_instructions=" ".join(instructions),
        )
        return scenario, " ".join(ticket_parts), _PURPOSES[intent]


# Universe bounds per intent: subtask counts seen in the sampled distribution.
COMPOSE_CONSTRAINTS = {
    SERVICE: ComposeConstraints(intent=SERVICE, min_subtasks=1, max_subtasks=5),
    DATA: ComposeConstraints(intent=DATA, min_subtasks=1, max_subtasks=7),
    MMS: ComposeConstraints(intent=MMS, min_subtasks=1, max_subtasks=9),
}

# (intent, n_subtasks) -> number of tasks in the balanced 114-task sample.
SAMPLE_QUOTAS: dict[tuple[str, int], int] = {
    (SERVICE, 2): 9, (SERVICE, 3): 9, (SERVICE, 4): 9, (SERVICE, 5): 2,
    (DATA, 2): 8, (DATA, 3): 8, (DATA, 4): 6, (DATA, 5): 6, (DATA, 6): 5, (DATA, 7): 3,
    (MMS, 2): 8, (MMS, 3): 9, (MMS, 4): 6, (MMS, 5): 5, (MMS, 6): 6, (MMS, 7): 5,
    (MMS, 8): 4, (MMS, 9): 6,
}


def generate_universe(
    intents: Sequence[str] = (SERVICE, DATA, MMS),
    min_subtasks: int | None = None,
    max_subtasks: int | None = None,
) -> list[CompositeTask]:
    """Compose the full verified-task universe for the requested intents."""
    groups = telecom_groups()
    renderer = TelecomRenderer()
    tasks: list[CompositeTask] = []
    for intent in intents:
        constraints = COMPOSE_CONSTRAINTS[intent]
        if min_subtasks is not None or max_subtasks is not None:
            constraints = ComposeConstraints(
                intent=intent,
                min_subtasks=min_subtasks if min_subtasks is not None else constraints.min_subtasks,
                max_subtasks=max_subtasks if max_subtasks is not None else constraints.max_subtasks,
            )
        tasks.extend(compose_tasks(groups, constraints, renderer))
    return tasks
