"""Atomic subtasks and their composition into verified composite tasks.

A subtask is an (init, solution, assertion) triple about one defect. Groups
hold mutually exclusive alternatives; a composite selects at most one member
per group and concatenates the members' calls. Every composite is checked to
be unsolved after init, still unsolved after every strict solution prefix,
and solved after the full solution.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .engine import (
    ConfigurationError,
    Environment,
    InitCall,
    apply_init,
    evaluate_assertion,
    restore,
    snapshot,
    step,
)
from .world import GlobalState, ToolCall, ToolResult

INTENTS = ("service_issue", "mobile_data_issue", "mms_issue")
PERSONAS = ("None", "Easy", "Hard")

PERSONA_TEXTS = {
    "Easy": (
        "As a 41-year-old office administrator, you use your cellphone daily for both "
        "work and personal tasks. While you're familiar with common phone functions, "
        "you wouldn't call yourself a tech enthusiast.\n\n"
        "Your technical skills are average - you handle standard smartphone features "
        "like calls, texts, email, and basic apps with ease. You understand the "
        "fundamental settings, but prefer clear, step-by-step guidance when trying "
        "something new.\n\n"
        "In interactions, you're naturally friendly and patient. When receiving help, "
        "you listen attentively and aren't afraid to ask questions. You make sure to "
        "confirm your understanding and provide detailed feedback on each instruction "
        "you receive."
    ),
    "Hard": (
        "At 64 years old, you're a retired librarian who keeps your phone use simple - "
        "mainly for calls, texts, and capturing photos of your grandchildren. "
        "Technology in general makes you feel uneasy and overwhelmed.\n\n"
        "Your technical knowledge is quite limited. Step-by-step instructions often "
        "confuse you, and technical terms like \"VPN\" or \"APN\" might as well be a "
        "foreign language. You only share information when specifically asked.\n\n"
        "When dealing with technology, you tend to get flustered quickly. You need "
        "constant reassurance and often interrupt with anxious questions. Simple "
        "requests like \"reboot the phone\" can trigger worries about losing precious "
        "photos."
    ),
}


@dataclass(frozen=True)
class SolutionCall:
    requestor: str  # agent | user
    name: str
    args: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class AssertionSpec:
    env: str  # agent | user (which side the condition is about)
    function: str
    args: dict[str, Any] = field(default_factory=dict)
    expected: bool = True

    def key(self) -> tuple:
        return (self.env, self.function, json.dumps(self.args, sort_keys=True), self.expected)


@dataclass(frozen=True)
class SubtaskScenario:
    """Text fragments a subtask contributes to the composite's user scenario."""

    known_info: tuple[str, ...] = ()
    unknown_info: tuple[str, ...] = ()
    instructions: tuple[str, ...] = ()
    ticket: tuple[str, ...] = ()


@dataclass(frozen=True)
class AtomicSubtask:
    id: str
    intent: str
    group_id: str
    init_calls: tuple[InitCall, ...] = ()
    solution_calls: tuple[SolutionCall, ...] = ()
    assertion_calls: tuple[AssertionSpec, ...] = ()
    scenario: SubtaskScenario = SubtaskScenario()


@dataclass(frozen=True)
class SubtaskGroup:
    group_id: str
    members: tuple[AtomicSubtask, ...]

    def members_for_intent(self, intent: str | None) -> tuple[AtomicSubtask, ...]:
        if intent is None:
            return self.members
        return tuple(m for m in self.members if m.intent == intent)


@dataclass(frozen=True)
class ExpectedAction:
    action_id: str
    requestor: str
    name: str
    args: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class UserScenario:
    domain: str
    reason_for_call: str
    known_info: str | None
    unknown_info: str | None
    task_instructions: str


@dataclass(frozen=True)
class Evaluation:
    expected_actions: tuple[ExpectedAction, ...] = ()
    env_assertions: tuple[AssertionSpec, ...] = ()
    communicate_info: tuple[str, ...] = ()
    nl_assertions: tuple[str, ...] = ()
    # Telecom scores on assertions only; action matching is a per-task toggle.
    enforce_action_match: bool = False
    expected_db_hashes: dict[str, str] | None = None


@dataclass(frozen=True)
class CompositeTask:
    id: str
    intent: str
    persona: str
    user_scenario: UserScenario
    ticket: str
    init_actions: tuple[InitCall, ...]
    evaluation: Evaluation
    subtask_ids: tuple[str, ...]
    purpose: str = ""

    @property
    def n_subtasks(self) -> int:
        return len(self.subtask_ids)

    @property
    def n_actions(self) -> int:
        return len(self.evaluation.expected_actions)

    @property
    def requires_transfer(self) -> bool:
        return any(a.function == "assert_transfer_occurred" for a in self.evaluation.env_assertions)


class ScenarioRenderer:
    """Builds the natural-language surface of a composite from its members."""

    domain = "generic"

    def preamble_inits(self, intent: str, members: Sequence[AtomicSubtask]) -> tuple[InitCall, ...]:
        return ()

    def build(self, intent: str, members: Sequence[AtomicSubtask]) -> tuple[UserScenario, str, str]:
        names = ", ".join(m.id for m in members)
        scenario = UserScenario(
            domain=self.domain,
            reason_for_call=f"You need help with: {names}.",
            known_info=None,
            unknown_info=None,
            task_instructions="Follow the agent's guidance until the issue is resolved.",
        )
        return scenario, f"The user needs help with: {names}.", f"Test composition of {names}."


_INTENT_ORDER = {intent: i for i, intent in enumerate(INTENTS)}


@dataclass(frozen=True)
class ComposeConstraints:
    intent: str | None = None
    min_subtasks: int = 1
    max_subtasks: int | None = None
    # Optional cross-group compatibility predicate; none shipped by default.
    compatible: Callable[[Sequence[AtomicSubtask]], bool] | None = None


def _dedup_assertions(assertions: Iterable[AssertionSpec]) -> tuple[AssertionSpec, ...]:
    seen: set[tuple] = set()
    out = []
    for spec in assertions:
        if spec.key() not in seen:
            seen.add(spec.key())
            out.append(spec)
    return tuple(out)


def build_composite(
    intent: str,
    members: Sequence[AtomicSubtask],
    renderer: ScenarioRenderer,
) -> CompositeTask:
    task_id = f"[{intent}]" + "|".join(m.id for m in members)
    init_actions = tuple(renderer.preamble_inits(intent, members)) + tuple(
        call for m in members for call in m.init_calls
    )
    actions = []
    for m in members:
        for call in m.solution_calls:
            actions.append(
                ExpectedAction(
                    action_id=f"{call.name}_{len(actions)}",
                    requestor=call.requestor,
                    name=call.name,
                    args=dict(call.args),
                )
            )
    assertions = _dedup_assertions(a for m in members for a in m.assertion_calls)
    scenario, ticket, purpose = renderer.build(intent, members)
    return CompositeTask(
        id=task_id,
        intent=intent,
        persona="None",
        user_scenario=scenario,
        ticket=ticket,
        init_actions=init_actions,
        evaluation=Evaluation(expected_actions=tuple(actions), env_assertions=assertions),
        subtask_ids=tuple(m.id for m in members),
        purpose=purpose,
    )


def compose_tasks(
    groups: Sequence[SubtaskGroup],
    constraints: ComposeConstraints = ComposeConstraints(),
    renderer: ScenarioRenderer | None = None,
) -> list[CompositeTask]:
    """Enumerate every selection of at most one member per group, within constraints."""
    if not groups:
        raise ConfigurationError("compose_tasks requires at least one group")
    ids = [g.group_id for g in groups]
    if len(set(ids)) != len(ids):
        raise ConfigurationError("group ids must be distinct")
    renderer = renderer or ScenarioRenderer()
    options = [(None, *g.members_for_intent(constraints.intent)) for g in groups]
    tasks = []
    for selection in itertools.product(*options):
        members = [m for m in selection if m is not None]
        if not members or len(members) < constraints.min_subtasks:
            continue
        if constraints.max_subtasks is not None and len(members) > constraints.max_subtasks:
            continue
        if constraints.compatible is not None and not constraints.compatible(members):
            continue
        intent = constraints.intent or max(members, key=lambda m: _INTENT_ORDER[m.intent]).intent
        tasks.append(build_composite(intent, members, renderer))
    return tasks


@dataclass
class VerificationReport:
    task_id: str
    unsolved_after_init: bool
    prefix_results: list[bool]  # solved-flag after each strict nonempty prefix
    solved_after_all: bool
    verdict: str  # pass | fail
    diagnostic: str = ""

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def _assertions_hold(env: Environment, state: GlobalState, task: CompositeTask) -> bool:
    return all(
        evaluate_assertion(env, state, a.function, a.args) == a.expected
        for a in task.evaluation.env_assertions
    )


def verify_task(task: CompositeTask, env: Environment) -> VerificationReport:
    """Check unsolved-at-init, unsolved after every strict prefix, solved after all.

    The environment is restored from a snapshot between phases and left
    pristine afterwards.
    """
    base = snapshot(env)
    actions = task.evaluation.expected_actions
    diagnostic = ""

    def run_phase(n: int) -> bool | None:
        nonlocal diagnostic
        restore(env, base)
        apply_init(env, list(task.init_actions))
        state = GlobalState(env.world, [])
        for expected in actions[:n]:
            obs = step(state, env, expected.requestor, ToolCall(expected.name, expected.args))
            if isinstance(obs, ToolResult) and obs.is_error:
                diagnostic = f"solution call {expected.name} failed: {obs.payload}"
                return None
        return _assertions_hold(env, state, task)

    try:
        solved_at_init = run_phase(0)
        prefix_results = []
        for n in range(1, len(actions)):
            solved = run_phase(n)
            if solved is None:
                return VerificationReport(task.id, False, prefix_results, False, "fail", diagnostic)
            prefix_results.append(solved)
        solved_after_all = run_phase(len(actions))
        if solved_after_all is None:
            return VerificationReport(task.id, False, prefix_results, False, "fail", diagnostic)
    finally:
        restore(env, base)

    ok = (
        solved_at_init is False
        and not any(prefix_results)
        and solved_after_all is True
    )
    if not ok and not diagnostic:
        if solved_at_init:
            diagnostic = "already solved after initialization"
        elif any(prefix_results):
            first = prefix_results.index(True) + 1
            diagnostic = f"solved after only {first} of {len(actions)} actions"
        else:
            diagnostic = "not solved after applying all solution actions"
    return VerificationReport(
        task_id=task.id,
        unsolved_after_init=solved_at_init is False,
        prefix_results=prefix_results,
        solved_after_all=solved_after_all is True,
        verdict="pass" if ok else "fail",
        diagnostic=diagnostic,
    )


def sample_balanced(
    tasks: Sequence[CompositeTask],
    quotas: dict[tuple[str, int], int],
    seed: int,
) -> list[CompositeTask]:
    """Draw exactly the quota from each (intent, subtask-count) cell, deterministically."""
    cells: dict[tuple[str, int], list[CompositeTask]] = {}
    for task in tasks:
        cells.setdefault((task.intent, task.n_subtasks), []).append(task)
    rng = random.Random(seed)
    out: list[CompositeTask] = []
    for cell in sorted(quotas, key=lambda c: (_INTENT_ORDER.get(c[0], 99), c[1])):
        want = quotas[cell]
        have = sorted(cells.get(cell, []), key=lambda t: t.id)
        if want > len(have):
            raise ConfigurationError(
                f"cell {cell} has only {len(have)} tasks, quota is {want}"
            )
        out.extend(rng.sample(have, want))
    return out


def assign_personas(tasks: Sequence[CompositeTask], seed: int) -> list[CompositeTask]:
    rng = random.Random(seed)
    return [replace(task, persona=rng.choice(PERSONAS)) for task in tasks]


def render_ticket(task: CompositeTask) -> str:
    return task.ticket


def render_user_instructions(task: CompositeTask) -> str:
    s = task.user_scenario
    lines = [
        f"Domain: {s.domain}",
        "Reason for call:",
        f"    {s.reason_for_call}",
        "Known info:",
        f"    {s.known_info if s.known_info else 'null'}",
        "Unknown info:",
        f"    {s.unknown_info if s.unknown_info else 'null'}",
        "Task instructions:",
        f"    {s.task_instructions}",
    ]
    if task.persona != "None":
        lines.append("Persona:")
        for para in PERSONA_TEXTS[task.persona].split("\n"):
            lines.append(f"    {para}" if para else "")
    return "\n".join(lines)


# -- task file format -----------------------------------------------------

def task_to_doc(task: CompositeTask) -> dict[str, Any]:
    return {
        "id": task.id,
        "description": {"purpose": task.purpose},
        "user_scenario": {
            "persona": task.persona,
            "instructions": {
                "domain": task.user_scenario.domain,
                "reason_for_call": task.user_scenario.reason_for_call,
                "known_info": task.user_scenario.known_info,
                "unknown_info": task.user_scenario.unknown_info,
                "task_instructions": task.user_scenario.task_instructions,
            },
        },
        "ticket": task.ticket,
        "initial_state": {
            "initialization_data": None,
            "initialization_actions": [
                {"action": c.name, "env_type": c.env, "arguments": c.args}
                for c in task.init_actions
            ],
        },
        "evaluation_criteria": {
            "actions": [
                {
                    "action_id": a.action_id,
                    "requestor": a.requestor,
                    "name": a.name,
                    "arguments": a.args,
                }
                for a in task.evaluation.expected_actions
            ],
            "env_assertions": [
                {
                    "env_type": a.env,
                    "function": a.function,
                    "arguments": a.args,
                    "assert_value": a.expected,
                }
                for a in task.evaluation.env_assertions
            ],
            "communicate_info": list(task.evaluation.communicate_info),
            "nl_assertions": list(task.evaluation.nl_assertions),
            "enforce_action_match": task.evaluation.enforce_action_match,
            "expected_db_hashes": task.evaluation.expected_db_hashes,
        },
        "metadata": {
            "intent": task.intent,
            "n_subtasks": task.n_subtasks,
            "n_actions": task.n_actions,
            "subtask_ids": list(task.subtask_ids),
            "requires_transfer": task.requires_transfer,
        },
    }


def task_from_doc(doc: dict[str, Any]) -> CompositeTask:
    scen = doc["user_scenario"]["instructions"]
    crit = doc["evaluation_criteria"]
    return CompositeTask(
        id=doc["id"],
        intent=doc["metadata"]["intent"],
        persona=doc["user_scenario"].get("persona", "None"),
        user_scenario=UserScenario(
            domain=scen["domain"],
            reason_for_call=scen["reason_for_call"],
            known_info=scen["known_info"],
            unknown_info=scen["unknown_info"],
            task_instructions=scen["task_instructions"],
        ),
        ticket=doc["ticket"],
        init_actions=tuple(
            InitCall(name=c["action"], env=c["env_type"], args=c["arguments"])
            for c in doc["initial_state"]["initialization_actions"]
        ),
        evaluation=Evaluation(
            expected_actions=tuple(
                ExpectedAction(
                    action_id=a["action_id"],
                    requestor=a["requestor"],
                    name=a["name"],
                    args=a["arguments"],
                )
                for a in crit["actions"]
            ),
            env_assertions=tuple(
                AssertionSpec(
                    env=a["env_type"],
                    function=a["function"],
                    args=a["arguments"],
                    expected=a["assert_value"],
                )
                for a in crit["env_assertions"]
            ),
            communicate_info=tuple(crit.get("communicate_info", ())),
            nl_assertions=tuple(crit.get("nl_assertions", ())),
            enforce_action_match=crit.get("enforce_action_match", False),
            expected_db_hashes=crit.get("expected_db_hashes"),
        ),
        subtask_ids=tuple(doc["metadata"]["subtask_ids"]),
        purpose=doc["description"].get("purpose", ""),
    )


def write_suite(path: str | Path, tasks: Sequence[CompositeTask], domain: str) -> None:
    doc = {"domain": domain, "tasks": [task_to_doc(t) for t in tasks]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_suite(path: str | Path) -> tuple[str, list[CompositeTask]]:
    doc = json.loads(Path(path).read_text())
    return doc["domain"], [task_from_doc(t) for t in doc["tasks"]]


def task_to_markdown(task: CompositeTask) -> str:
    """Human-oriented rendering of one task, mirroring the task-file fields."""
    doc = task_to_doc(task)
    init_lines = []
    for i, call in enumerate(doc["initial_state"]["initialization_actions"], start=1):
        init_lines.append(f"  {i}. **Action**: {call['action']}")
        init_lines.append(f"     - **Env Type**: {call['env_type']}")
        init_lines.append(f"     - **Arguments**: {json.dumps(call['arguments'])}")
    action_lines = []
    for i, a in enumerate(doc["evaluation_criteria"]["actions"], start=1):
        action_lines.append(f"{i}. **Action ID**: {a['action_id']}")
        action_lines.append(f"   - **Requestor**: {a['requestor']}")
        action_lines.append(f"   - **Name**: {a['name']}")
        action_lines.append(f"   - **Arguments**: {json.dumps(a['arguments'])}")
    assertion_lines = []
    for a in doc["evaluation_criteria"]["env_assertions"]:
        assertion_lines.append(f"- **Env Type**: {a['env_type']}")
        assertion_lines.append(f"  **Function**: {a['function']}")
        assertion_lines.append(f"  **Arguments**: {json.dumps(a['arguments'])}")
        assertion_lines.append(f"  **Assert Value**: {str(a['assert_value']).lower()}")
    scen = doc["user_scenario"]["instructions"]
    return "\n".join(
        [
            "# Task Details",
            "",
            "## ID",
            task.id,
            "",
            "## Description",
            f"- **Purpose**: {task.purpose}",
            "",
            "## User Scenario",
            "- **Instructions**:",
            f"  - **Domain**: {scen['domain']}",
            f"  - **Reason for call**: {scen['reason_for_call']}",
            f"  - **Known info**: {scen['known_info'] or 'null'}",
            f"  - **Unknown info**: {scen['unknown_info'] or 'null'}",
            f"  - **Task instructions**: {scen['task_instructions']}",
            "",
            "## Ticket",
            task.ticket,
            "",
            "## Initial State",
            "- **Initialization Data**: null",
            "- **Initialization Actions**:",
            *init_lines,
            "",
            "## Evaluation Criteria",
            "### Actions",
            *action_lines,
            "",
            "### Environment Assertions",
            *assertion_lines,
            "",
        ]
    )
