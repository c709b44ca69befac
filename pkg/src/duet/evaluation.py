"""Reward computation over final state and history, and pass^k aggregation.

Reward is the conjunction of every criterion the task configures (telecom
uses environment assertions only by default). pass^k for a task with c
successes out of n trials is C(c,k)/C(n,k), averaged unweighted over tasks.
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

from .engine import ConfigurationError, Environment, evaluate_assertion
from .orchestrator import Trajectory
from .tasks import AssertionSpec, CompositeTask, ExpectedAction
from .world import AGENT, GlobalState, Message, ToolCall

CRITERION_KINDS = ("db_check", "env_assertion", "action_match", "communication", "nl_assertion")

# A judge maps (transcript, statement) to a boolean verdict.
Judge = Callable[[str, str], bool]


@dataclass(frozen=True)
class CriterionResult:
    kind: str
    id: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class TrialRecord:
    task_id: str
    trial_index: int
    reward: int
    criteria: tuple[CriterionResult, ...]
    stop_reason: str
    step_count: int
    mode: str = "default"


def check_env_assertions(
    state: GlobalState, assertions: Sequence[AssertionSpec], env: Environment
) -> list[CriterionResult]:
    results = []
    for spec in assertions:
        actual = evaluate_assertion(env, state, spec.function, spec.args)
        args = ", ".join(f"{k}={v!r}" for k, v in spec.args.items())
        results.append(
            CriterionResult(
                kind="env_assertion",
                id=f"{spec.function}({args})",
                passed=actual == spec.expected,
                detail=f"expected {spec.expected}, got {actual}",
            )
        )
    return results


def _args_match(expected: dict[str, Any], actual: dict[str, Any]) -> bool:
    # Every expected key must match, and the actual call may not carry
    # arguments beyond the expected ones.
    if any(key not in expected for key in actual):
        return False
    return all(key in actual and actual[key] == value for key, value in expected.items())


def check_actions(events: Sequence, expected_actions: Sequence[ExpectedAction]) -> CriterionResult:
    missing = []
    for expected in expected_actions:
        found = any(
            event.actor == expected.requestor
            and isinstance(event.action, ToolCall)
            and event.action.name == expected.name
            and _args_match(expected.args, event.action.args)
            for event in events
        )
        if not found:
            missing.append(expected.action_id)
    return CriterionResult(
        kind="action_match",
        id="expected_actions",
        passed=not missing,
        detail="all expected actions present" if not missing else f"missing: {', '.join(missing)}",
    )


def check_db(final_world_hashes: dict[str, str], expected_hashes: dict[str, str]) -> CriterionResult:
    for key in expected_hashes:
        if key not in final_world_hashes:
            raise ConfigurationError(f"db check configured for unknown database: {key}")
    mismatched = [k for k, v in expected_hashes.items() if final_world_hashes[k] != v]
    return CriterionResult(
        kind="db_check",
        id="final_db_hashes",
        passed=not mismatched,
        detail="hashes match" if not mismatched else f"mismatch: {', '.join(mismatched)}",
    )


_NORMALIZE_STRIP = re.compile(r"[,\s$€£]+")


def _normalize(text: str) -> str:
    return _NORMALIZE_STRIP.sub(" ", text.casefold()).strip()


def check_communication(events: Sequence, required_infos: Sequence[str]) -> CriterionResult:
    spoken = " ".join(
        event.action.text
        for event in events
        if event.actor == AGENT and isinstance(event.action, Message)
    )
    haystack = _normalize(spoken)
    missing = [info for info in required_infos if _normalize(info) not in haystack]
    return CriterionResult(
        kind="communication",
        id="communicate_info",
        passed=not missing,
        detail="all required info conveyed" if not missing else f"missing: {missing}",
    )


def render_transcript(events: Sequence) -> str:
    lines = []
    for event in events:
        if isinstance(event.action, Message):
            lines.append(f"{event.actor}: {event.action.text}")
        elif isinstance(event.action, ToolCall):
            lines.append(f"{event.actor} [tool]: {event.action.name}({event.action.args})")
    return "\n".join(lines)


def check_nl_assertions(
    events: Sequence, statements: Sequence[str], judge: Judge | None
) -> list[CriterionResult]:
    results = []
    transcript = render_transcript(events)
    for statement in statements:
        if judge is None:
            results.append(
                CriterionResult(
                    kind="nl_assertion",
                    id=statement,
                    passed=False,
                    detail="errored: no judge available",
                )
            )
            continue
        verdict = bool(judge(transcript, statement))
        results.append(
            CriterionResult(
                kind="nl_assertion",
                id=statement,
                passed=verdict,
                detail=f"judge={getattr(judge, 'name', judge.__class__.__name__)}",
            )
        )
    return results


def compute_reward(
    task: CompositeTask,
    trajectory: Trajectory,
    final_state: GlobalState,
    env: Environment,
    judge: Judge | None = None,
    mode: str = "default",
) -> TrialRecord:
    """Evaluate exactly the criterion families the task configures; reward is
    their conjunction."""
    criteria: list[CriterionResult] = []
    criteria.extend(check_env_assertions(final_state, task.evaluation.env_assertions, env))
    if task.evaluation.enforce_action_match:
        criteria.append(check_actions(trajectory.events, task.evaluation.expected_actions))
    if task.evaluation.communicate_info:
        criteria.append(check_communication(trajectory.events, task.evaluation.communicate_info))
    if task.evaluation.nl_assertions:
        criteria.extend(check_nl_assertions(trajectory.events, task.evaluation.nl_assertions, judge))
    if task.evaluation.expected_db_hashes:
        criteria.append(check_db(trajectory.final_world_hashes, task.evaluation.expected_db_hashes))
    reward = int(all(c.passed for c in criteria)) if criteria else 0
    return TrialRecord(
        task_id=task.id,
        trial_index=trajectory.trial_index,
        reward=reward,
        criteria=tuple(criteria),
        stop_reason=trajectory.stop_reason,
        step_count=len(trajectory.events),
        mode=mode,
    )


# -- pass^k ---------------------------------------------------------------

def pass_hat_k_task(c: int, n: int, k: int) -> float:
    """Probability that k trials sampled without replacement all succeed."""
    if k > n:
        raise ValueError(f"k={k} exceeds trial count n={n}")
    if k <= 0:
        raise ValueError("k must be positive")
    return math.comb(c, k) / math.comb(n, k)


def _group_by_task(records: Iterable[TrialRecord]) -> dict[str, tuple[int, int]]:
    grouped: dict[str, list[int]] = {}
    for record in records:
        grouped.setdefault(record.task_id, []).append(record.reward)
    return {task: (sum(rewards), len(rewards)) for task, rewards in grouped.items()}


def pass_hat_k(records: Iterable[TrialRecord], k: int) -> float:
    """Unweighted mean over tasks of C(c,k)/C(n,k)."""
    grouped = _group_by_task(records)
    if not grouped:
        raise ValueError("no trial records")
    return sum(pass_hat_k_task(c, n, k) for c, n in grouped.values()) / len(grouped)


@dataclass(frozen=True)
class PassKCurve:
    values: tuple[float, ...]  # index i holds pass^(i+1)
    per_task: dict[str, tuple[int, int]]  # task_id -> (c, n)

    @property
    def k_max(self) -> int:
        return len(self.values)


def pass_k_curve(records: Sequence[TrialRecord], k_max: int | None = None) -> PassKCurve:
    grouped = _group_by_task(records)
    if not grouped:
        raise ValueError("no trial records")
    limit = min(n for _, n in grouped.values())
    if k_max is not None:
        if k_max > limit:
            raise ValueError(f"k_max={k_max} exceeds minimum trials per task ({limit})")
        limit = k_max
    values = tuple(
        sum(pass_hat_k_task(c, n, k) for c, n in grouped.values()) / len(grouped)
        for k in range(1, limit + 1)
    )
    return PassKCurve(values=values, per_task=grouped)


def estimate_pass_hat_k_monte_carlo(
    c: int, n: int, k: int, draws: int, rng: random.Random
) -> float:
    """Independent subset-sampling estimator used as an oracle for the closed form."""
    outcomes = [1] * c + [0] * (n - c)
    hits = 0
    for _ in range(draws):
        if all(rng.sample(outcomes, k)):
            hits += 1
    return hits / draws


# -- breakdown tables ------------------------------------------------------

ACTION_BINS = ((1, 2), (3, 4), (5, 7), (8, None))
TRANSFER_BIN = "transfer"


def action_bin_label(task: CompositeTask) -> str:
    """Bin by solution length, except transfer tasks get their own bin."""
    if task.requires_transfer:
        return TRANSFER_BIN
    n = task.n_actions
    for low, high in ACTION_BINS:
        if n >= low and (high is None or n <= high):
            return f"{low}-{high}" if high is not None else f"{low}+"
    raise ValueError(f"no action bin for {n} actions")


@dataclass(frozen=True)
class BreakdownRow:
    mode: str
    dimension: str  # overall | intent | persona | action_bin | subtask_count
    group: str
    n_tasks: int
    task_proportion: float
    k: int
    pass_hat_k: float


def breakdown_tables(
    records: Sequence[TrialRecord],
    tasks: Sequence[CompositeTask],
    k_max: int | None = None,
) -> list[BreakdownRow]:
    """pass^1..k per mode, grouped overall and by intent, persona, action bin,
    and subtask count; each task falls in exactly one group per dimension."""
    by_id = {task.id: task for task in tasks}
    rows: list[BreakdownRow] = []
    modes = sorted({r.mode for r in records})
    for mode in modes:
        mode_records = [r for r in records if r.mode == mode]
        known = [r for r in mode_records if r.task_id in by_id]
        if len(known) != len(mode_records):
            unknown = {r.task_id for r in mode_records} - set(by_id)
            raise ConfigurationError(f"records reference unknown tasks: {sorted(unknown)[:3]}")
        total_tasks = len({r.task_id for r in known})
        groupers: dict[str, Callable[[CompositeTask], str]] = {
            "overall": lambda t: "all",
            "intent": lambda t: t.intent,
            "persona": lambda t: t.persona,
            "action_bin": action_bin_label,
            "subtask_count": lambda t: str(t.n_subtasks),
        }
        for dimension, grouper in groupers.items():
            buckets: dict[str, list[TrialRecord]] = {}
            for record in known:
                buckets.setdefault(grouper(by_id[record.task_id]), []).append(record)
            for group in sorted(buckets):
                bucket = buckets[group]
                n_tasks = len({r.task_id for r in bucket})
                curve = pass_k_curve(bucket, k_max=k_max)
                for k, value in enumerate(curve.values, start=1):
                    rows.append(
                        BreakdownRow(
                            mode=mode,
                            dimension=dimension,
                            group=group,
                            n_tasks=n_tasks,
                            task_proportion=n_tasks / total_tasks if total_tasks else 0.0,
                            k=k,
                            pass_hat_k=value,
                        )
                    )
    return rows


def rows_to_csv(rows: Sequence[BreakdownRow]) -> str:
    header = "mode,dimension,group,n_tasks,task_proportion,k,pass_hat_k"
    lines = [header]
    for row in rows:
        lines.append(
            f"{row.mode},{row.dimension},{row.group},{row.n_tasks},"
            f"{row.task_proportion:.6f},{row.k},{row.pass_hat_k:.6f}"
        )
    return "\n".join(lines) + "\n"


TRIAL_TABLE_COLUMNS = (
    "task_id", "trial", "reward", "stop_reason", "intent", "persona",
    "n_actions", "n_subtasks",
)


def trial_table(records: Sequence[TrialRecord], tasks: Sequence[CompositeTask]) -> str:
    """Flat per-trial table for plotting; column names are part of the format."""
    by_id = {task.id: task for task in tasks}
    lines = [",".join(TRIAL_TABLE_COLUMNS)]
    for record in records:
        task = by_id.get(record.task_id)
        if task is None:
            raise ConfigurationError(f"record references unknown task: {record.task_id}")
        quoted_id = '"' + record.task_id.replace('"', '""') + '"'
        lines.append(
            f"{quoted_id},{record.trial_index},{record.reward},{record.stop_reason},"
            f"{task.intent},{task.persona},{task.n_actions},{task.n_subtasks}"
        )
    return "\n".join(lines) + "\n"
