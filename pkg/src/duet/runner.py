"""End-to-end run execution: trials over a task list, persisted to a store."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .engine import Environment
from .evaluation import TrialRecord, compute_reward
from .orchestrator import PolicyFactory, RunConfig, Trajectory, run_trials
from .store import RunManifest, RunStore
from .tasks import CompositeTask
from .world import GlobalState


@dataclass
class RunOutcome:
    manifest: RunManifest
    trajectories: list[Trajectory]
    records: list[TrialRecord]


def execute_run(
    tasks: Sequence[CompositeTask],
    make_agent: PolicyFactory,
    make_user: PolicyFactory | None,
    make_env: Callable[[], Environment],
    config: RunConfig,
    store: RunStore | None = None,
    run_id: str = "run",
    domain: str = "telecom",
    fixture_digests: dict[str, str] | None = None,
    policy_ids: dict[str, str] | None = None,
) -> RunOutcome:
    """Run every task for config.trials_per_task trials; optionally persist."""
    manifest = RunManifest(
        run_id=run_id,
        mode=config.mode,
        config={
            "max_steps": config.max_steps,
            "max_consecutive_errors": config.max_consecutive_errors,
            "seed": config.seed,
            "trials_per_task": config.trials_per_task,
            "mode": config.mode,
        },
        domain=domain,
        domain_fixture_digests=fixture_digests or {},
        policy_ids=policy_ids or {},
    )
    if store is not None:
        store.write_manifest(manifest)
    trajectories: list[Trajectory] = []
    records: list[TrialRecord] = []
    for task in tasks:
        for trajectory in run_trials(task, make_agent, make_user, make_env, config):
            record = _evaluate_live(task, trajectory, make_env, config.mode)
            trajectories.append(trajectory)
            records.append(record)
            if store is not None:
                store.write_trajectory(run_id, trajectory)
    if store is not None:
        store.write_results(run_id, records)
    return RunOutcome(manifest=manifest, trajectories=trajectories, records=records)


def _evaluate_live(
    task: CompositeTask,
    trajectory: Trajectory,
    make_env: Callable[[], Environment],
    mode: str,
) -> TrialRecord:
    """Rebuild the final world by replaying the trajectory, then score it."""
    from .store import replay_trajectory

    env = make_env()
    replay_trajectory(trajectory, task, env, mode=mode)
    state = GlobalState(env.world, list(trajectory.events))
    return compute_reward(task, trajectory, state, env, mode=mode)
