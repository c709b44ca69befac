"""Command-line surface: generate / verify / sample / run / evaluate / replay /
export / serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .engine import ConfigurationError
from .evaluation import breakdown_tables, pass_k_curve, trial_table
from .orchestrator import MODES, RunConfig
from .policies import AGENT_POLICY_FACTORIES, USER_POLICY_FACTORIES, LlmPolicyConfig, llm_policy_factory
from .runner import execute_run
from .store import RunStore, replay_trajectory, trajectory_from_lines
from .tasks import (
    assign_personas,
    read_suite,
    sample_balanced,
    task_to_markdown,
    verify_task,
    write_suite,
)
from .telecom import build_environment, generate_universe, seed_fixture_digests
from .telecom.catalog import SAMPLE_QUOTAS
from .world import AGENT, USER


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text())


def _fail(message: str) -> int:
    print(json.dumps({"error": message}), file=sys.stderr)
    return 1


def cmd_generate(args) -> int:
    if args.domain != "telecom":
        return _fail(f"unknown domain: {args.domain}")
    tasks = generate_universe(
        min_subtasks=args.min_subtasks, max_subtasks=args.max_subtasks
    )
    if args.intent:
        tasks = [t for t in tasks if t.intent == args.intent]
    write_suite(args.out, tasks, domain=args.domain)
    print(f"wrote {len(tasks)} tasks to {args.out}")
    return 0


def cmd_verify(args) -> int:
    domain, tasks = read_suite(args.tasks)
    env = build_environment()
    failures = 0
    reports = []
    for task in tasks:
        report = verify_task(task, env)
        reports.append(report)
        if not report.passed:
            failures += 1
            print(f"FAIL {task.id}: {report.diagnostic}")
    if args.out:
        payload = [
            {
                "task_id": r.task_id,
                "unsolved_after_init": r.unsolved_after_init,
                "prefix_results": r.prefix_results,
                "solved_after_all": r.solved_after_all,
                "verdict": r.verdict,
                "diagnostic": r.diagnostic,
            }
            for r in reports
        ]
        Path(args.out).write_text("\n".join(json.dumps(p) for p in payload) + "\n")
    print(f"verified {len(tasks)} tasks: {len(tasks) - failures} pass, {failures} fail")
    return 1 if failures else 0


def cmd_sample(args) -> int:
    domain, tasks = read_suite(args.tasks)
    quotas = SAMPLE_QUOTAS
    if args.quotas:
        raw = json.loads(Path(args.quotas).read_text())
        quotas = {(cell["intent"], cell["n_subtasks"]): cell["count"] for cell in raw}
    try:
        sampled = sample_balanced(tasks, quotas, seed=args.seed)
    except ConfigurationError as exc:
        return _fail(str(exc))
    sampled = assign_personas(sampled, seed=args.seed)
    write_suite(args.out, sampled, domain=domain)
    print(f"sampled {len(sampled)} tasks to {args.out}")
    return 0


def _policy_factories(args):
    if args.agent_policy == "llm":
        llm = LlmPolicyConfig.from_env(model=args.model)
        make_agent = llm_policy_factory(llm, AGENT)
    else:
        make_agent = AGENT_POLICY_FACTORIES[args.agent_policy]
    if args.mode == "no_user":
        make_user = None
    elif args.user_policy == "llm":
        llm = LlmPolicyConfig.from_env(model=args.model)
        make_user = llm_policy_factory(llm, USER)
    else:
        make_user = USER_POLICY_FACTORIES[args.user_policy]
    return make_agent, make_user


def cmd_run(args) -> int:
    domain, tasks = read_suite(args.tasks)
    if args.task_id:
        tasks = [t for t in tasks if t.id == args.task_id]
        if not tasks:
            return _fail(f"task not found: {args.task_id}")
    store = RunStore(args.out)
    run_id = args.run_id or f"run-{len(store.list_runs()):04d}"
    config = RunConfig(
        max_steps=args.max_steps,
        seed=args.seed,
        trials_per_task=args.trials,
        mode=args.mode,
    )
    make_agent, make_user = _policy_factories(args)
    outcome = execute_run(
        tasks,
        make_agent,
        make_user,
        build_environment,
        config,
        store=store,
        run_id=run_id,
        domain=domain,
        fixture_digests=seed_fixture_digests(),
        policy_ids={"agent": args.agent_policy, "user": args.user_policy},
    )
    rewards = [r.reward for r in outcome.records]
    print(
        f"run {run_id}: {len(tasks)} tasks x {args.trials} trials, "
        f"mean reward {sum(rewards) / len(rewards):.3f}"
    )
    return 0


def cmd_evaluate(args) -> int:
    store = RunStore(args.store)
    records = store.read_results(args.run_id)
    curve = pass_k_curve(records, k_max=args.k)
    store.write_pass_k(args.run_id, curve.values)
    if args.tasks:
        _, tasks = read_suite(args.tasks)
        rows = breakdown_tables(records, tasks, k_max=args.k)
        store.write_tables(args.run_id, rows)
        store.write_trial_table(args.run_id, trial_table(records, tasks))
    for k, value in enumerate(curve.values, start=1):
        print(f"pass^{k} = {value:.4f}")
    return 0


def cmd_replay(args) -> int:
    store = RunStore(args.store)
    mode = store.read_manifest(args.run_id).mode
    _, tasks = read_suite(args.tasks)
    by_id = {t.id: t for t in tasks}
    failures = 0
    for path in store.list_trajectories(args.run_id):
        trajectory = trajectory_from_lines(path.read_text().splitlines())
        task = by_id.get(trajectory.task_id)
        if task is None:
            print(f"SKIP {path.name}: unknown task {trajectory.task_id}")
            failures += 1
            continue
        result = replay_trajectory(trajectory, task, build_environment(), mode=mode)
        if not result.ok:
            failures += 1
            print(f"MISMATCH {path.name}: {result.detail}")
    print(f"replayed run {args.run_id}: {failures} mismatches")
    return 1 if failures else 0


def cmd_export(args) -> int:
    store = RunStore(args.store)
    records = store.read_results(args.run_id)
    _, tasks = read_suite(args.tasks)
    rows = breakdown_tables(records, tasks, k_max=args.k)
    path = store.write_tables(args.run_id, rows)
    trial_path = store.write_trial_table(args.run_id, trial_table(records, tasks))
    print(f"wrote {len(rows)} table rows to {path} and per-trial rows to {trial_path}")
    return 0


def cmd_render(args) -> int:
    _, tasks = read_suite(args.tasks)
    for task in tasks:
        if args.task_id and task.id != args.task_id:
            continue
        print(task_to_markdown(task))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    app = create_app(store_root=args.store, tasks_path=args.tasks)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="duet", description=__doc__)
    parser.add_argument("--config", help="JSON file with default values for flags")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="compose the full verified-task universe")
    g.add_argument("--domain", default="telecom")
    g.add_argument("--intent", choices=("service_issue", "mobile_data_issue", "mms_issue"))
    g.add_argument("--min-subtasks", type=int, default=None)
    g.add_argument("--max-subtasks", type=int, default=None)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("verify", help="verify every task in a suite file")
    v.add_argument("--tasks", required=True)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sample", help="balanced subsample with persona assignment")
    s.add_argument("--tasks", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--quotas", help="JSON list of {intent, n_subtasks, count}")
    s.set_defaults(func=cmd_sample)

    r = sub.add_parser("run", help="execute trials and persist trajectories")
    r.add_argument("--tasks", required=True)
    r.add_argument("--out", required=True, help="store root directory")
    r.add_argument("--run-id")
    r.add_argument("--task-id")
    r.add_argument("--mode", choices=MODES, default="default")
    r.add_argument("--trials", type=int, default=4)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--max-steps", type=int, default=200)
    r.add_argument("--agent-policy", choices=("oracle", "null", "llm"), default="oracle")
    r.add_argument("--user-policy", choices=("oracle", "compliance", "llm"), default="oracle")
    r.add_argument("--model", default="gpt-4.1", help="model name for llm policies")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("evaluate", help="compute pass^k and breakdown tables for a run")
    e.add_argument("--store", required=True)
    e.add_argument("--run-id", required=True)
    e.add_argument("--tasks")
    e.add_argument("--k", type=int, default=None)
    e.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("replay", help="re-execute stored trajectories and check hashes")
    p.add_argument("--store", required=True)
    p.add_argument("--run-id", required=True)
    p.add_argument("--tasks", required=True)
    p.set_defaults(func=cmd_replay)

    x = sub.add_parser("export", help="emit plot-ready breakdown tables")
    x.add_argument("--store", required=True)
    x.add_argument("--run-id", required=True)
    x.add_argument("--tasks", required=True)
    x.add_argument("--k", type=int, default=None)
    x.set_defaults(func=cmd_export)

    m = sub.add_parser("render", help="print tasks as human-readable markdown")
    m.add_argument("--tasks", required=True)
    m.add_argument("--task-id")
    m.set_defaults(func=cmd_render)

    sv = sub.add_parser("serve", help="start the HTTP review/session API")
    sv.add_argument("--store", required=True)
    sv.add_argument("--tasks", required=True)
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8727)
    sv.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    peek = argparse.ArgumentParser(add_help=False)
    peek.add_argument("--config")
    known, _ = peek.parse_known_args(argv)
    defaults = {
        k.replace("-", "_"): v for k, v in _load_config_file(known.config).items()
    }
    parser = build_parser()
    if defaults:
        # Config-file values become defaults everywhere; explicit flags win.
        parser.set_defaults(**defaults)
        for action in parser._actions:
            if isinstance(action, argparse._SubParsersAction):
                for sub_parser in action.choices.values():
                    sub_parser.set_defaults(
                        **{k: v for k, v in defaults.items() if sub_parser.get_default(k) is not None or any(a.dest == k for a in sub_parser._actions)}
                    )
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FileNotFoundError, ValueError) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
