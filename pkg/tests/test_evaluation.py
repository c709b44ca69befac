from __future__ import annotations

import random
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duet.evaluation import (
    CriterionResult,
    TrialRecord,
    action_bin_label,
    breakdown_tables,
    check_actions,
    check_communication,
    check_db,
    check_env_assertions,
    check_nl_assertions,
    estimate_pass_hat_k_monte_carlo,
    pass_hat_k,
    pass_hat_k_task,
    pass_k_curve,
)
from duet.tasks import ExpectedAction
from duet.world import AGENT, USER, Event, Message, ToolCall, ToolResult


def _tool_event(index, actor, name, args, error=False):
    return Event(index, actor, ToolCall(name, args), ToolResult("out", is_error=error))


def _msg_event(index, actor, text):
    return Event(index, actor, Message(text), None)


# -- pass^k ------------------------------------------------------------------

def test_pass_hat_k_exact_values():
    assert pass_hat_k_task(2, 4, 2) == pytest.approx(1 / 6)
    assert pass_hat_k_task(4, 4, 3) == 1.0
    assert pass_hat_k_task(0, 4, 2) == 0.0
    assert pass_hat_k_task(3, 4, 1) == pytest.approx(0.75)


def test_pass_hat_k_argument_errors():
    with pytest.raises(ValueError):
        pass_hat_k_task(2, 4, 5)
    with pytest.raises(ValueError):
        pass_hat_k_task(2, 4, 0)


def _records(outcomes: dict[str, list[int]]):
    return [
        TrialRecord(task_id=t, trial_index=i, reward=r, criteria=(), stop_reason="user_stop", step_count=3)
        for t, rewards in outcomes.items()
        for i, r in enumerate(rewards)
    ]


def test_pass_hat_k_mean_over_tasks():
    records = _records({"a": [1, 1, 1, 1], "b": [1, 0, 1, 0]})
    assert pass_hat_k(records, 1) == pytest.approx((1.0 + 0.5) / 2)
    assert pass_hat_k(records, 2) == pytest.approx((1.0 + 1 / 6) / 2)


def test_pass_k_curve_monotone_nonincreasing():
    records = _records({"a": [1, 1, 0, 1], "b": [0, 1, 1, 0], "c": [1] * 4, "d": [0] * 4})
    curve = pass_k_curve(records)
    assert len(curve.values) == 4
    assert all(x >= y - 1e-12 for x, y in zip(curve.values, curve.values[1:]))
    assert all(0.0 <= v <= 1.0 for v in curve.values)


@settings(max_examples=30, deadline=None)
@given(
    c=st.integers(min_value=0, max_value=8),
    n=st.integers(min_value=1, max_value=8),
    seed=st.integers(0, 10**6),
)
def test_closed_form_matches_monte_carlo(c, n, seed):
    c = min(c, n)
    k = random.Random(seed).randint(1, n)
    rng = random.Random(seed + 1)
    estimate = estimate_pass_hat_k_monte_carlo(c, n, k, draws=20_000, rng=rng)
    assert abs(estimate - pass_hat_k_task(c, n, k)) < 0.02


# -- criterion families --------------------------------------------------------

def test_check_env_assertions_on_live_state(env, appendix_task):
    from duet.engine import apply_init
    from duet.world import GlobalState

    apply_init(env, list(appendix_task.init_actions))
    state = GlobalState(env.world, [])
    results = check_env_assertions(state, appendix_task.evaluation.env_assertions, env)
    assert len(results) == 1 and not results[0].passed
    assert results[0].kind == "env_assertion"


def test_check_actions_pass_and_order_free():
    expected = (
        ExpectedAction("a_0", USER, "toggle_airplane_mode", {}),
        ExpectedAction("b_1", USER, "reseat_sim_card", {}),
    )
    events = [
        _tool_event(0, USER, "reseat_sim_card", {}),
        _tool_event(1, USER, "get_battery_level", {}),  # unrelated extras ignored
        _tool_event(2, USER, "toggle_airplane_mode", {}),
    ]
    assert check_actions(events, expected).passed


def test_check_actions_missing_call():
    expected = (ExpectedAction("a_0", USER, "reseat_sim_card", {}),)
    assert not check_actions([_tool_event(0, USER, "toggle_airplane_mode", {})], expected).passed


def test_check_actions_wrong_requestor():
    expected = (ExpectedAction("a_0", USER, "toggle_airplane_mode", {}),)
    events = [_tool_event(0, AGENT, "toggle_airplane_mode", {})]
    assert not check_actions(events, expected).passed


def test_check_actions_argument_rules():
    expected = (ExpectedAction("r_0", AGENT, "refuel_data", {"line_id": "L1002", "gb": 2.0}),)
    exact = [_tool_event(0, AGENT, "refuel_data", {"line_id": "L1002", "gb": 2.0})]
    assert check_actions(exact, expected).passed
    extra_key = [
        _tool_event(0, AGENT, "refuel_data", {"line_id": "L1002", "gb": 2.0, "note": "x"})
    ]
    assert not check_actions(extra_key, expected).passed
    missing_key = [_tool_event(0, AGENT, "refuel_data", {"line_id": "L1002"})]
    assert not check_actions(missing_key, expected).passed


def test_check_communication_normalization():
    events = [_msg_event(0, AGENT, "Your total is $150.00, thanks")]
    assert check_communication(events, ["150.00"]).passed
    assert not check_communication([_msg_event(0, AGENT, "one hundred fifty")], ["150.00"]).passed
    assert check_communication([], []).passed
    # user messages do not count as agent communication
    assert not check_communication([_msg_event(0, USER, "150.00")], ["150.00"]).passed


def test_check_db():
    final = {"agent_db": "aa", "user_db": "bb"}
    assert check_db(final, {"agent_db": "aa", "user_db": "bb"}).passed
    assert not check_db(final, {"agent_db": "aa", "user_db": "XX"}).passed


def test_check_nl_assertions_stub_judges():
    events = [_msg_event(0, AGENT, "the SIM was the problem")]
    yes = lambda transcript, statement: True
    no = lambda transcript, statement: False
    assert check_nl_assertions(events, ["agent diagnosed the issue"], yes)[0].passed
    assert not check_nl_assertions(events, ["agent diagnosed the issue"], no)[0].passed
    errored = check_nl_assertions(events, ["agent diagnosed the issue"], None)[0]
    assert not errored.passed and "errored" in errored.detail


def test_reward_is_conjunction(appendix_task):
    # flipping any criterion to failed must force reward 0
    criteria = (
        CriterionResult("env_assertion", "a", True),
        CriterionResult("action_match", "b", True),
    )
    assert all(c.passed for c in criteria)
    for i in range(len(criteria)):
        flipped = tuple(
            replace(c, passed=False) if j == i else c for j, c in enumerate(criteria)
        )
        assert not all(c.passed for c in flipped)


# -- breakdowns ----------------------------------------------------------------

def test_action_bins_partition(universe):
    seen_bins = set()
    for task in universe:
        label = action_bin_label(task)
        seen_bins.add(label)
        if task.requires_transfer:
            assert label == "transfer"
    assert "transfer" in seen_bins
    assert seen_bins - {"transfer"} <= {"1-2", "3-4", "5-7", "8+"}


def test_trial_table_columns(universe):
    from duet.evaluation import TRIAL_TABLE_COLUMNS, trial_table

    tasks = universe[:2]
    records = [
        TrialRecord(
            task_id=t.id, trial_index=i, reward=1, criteria=(),
            stop_reason="user_stop", step_count=4,
        )
        for t in tasks
        for i in range(2)
    ]
    csv_text = trial_table(records, tasks)
    header, *rows = csv_text.strip().splitlines()
    assert header == "task_id,trial,reward,stop_reason,intent,persona,n_actions,n_subtasks"
    assert TRIAL_TABLE_COLUMNS == tuple(header.split(","))
    assert len(rows) == 4
    assert rows[0].endswith(f",{tasks[0].intent},None,{tasks[0].n_actions},{tasks[0].n_subtasks}")


def test_breakdown_tables_structure(universe):
    tasks = [t for t in universe if t.n_subtasks <= 2][:6]
    records = []
    for mode in ("default", "no_user"):
        for task in tasks:
            for trial in range(2):
                records.append(
                    TrialRecord(
                        task_id=task.id,
                        trial_index=trial,
                        reward=1 if trial == 0 else 0,
                        criteria=(),
                        stop_reason="user_stop",
                        step_count=5,
                        mode=mode,
                    )
                )
    rows = breakdown_tables(records, tasks)
    modes = {r.mode for r in rows}
    dims = {r.dimension for r in rows}
    assert modes == {"default", "no_user"}
    assert dims == {"overall", "intent", "persona", "action_bin", "subtask_count"}
    overall = [r for r in rows if r.dimension == "overall" and r.mode == "default"]
    assert {r.k for r in overall} == {1, 2}
    for dimension in dims:
        for mode in modes:
            rows_d = [r for r in rows if r.dimension == dimension and r.mode == mode and r.k == 1]
            assert sum(r.n_tasks for r in rows_d) == len(tasks)  # partition: each task once
            assert sum(r.task_proportion for r in rows_d) == pytest.approx(1.0)
