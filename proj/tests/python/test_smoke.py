import math

import pytest

import mecq


def test_scenario_roundtrip():
    s = mecq.generate_scenario(3)
    assert s.n_bs == 2 and s.n_users == 4
    t = mecq.Scenario.from_text(s.to_text())
    assert t.dl_gain == s.dl_gain
    assert t.task_bits == s.task_bits


def test_overrides_and_errors():
    s = mecq.generate_scenario(1, {"M": 3, "I": 2})
    assert s.n_users == 3 and s.n_ul == 2
    with pytest.raises(ValueError):
        mecq.generate_scenario(1, {"no_such_key": 1})


def test_idle_delays():
    s = mecq.generate_scenario(2, {"task_types": "edge,edge,edge,edge"})
    r = mecq.evaluate_idle(s)
    assert math.isinf(r["max_delay"])
    assert r["serving_bs"] == [-1] * 4


def test_action_counts_agree():
    s = mecq.generate_scenario(1, {"N": 1, "M": 2, "I": 2, "J": 2, "N_a": 2})
    assert mecq.enumerate_count(s) == 169
    assert mecq.action_count(2, 2, 2, 2) == 169
    assert mecq.action_count(4, 3, 3, 2) == 73 * 73
    assert mecq.action_count(9, 20, 20, 10) > 2**64


def test_oracle_and_learner():
    over = {"N": 1, "M": 2, "I": 2, "J": 2, "N_a": 2, "budget": 3000}
    s = mecq.generate_scenario(5, over)
    opt = mecq.solve_exhaustive(s, threads=1)
    assert opt["evaluated"] == 169
    run = mecq.run("multistack", 5, over, trace=True)
    assert len(run["t_max"]) == 3000
    assert run["best_t_max"] >= opt["best_max_delay"] * (1 - 1e-12)


def test_run_is_deterministic():
    over = {"budget": 300, "window": 50}
    a = mecq.run("qlearning", 2, over, trace=True)
    b = mecq.run("qlearning", 2, over, trace=True)
    assert a["t_max"] == b["t_max"]
    assert set(mecq.algorithms()) >= {"multistack", "qlearning", "random"}


def test_verifiers():
    split = mecq.verify_split(3)
    assert all(r["rel_error"] < 1e-12 for r in split if r["equation"] == "split/delay")
    gains = mecq.verify_gains(3)
    assert all(r["rel_error"] < 1e-9 for r in gains if r["equation"].startswith("edge/"))
    counts = mecq.verify_counts(2, 1, 1)
    assert all(r["rel_error"] == 0 for r in counts if r["equation"] == "count/budgeted")
