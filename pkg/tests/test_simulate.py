import math

import numpy as np
import pytest

from lqstackelberg import (GainSchedule, NonFiniteValue, attach_costates, rollout,
                           solve_closed_loop)


def test_costs_are_stage_sums_plus_terminal(bench):
    sol = solve_closed_loop(bench)
    t = rollout(bench, sol.follower_schedule, sol.leader_schedule)
    xT = t.x[-1]
    assert len(t.x) == bench.N + 2 and len(t.uf) == bench.N + 1
    assert t.total_Jf == pytest.approx(math.fsum(t.stage_Jf) + float(xT @ bench.P_terminal @ xT), rel=1e-15)
    assert t.total_Jl == pytest.approx(math.fsum(t.stage_Jl) + float(xT @ bench.Pbar_terminal @ xT), rel=1e-15)


def test_zero_state_zero_cost(bench):
    p = bench.replace(x0=[0.0])
    sol = solve_closed_loop(p)
    t = rollout(p, sol.follower_schedule, sol.leader_schedule)
    assert t.total_Jf == 0.0 and t.total_Jl == 0.0


def test_divergence_is_reported(bench):
    huge = GainSchedule.memoryless([np.array([[1e80]])] * 6)
    with pytest.raises(NonFiniteValue):
        rollout(bench, huge, huge)


def test_horizon_mismatch(bench):
    with pytest.raises(ValueError):
        rollout(bench, GainSchedule.zeros(4, 1, 1), GainSchedule.zeros(5, 1, 1))


def test_costates_need_attaching(bench):
    sol = solve_closed_loop(bench)
    t = rollout(bench, sol.follower_schedule, sol.leader_schedule)
    with pytest.raises(ValueError):
        t.stationarity_ok()
    t = attach_costates(t, sol.follower_rec, sol.leader_rec)
    assert t.stationarity_ok(1e-10)
    assert len(t.lambda_f) == bench.N + 1


def test_wrong_controls_break_stationarity(bench):
    sol = solve_closed_loop(bench)
    fs = sol.follower_schedule
    bent = GainSchedule(tuple(K * 1.01 for K in fs.current), fs.memory)
    t = attach_costates(rollout(bench, bent, sol.leader_schedule), sol.follower_rec, sol.leader_rec)
    assert not t.stationarity_ok(1e-8)
