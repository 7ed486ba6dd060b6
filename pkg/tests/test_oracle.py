import numpy as np
import pytest

from lqstackelberg import DimensionTooLarge, GainSchedule, solve_closed_loop
from lqstackelberg.model import scalar_problem
from lqstackelberg.oracle import (SearchConfig, augmented_follower_value, brute_force_follower,
                                  directional_derivative, finite_diff_stationarity,
                                  reduced_lqr_crosscheck)

UNIT = dict(A=1, B1=1, B2=1, Q=1, R1=1, R2=1, Qbar=1, R1bar=1, R2bar=1,
            P_terminal=1, Pbar_terminal=1, N=1, x0=1)


def test_unit_instance_recovers_hand_lqr_value():
    # with the leader silent the follower solves a scalar LQR: P_0 = 8/5
    p = scalar_problem(**UNIT)
    rep = brute_force_follower(p, GainSchedule.zeros(1, 1, 1))
    assert rep.best_objective == pytest.approx(1.6, abs=1e-4)
    assert rep.analytic_objective == pytest.approx(1.6, abs=1e-14)
    assert rep.passed


def test_zero_initial_state_has_zero_gap():
    p = scalar_problem(**{**UNIT, "x0": 0})
    rep = brute_force_follower(p, GainSchedule.zeros(1, 1, 1), SearchConfig(levels=1, starts=1))
    assert rep.gap == 0.0 and rep.passed


def test_truncated_benchmark_is_a_best_response(bench):
    full = solve_closed_loop(bench).leader_schedule
    leader = GainSchedule(full.current[:2], full.memory[:2])
    rep = brute_force_follower(bench.replace(N=1), leader)
    assert rep.gap >= -1e-6 * (1 + abs(rep.analytic_objective))
    assert rep.passed


def test_search_is_deterministic(bench):
    p = bench.replace(N=1)
    leader = GainSchedule(*(tuple(s[:2]) for s in (solve_closed_loop(bench).leader_schedule.current,
                                                    solve_closed_loop(bench).leader_schedule.memory)))
    cfg = SearchConfig(seed=3, levels=2)
    a, b = brute_force_follower(p, leader, cfg), brute_force_follower(p, leader, cfg)
    assert a.best_objective == b.best_objective
    np.testing.assert_array_equal(a.best_params, b.best_params)


def test_parameter_budget(bench):
    with pytest.raises(DimensionTooLarge):
        brute_force_follower(bench.replace(N=6), GainSchedule.zeros(6, 1, 1))


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(resolution=2)
    with pytest.raises(ValueError):
        SearchConfig(bound=float("inf"))


def test_stationarity_at_terminal_gain(bench):
    sol = solve_closed_loop(bench)
    rep = finite_diff_stationarity(bench, sol, h=1e-5, probes=6)
    assert rep.passed
    assert rep.checks["stage_5"].value <= 1e-6
    assert "stage_0" not in rep.checks


def test_derivative_positive_above_stationary_gain(bench):
    # x'P_5(K)x is convex in K with curvature Delta_5 = 32/3
    sol = solve_closed_loop(bench)
    K = sol.leader_schedule.current[5] + 0.1
    d = directional_derivative(bench, sol, 5, K, np.array([[1.0]]), np.array([1.0]), 1e-5)
    assert d == pytest.approx(2 * (32 / 3) * 0.1, rel=1e-6)


def test_central_difference_is_exact_for_quadratic_map(bench):
    # the map is quadratic, so every step size gives the same derivative
    sol = solve_closed_loop(bench)
    K = sol.leader_schedule.current[3] - 0.05
    E, x = np.array([[1.0]]), np.array([1.3])
    vals = [directional_derivative(bench, sol, 3, K, E, x, h) for h in (1e-3, 5e-4, 1e-4)]
    assert max(vals) - min(vals) <= 1e-7 * abs(vals[0])


def test_step_size_range(bench):
    with pytest.raises(ValueError):
        finite_diff_stationarity(bench, solve_closed_loop(bench), h=1e-2)


def test_tampered_gain_fails_stationarity(bench):
    sol = solve_closed_loop(bench)
    gains = list(sol.leader_schedule.current)
    gains[5] = np.array([[-0.2]])
    rep = finite_diff_stationarity(bench, sol, gains=gains)
    assert not rep.checks["stage_5"].passed and rep.checks["stage_4"].passed


def test_no_leader_channel_is_trivially_stationary():
    p = scalar_problem(**{**UNIT, "B2": 0, "N": 3})
    sol = solve_closed_loop(p)
    assert all(np.all(K == 0) for K in sol.leader_schedule.current)
    assert finite_diff_stationarity(p, sol).passed
    assert reduced_lqr_crosscheck(p, sol.follower_rec, sol.leader_rec).passed


def test_reduced_crosscheck_benchmark(bench):
    sol = solve_closed_loop(bench)
    rep = reduced_lqr_crosscheck(bench, sol.follower_rec, sol.leader_rec)
    assert rep.passed and rep.checks["gain_deviation"].value <= 1e-10


def test_reduced_crosscheck_detects_wrong_leader(bench):
    sol = solve_closed_loop(bench)
    bad = type(sol.leader_rec)(Pbar=sol.leader_rec.Pbar, stages=sol.leader_rec.stages,
                               leader_state_feedback=[K + 1e-6 for K in sol.leader_rec.leader_state_feedback],
                               asymmetry=sol.leader_rec.asymmetry)
    assert not reduced_lqr_crosscheck(bench, sol.follower_rec, bad).passed


def test_augmented_value_scalar_unit():
    assert augmented_follower_value(scalar_problem(**UNIT), GainSchedule.zeros(1, 1, 1)) == pytest.approx(1.6)
