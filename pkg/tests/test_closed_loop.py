import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lqstackelberg import (DeltaSingular, GameProblem, attach_costates,
                           effective_trajectory_identity_check, rollout, solve_closed_loop,
                           solve_feedback_stackelberg)
from lqstackelberg.oracle import augmented_follower_value

from conftest import random_problem

# produced by the augmented-state follower LQR and by direct simulation
ORACLE_JF = 362.5868908967712
SIMULATED_JL = 162.31933430446466
KBAR = (-0.915462228696431, -0.24927418807710477, -0.2492509418406693,
        -0.24893243661999392, -0.24367509986684435, -0.1875)
GBAR = (0.0, -0.13023129656956228, -0.13022967625236836, -0.13020147723354542,
        -0.1300037044733492, -0.13703567488047097)


def test_benchmark_frozen_values(bench):
    sol = solve_closed_loop(bench)
    assert sol.predicted_Jf == pytest.approx(ORACLE_JF, rel=1e-12)
    assert sol.predicted_Jl == pytest.approx(SIMULATED_JL, rel=1e-12)
    np.testing.assert_allclose([K[0, 0] for K in sol.leader_schedule.current], KBAR, atol=1e-12)
    np.testing.assert_allclose([G[0, 0] for G in sol.leader_schedule.memory], GBAR, atol=1e-12)


def test_terminal_parameters_by_hand(bench):
    # Delta_5 Kbar_5 + M2cal_5 = (32/3) Kbar_5 + 2 = 0
    sol = solve_closed_loop(bench)
    assert sol.leader_schedule.current[5][0, 0] == pytest.approx(-0.1875, abs=1e-14)


def test_first_stage_carries_the_whole_leader_action(bench):
    sol = solve_closed_loop(bench)
    assert np.all(sol.leader_schedule.memory[0] == 0)
    np.testing.assert_array_equal(sol.leader_schedule.current[0], sol.effective_leader[0])


def _check_instance(p):
    sol = solve_closed_loop(p)
    assert sol.max_S <= 1e-10
    traj = attach_costates(rollout(p, sol.follower_schedule, sol.leader_schedule),
                           sol.follower_rec, sol.leader_rec)
    scale = 1.0 + abs(sol.predicted_Jf)
    assert abs(traj.total_Jf - sol.predicted_Jf) <= 1e-9 * scale
    assert abs(traj.total_Jl - sol.predicted_Jl) <= 1e-9 * (1.0 + abs(sol.predicted_Jl))
    assert traj.stationarity_ok(1e-8)
    assert effective_trajectory_identity_check(sol, traj).passed
    # the follower's strategy is a best response within the memory class
    assert abs(augmented_follower_value(p, sol.leader_schedule) - sol.predicted_Jf) <= 1e-9 * scale
    for k in range(1, p.N + 1):
        st_k = sol.follower_rec.stages[k]
        r = st_k.Delta @ sol.leader_schedule.current[k] + st_k.M2cal
        assert np.linalg.norm(r) <= 1e-10 * (1 + np.linalg.norm(st_k.M2cal))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_invariants_on_random_instances(seed):
    _check_instance(random_problem(np.random.default_rng(seed)))


def test_three_state_instance():
    _check_instance(random_problem(np.random.default_rng(99), n=3, m1=2, m2=2, N=6))


def test_horizon_zero_matches_feedback():
    p = random_problem(np.random.default_rng(1), n=2, N=0)
    cl, fb = solve_closed_loop(p), solve_feedback_stackelberg(p)
    np.testing.assert_allclose(cl.effective_leader[0], fb.Kl[0], atol=1e-13)
    np.testing.assert_allclose(cl.effective_follower[0], fb.Kf[0], atol=1e-13)
    assert cl.predicted_Jl == pytest.approx(fb.predicted_Jl, rel=1e-13)


def test_zero_initial_state_costs_nothing(bench):
    sol = solve_closed_loop(bench.replace(x0=[0.0]))
    assert sol.predicted_Jf == 0.0 and sol.predicted_Jl == 0.0


def test_ill_conditioned_delta_reports_stage():
    p = GameProblem(A=[[1.0]], B1=[[1.0]], B2=[[1e7, 0.0]], Q=[[1.0]], R1=[[1.0]],
                    R2=np.eye(2), Qbar=[[1.0]], R1bar=[[1.0]], R2bar=np.eye(2),
                    P_terminal=[[1.0]], Pbar_terminal=[[1.0]], N=2, x0=[1.0])
    with pytest.raises(DeltaSingular, match="stage 2"):
        solve_closed_loop(p)


def test_identity_check_flags_tampered_memory(bench):
    sol = solve_closed_loop(bench)
    traj = rollout(bench, sol.follower_schedule, sol.leader_schedule)
    mem = list(sol.leader_schedule.memory)
    mem[3] = mem[3] + 0.01
    tampered = type(sol)(**{**sol.__dict__,
                            "leader_schedule": type(sol.leader_schedule)(
                                sol.leader_schedule.current, tuple(mem))})
    rep = effective_trajectory_identity_check(tampered, traj)
    assert not rep.passed and rep.residuals[0] is None
