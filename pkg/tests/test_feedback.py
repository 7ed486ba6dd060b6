import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lqstackelberg import (LeaderStagePDFailure, constrained_lqr, rollout,
                           solve_feedback_stackelberg, standard_lqr)
from lqstackelberg.benchmark import TABLE1
from lqstackelberg.feedback import leader_stage_value, lqr_costate_check

from conftest import random_problem


def test_table1_and_costs(bench):
    sol = solve_feedback_stackelberg(bench)
    for k in range(6):
        assert sol.Kf[k][0, 0] == pytest.approx(TABLE1["follower"][k], abs=2e-3)
        assert sol.Kl[k][0, 0] == pytest.approx(TABLE1["leader"][k], abs=2e-3)
    assert sol.predicted_Jf == pytest.approx(367.8335, abs=1e-2)
    assert sol.predicted_Jl == pytest.approx(165.0297, abs=1e-2)


def test_terminal_gains_exact(bench):
    sol = solve_feedback_stackelberg(bench)
    assert sol.Kf[5][0, 0] == pytest.approx(-1.5, abs=1e-14)
    assert sol.Kl[5][0, 0] == pytest.approx(-0.75, abs=1e-14)


def test_scalar_lqr_by_hand():
    # P_1 = 1 + 1 - 1/2 = 3/2, P_0 = 1 + 3/2 - (9/4)/(5/2) = 8/5
    sol = standard_lqr(1, 1, 1, 1, 1, 1, x0=[1.0])
    assert sol.predicted_J == pytest.approx(1.6, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_multiplier_route_equals_standard_lqr(seed):
    p = random_problem(np.random.default_rng(seed))
    s = standard_lqr(p.A, p.B1, p.Q, p.R1, p.P_terminal, p.N, p.x0)
    c = constrained_lqr(p.A, p.B1, p.Q, p.R1, p.P_terminal, p.N, p.x0)
    for a, b in zip(c.K, s.K):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    for a, b in zip(c.P, s.P):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)
    assert max(float(np.max(np.abs(b))) for b in c.beta) <= 1e-10
    assert lqr_costate_check(c, p.A, p.B1, p.Q, p.x0) <= 1e-9 * (1 + max(np.max(np.abs(P)) for P in s.P))


def test_leader_gain_minimizes_stage_value(bench):
    sol = solve_feedback_stackelberg(bench)
    for k in range(6):
        base = leader_stage_value(bench, sol.Pf[k + 1], sol.Pl[k + 1], sol.Kl[k])
        np.testing.assert_allclose(base, sol.Pl[k], rtol=1e-12)
        for d in (-1e-3, 1e-3):
            assert leader_stage_value(bench, sol.Pf[k + 1], sol.Pl[k + 1], sol.Kl[k] + d) > base


def test_simulation_reproduces_predicted_costs():
    p = random_problem(np.random.default_rng(12), n=2, N=5)
    sol = solve_feedback_stackelberg(p)
    traj = rollout(p, sol.follower_schedule, sol.leader_schedule)
    assert traj.total_Jf == pytest.approx(sol.predicted_Jf, rel=1e-10)
    assert traj.total_Jl == pytest.approx(sol.predicted_Jl, rel=1e-10)


def test_non_convex_leader_stage_raises(bench):
    with pytest.raises(LeaderStagePDFailure, match="stage 5"):
        solve_feedback_stackelberg(bench.replace(Pbar_terminal=[[-100.0]]))
