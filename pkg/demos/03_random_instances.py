"""Invariant sweep over random two-state games."""
import numpy as np

from lqstackelberg import GameProblem, attach_costates, rollout, solve_closed_loop
from lqstackelberg.oracle import augmented_follower_value, reduced_lqr_crosscheck

rng = np.random.default_rng(0)


def spd(d):
    M = rng.standard_normal((d, d))
    return M @ M.T + 0.5 * np.eye(d)


worst = dict(cost=0.0, best_response=0.0, S=0.0, reduced=0.0)
for trial in range(100):
    n, N = 2, int(rng.integers(1, 7))
    p = GameProblem(A=rng.uniform(-1, 1, (n, n)), B1=rng.standard_normal((n, 1)),
                    B2=rng.standard_normal((n, 2)), Q=spd(n), R1=spd(1), R2=spd(2),
                    Qbar=spd(n), R1bar=spd(1), R2bar=spd(2), P_terminal=spd(n),
                    Pbar_terminal=spd(n), N=N, x0=rng.standard_normal(n))
    sol = solve_closed_loop(p)
    t = attach_costates(rollout(p, sol.follower_schedule, sol.leader_schedule),
                        sol.follower_rec, sol.leader_rec)
    worst["cost"] = max(worst["cost"], abs(t.total_Jl - sol.predicted_Jl) / (1 + sol.predicted_Jl))
    worst["best_response"] = max(worst["best_response"],
                                 abs(augmented_follower_value(p, sol.leader_schedule) - sol.predicted_Jf))
    worst["S"] = max(worst["S"], sol.max_S)
    rep = reduced_lqr_crosscheck(p, sol.follower_rec, sol.leader_rec)
    worst["reduced"] = max(worst["reduced"], max(c.value for c in rep.checks.values()))

for k, v in worst.items():
    print(f"{k:14s} {v:.2e}")
