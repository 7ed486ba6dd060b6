"""What the memory gain does.

The leader announces ul[k] = Kbar x[k] + Gbar x[k-1]. Kbar is chosen so the
follower's value is stationary in it, so the follower gains nothing from
deviating, and Gbar is what makes the announced law reproduce the leader's
preferred action along the equilibrium path.
"""
import numpy as np

from lqstackelberg import GainSchedule, follower_backward, benchmark_problem, rollout, solve_closed_loop
from lqstackelberg.oracle import augmented_follower_value

p = benchmark_problem()
sol = solve_closed_loop(p)
t = rollout(p, sol.follower_schedule, sol.leader_schedule)

for k in range(1, p.N + 1):
    announced = sol.leader_schedule.current[k] @ t.x[k] + sol.leader_schedule.memory[k] @ t.x[k - 1]
    target = sol.effective_leader[k] @ t.x[k]
    print(k, announced[0], target[0])

# cross term S vanishes identically under these gains
print("max |S| =", sol.max_S)

# follower cannot do better than its Riccati strategy, even with memory of its own
print("Riccati", sol.predicted_Jf, "augmented LQR", augmented_follower_value(p, sol.leader_schedule))

# dropping the memory term changes the follower's reply and the leader's payoff
plain = GainSchedule(sol.leader_schedule.current, tuple(np.zeros_like(G) for G in sol.leader_schedule.memory))
reply = follower_backward(p, plain)
t2 = rollout(p, reply.follower_gains, plain)
print("leader cost with memory", t.total_Jl, "without", t2.total_Jl)
