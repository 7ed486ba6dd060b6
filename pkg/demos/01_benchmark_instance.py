"""Scalar benchmark: feedback versus one-step-memory closed-loop strategies."""
import numpy as np

from lqstackelberg import benchmark_problem, rollout, solve_closed_loop, solve_feedback_stackelberg

p = benchmark_problem()
print("x[k+1] = 3 x + uf + ul, horizon", p.N, "x0 =", p.x0[0])

fb = solve_feedback_stackelberg(p)
cl = solve_closed_loop(p)

# gains per stage; closed-loop gains are the effective ones along the path
print("\n k   feedback uf  ul        closed-loop uf  ul       Kbar     Gbar")
for k in range(p.N + 1):
    print(f"{k:2d}   {fb.Kf[k][0, 0]:9.4f} {fb.Kl[k][0, 0]:8.4f}    "
          f"{cl.effective_follower[k][0, 0]:9.4f} {cl.effective_leader[k][0, 0]:8.4f}   "
          f"{cl.leader_schedule.current[k][0, 0]:7.4f}  {cl.leader_schedule.memory[k][0, 0]:7.4f}")

# the Riccati predictions agree with brute simulation
for name, sol in (("feedback", fb), ("closed-loop", cl)):
    t = rollout(p, sol.follower_schedule, sol.leader_schedule)
    print(f"\n{name:12s} Jf {sol.predicted_Jf:10.4f} (sim {t.total_Jf:10.4f})"
          f"  Jl {sol.predicted_Jl:10.4f} (sim {t.total_Jl:10.4f})")

print("\nleader saves", round(fb.predicted_Jl - cl.predicted_Jl, 4),
      "and follower saves", round(fb.predicted_Jf - cl.predicted_Jf, 4))
