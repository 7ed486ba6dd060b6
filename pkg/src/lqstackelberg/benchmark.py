"""Embedded scalar benchmark instance and its published gain tables.

The printed values are kept verbatim (four decimals) so that reproductions
can report per-entry deviations.
"""
from .model import scalar_problem

INSTANCE = dict(A=3.0, B1=1.0, B2=1.0, Q=2.0, R1=1.0, R2=10.0,
                Qbar=1.0, R1bar=1.0, R2bar=2.0,
                P_terminal=2.0, Pbar_terminal=2.0, N=5, x0=5.0)


def benchmark_problem():
    return scalar_problem(**INSTANCE)


STAGES = (0, 1, 2, 3, 4, 5)

# feedback (memoryless) Stackelberg gains
TABLE1 = {
    "follower": (-1.9350, -1.9349, -1.9348, -1.9333, -1.9107, -1.5000),
    "leader": (-0.9335, -0.9335, -0.9334, -0.9322, -0.9156, -0.7500),
}

# closed-loop strategies written as current-state feedback along the trajectory
TABLE2 = {
    "follower": (-1.8124, -1.8136, -1.8889, -1.8873, -1.8576, -1.5000),
    "leader": (-0.9062, -0.9062, -0.9068, -0.9142, -0.8988, -0.7500),
}

# leader memory-strategy parameters; no memory gain is printed for k = 0
TABLE3 = {
    "Kbar": (-0.9062, -0.2497, -0.2493, -0.2489, -0.2437, -0.1875),
    "Gbar": (None, -0.1876, -0.1874, -0.1860, -0.1300, -0.1370),
}

COSTS = {
    "feedback": {"follower": 367.8335, "leader": 165.0297},
    "closed_loop": {"follower": 366.4332, "leader": 160.9312},
}

# entries the acceptance gate reports instead of asserting
SUSPECT_STAGES = (1, 2, 3)
TABLE_TOL = 2e-3
