"""Closed-loop Stackelberg strategies with one-step memory.

One backward sweep determines the leader's memory strategy ``(Kbar, Gbar)``
together with both players' Riccati sequences. Per stage ``k = N..0``:

1. follower stage quantities from ``P[k+1]``, ``S[k+1]``;
2. ``Kbar[k] = -Delta^{-1} M2cal`` (stationarity of ``P[k]`` in ``Kbar[k]``);
3. leader stage quantities from ``Pbar[k+1]``;
4. ``Gbar[k+1]`` from the stage-(k+1) gains and the stage-k closed-loop
   transition (only defined once stage k is known, hence one step late);
5. ``P[k]`` including the ``Gbar[k+1]' Delta[k+1] Gbar[k+1]`` term;
6. ``Pbar[k]``.

Stage 0 has no previous state, so ``Gbar[0] = 0`` and the leader must realize
its optimal action through ``Kbar[0]`` alone: ``Kbar[0]`` is the leader's
state-feedback gain at stage 0 rather than the stationary value.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteValue
from .follower import (FollowerRecursion, coupled_feedback_term, follower_stage,
                       follower_value_update)
from .leader import LeaderRecursion, leader_stage, leader_value_update
from .linalg import InvertibleSolver, asymmetry, symmetrize
from .model import GainSchedule, GameProblem


@dataclass(frozen=True, eq=False)
class ClosedLoopSolution:
    problem: GameProblem
    leader_schedule: GainSchedule
    follower_rec: FollowerRecursion
    leader_rec: LeaderRecursion
    effective_leader: list
    effective_follower: list
    predicted_Jf: float
    predicted_Jl: float
    stationary_gain: list
    stationarity_residual: list

    @property
    def N(self):
        return self.problem.N

    @property
    def follower_schedule(self) -> GainSchedule:
        return self.follower_rec.follower_gains

    @property
    def max_S(self) -> float:
        return max(float(np.max(np.abs(S))) if S.size else 0.0 for S in self.follower_rec.S)


def solve_closed_loop(problem: GameProblem) -> ClosedLoopSolution:
    N, n, m2 = problem.N, problem.n, problem.m2
    A, B1, B2 = problem.A, problem.B1, problem.B2

    P = [None] * (N + 2)
    Pbar = [None] * (N + 2)
    S_used = [np.zeros((n, n)) for _ in range(N + 2)]
    P[N + 1] = problem.P_terminal.copy()
    Pbar[N + 1] = problem.Pbar_terminal.copy()
    fstages = [None] * (N + 1)
    lstages = [None] * (N + 1)
    Kbar = [None] * (N + 1)
    Gbar = [np.zeros((m2, n)) for _ in range(N + 2)]
    stationary = [None] * (N + 1)
    eff_l = [None] * (N + 1)
    eff_f = [None] * (N + 1)
    fskew = [0.0] * (N + 2)
    lskew = [0.0] * (N + 2)

    for k in range(N, -1, -1):
        fst = follower_stage(P[k + 1], S_used[k + 1], problem, stage=k)
        fstages[k] = fst
        delta = InvertibleSolver(fst.Delta, name="Delta", stage=k)
        stationary[k] = -delta.solve(fst.M2cal)
        Kbar[k] = stationary[k]

        lst = leader_stage(Pbar[k + 1], fst, S_used[k + 1], problem, k=k)
        lstages[k] = lst
        eff_l[k] = lst.gain
        eff_f[k] = -fst.solve_gamma(lst.MFcal)
        if k == 0:
            Kbar[0] = eff_l[0]

        if k < N:
            transition = A + B1 @ eff_f[k] + B2 @ eff_l[k]
            Gbar[k + 1] = (eff_l[k + 1] - stationary[k + 1]) @ transition
            Pk = follower_value_update(problem, fst, P[k + 1], S_used[k + 1], Kbar[k],
                                       Gbar[k + 1], fstages[k + 1].Delta)
        else:
            Pk = follower_value_update(problem, fst, P[k + 1], S_used[k + 1], Kbar[k])
        fskew[k] = asymmetry(Pk)
        P[k] = symmetrize(Pk)
        # S[k] = Gbar[k]'(Delta Kbar[k] + M2cal) vanishes because Kbar[k] is stationary
        # (and Gbar[0] = 0); the exact product is formed below once Gbar[k] is known.

        Pb = leader_value_update(problem, fst, lst, Pbar[k + 1], S_used[k + 1])
        lskew[k] = asymmetry(Pb)
        Pbar[k] = symmetrize(Pb)
        if not (np.all(np.isfinite(P[k])) and np.all(np.isfinite(Pbar[k]))):
            raise NonFiniteValue("closed-loop recursion produced non-finite values", stage=k)

    residual = [fstages[k].Delta @ Kbar[k] + fstages[k].M2cal for k in range(N + 1)]
    S = [Gbar[k].T @ residual[k] for k in range(N + 1)] + [np.zeros((n, n))]

    current = [-fstages[k].solve_gamma(
        coupled_feedback_term(fstages[k], S_used[k + 1], problem, Kbar[k])) for k in range(N + 1)]
    memory = [-fstages[k].solve_gamma(fstages[k].MB @ Gbar[k]) for k in range(N + 1)]
    follower_rec = FollowerRecursion(P=P, S=S, stages=fstages,
                                     follower_gains=GainSchedule(tuple(current), tuple(memory)),
                                     asymmetry=fskew)
    leader_rec = LeaderRecursion(Pbar=Pbar, stages=lstages, leader_state_feedback=eff_l,
                                 asymmetry=lskew)
    schedule = GainSchedule(tuple(Kbar), tuple(Gbar[: N + 1]))
    x0 = problem.x0
    return ClosedLoopSolution(
        problem=problem,
        leader_schedule=schedule,
        follower_rec=follower_rec,
        leader_rec=leader_rec,
        effective_leader=eff_l,
        effective_follower=eff_f,
        predicted_Jf=float(x0 @ P[0] @ x0),
        predicted_Jl=float(x0 @ Pbar[0] @ x0),
        stationary_gain=stationary,
        stationarity_residual=residual,
    )


@dataclass
class IdentityReport:
    residuals: list
    bounds: list
    passed: bool

    @property
    def max_residual(self) -> float:
        vals = [r for r in self.residuals if r is not None]
        return max(vals) if vals else 0.0


def effective_trajectory_identity_check(sol: ClosedLoopSolution, traj, tol=1e-9) -> IdentityReport:
    """Compare ``Kbar x[k] + Gbar x[k-1]`` with the effective leader gain times ``x[k]``.

    Stage 0 has no previous state and is reported as ``None`` (skipped).
    """
    s = sol.leader_schedule
    residuals = [None]
    bounds = [None]
    for k in range(1, sol.N + 1):
        x, xp = traj.x[k], traj.x[k - 1]
        r = s.current[k] @ x + s.memory[k] @ xp - sol.effective_leader[k] @ x
        residuals.append(float(np.linalg.norm(r)))
        bounds.append(tol * (1.0 + float(np.linalg.norm(x))))
    passed = all(r <= b for r, b in zip(residuals[1:], bounds[1:]))
    return IdentityReport(residuals=residuals, bounds=bounds, passed=passed)
