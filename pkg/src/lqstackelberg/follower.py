"""Follower's best response to a one-step-memory leader strategy.

Backward recursion for the follower's value matrices ``P[k]`` and the
memory cross term ``S[k]``; the control law is

    uf[k] = -GammaF^{-1} (M1 + MB Kbar[k] + B1' S[k+1]') x[k]
            - GammaF^{-1} MB Gbar[k] x[k-1].

Throughout, ``S[k]`` is stored in the orientation of its defining update
``S[k] = Gbar[k]' (Delta Kbar[k] + M2cal)``, i.e. it multiplies
``x[k-1]'(.)x[k]``. Wherever the co-state needs ``S`` acting on the previous
state it therefore appears transposed.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GammaNotPD, NonFiniteValue
from .linalg import PDSolver, asymmetry, symmetrize
from .model import GainSchedule, GameProblem


@dataclass(frozen=True, eq=False)
class FollowerStageData:
    M1: np.ndarray
    M2: np.ndarray
    MB: np.ndarray
    GammaF: np.ndarray
    Delta: np.ndarray
    M2cal: np.ndarray
    gamma: PDSolver = field(repr=False)

    def solve_gamma(self, rhs):
        return self.gamma.solve(rhs)


@dataclass(frozen=True, eq=False)
class FollowerRecursion:
    P: list
    S: list
    stages: list
    follower_gains: GainSchedule
    asymmetry: list

    @property
    def N(self):
        return len(self.stages) - 1

    def min_eigenvalues(self):
        """Smallest eigenvalue of each ``P[k]``; PSD-ness is reported, not enforced."""
        return [float(np.linalg.eigvalsh(P).min()) for P in self.P]


def follower_stage(P_next, S_next, problem: GameProblem, stage=None) -> FollowerStageData:
    """Stage quantities evaluated at ``P[k+1] = P_next``, ``S[k+1] = S_next``."""
    A, B1, B2 = problem.A, problem.B1, problem.B2
    P_next = np.asarray(P_next, dtype=float)
    S_next = np.asarray(S_next, dtype=float)
    M1 = B1.T @ P_next @ A
    M2 = B2.T @ P_next @ A
    MB = B1.T @ P_next @ B2
    GammaF = symmetrize(problem.R1 + B1.T @ P_next @ B1)
    gamma = PDSolver(GammaF, GammaNotPD, name="GammaF", stage=stage)
    GinvMB = gamma.solve(MB)
    Delta = symmetrize(problem.R2 + B2.T @ P_next @ B2 - MB.T @ GinvMB)
    M2cal = M2 - MB.T @ gamma.solve(M1) + (B2 - B1 @ GinvMB).T @ S_next.T
    return FollowerStageData(M1=M1, M2=M2, MB=MB, GammaF=GammaF, Delta=Delta,
                             M2cal=M2cal, gamma=gamma)


def coupled_feedback_term(st: FollowerStageData, S_next, problem: GameProblem, Kbar):
    """``M1 + MB Kbar + B1' S[k+1]'``, the x[k] coefficient in the follower law."""
    return st.M1 + st.MB @ Kbar + problem.B1.T @ np.asarray(S_next).T


def follower_value_update(problem: GameProblem, st: FollowerStageData, P_next, S_next,
                          Kbar, Gbar_next=None, Delta_next=None):
    """Assemble ``P[k]`` (not yet symmetrized).

    ``Gbar_next`` / ``Delta_next`` are the leader memory gain and Delta of stage
    ``k+1``; pass ``None`` at the last stage where the memory gain vanishes.
    """
    A, B2 = problem.A, problem.B2
    AK = A + B2 @ Kbar
    X = coupled_feedback_term(st, S_next, problem, Kbar)
    P = (problem.Q + Kbar.T @ problem.R2 @ Kbar + AK.T @ P_next @ AK
         + AK.T @ S_next.T + S_next @ AK - X.T @ st.solve_gamma(X))
    if Gbar_next is not None:
        P = P + Gbar_next.T @ Delta_next @ Gbar_next
    return P


def follower_backward(problem: GameProblem, leader: GainSchedule) -> FollowerRecursion:
    """Follower recursion for a fixed leader schedule ``(Kbar, Gbar)``."""
    N, n = problem.N, problem.n
    if leader.horizon != N:
        raise ValueError(f"leader schedule has horizon {leader.horizon}, problem has {N}")
    Kbar, Gbar = leader.current, leader.memory

    P = [None] * (N + 2)
    S = [None] * (N + 2)
    stages = [None] * (N + 1)
    skew = [0.0] * (N + 2)
    P[N + 1] = problem.P_terminal.copy()
    S[N + 1] = np.zeros((n, n))
    current = [None] * (N + 1)
    memory = [None] * (N + 1)

    for k in range(N, -1, -1):
        st = follower_stage(P[k + 1], S[k + 1], problem, stage=k)
        stages[k] = st
        if k < N:
            Pk = follower_value_update(problem, st, P[k + 1], S[k + 1], Kbar[k],
                                       Gbar[k + 1], stages[k + 1].Delta)
        else:
            Pk = follower_value_update(problem, st, P[k + 1], S[k + 1], Kbar[k])
        skew[k] = asymmetry(Pk)
        P[k] = symmetrize(Pk)
        S[k] = Gbar[k].T @ (st.Delta @ Kbar[k] + st.M2cal)

        X = coupled_feedback_term(st, S[k + 1], problem, Kbar[k])
        current[k] = -st.solve_gamma(X)
        memory[k] = -st.solve_gamma(st.MB @ Gbar[k])
        if not (np.all(np.isfinite(P[k])) and np.all(np.isfinite(S[k]))):
            raise NonFiniteValue("follower recursion produced non-finite values", stage=k)

    gains = GainSchedule(tuple(current), tuple(memory))
    return FollowerRecursion(P=P, S=S, stages=stages, follower_gains=gains, asymmetry=skew)


def follower_cost(rec: FollowerRecursion, x0) -> float:
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    return float(x0 @ rec.P[0] @ x0)
