"""Leader's optimal state-feedback law against the follower's reaction."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GammaLNotPD, NonFiniteValue
from .follower import FollowerRecursion, FollowerStageData
from .linalg import PDSolver, asymmetry, symmetrize
from .model import GameProblem


@dataclass(frozen=True, eq=False)
class LeaderStageData:
    GammaL: np.ndarray
    MLcal: np.ndarray
    MFcal: np.ndarray
    A_red: np.ndarray
    B_red: np.ndarray
    gamma: PDSolver = field(repr=False)

    @property
    def gain(self):
        """Leader state feedback ``-GammaL^{-1} MLcal``."""
        return -self.gamma.solve(self.MLcal)


@dataclass(frozen=True, eq=False)
class LeaderRecursion:
    Pbar: list
    stages: list
    leader_state_feedback: list
    asymmetry: list

    @property
    def N(self):
        return len(self.stages) - 1


def _follower_state_term(stage: FollowerStageData, S_next, problem):
    # M1 + B1' S[k+1]'
    return stage.M1 + problem.B1.T @ np.asarray(S_next).T


def reduced_system(stage: FollowerStageData, S_next, problem: GameProblem):
    """Dynamics seen by the leader once the follower's reaction is substituted."""
    L = _follower_state_term(stage, S_next, problem)
    A_red = problem.A - problem.B1 @ stage.solve_gamma(L)
    B_red = problem.B2 - problem.B1 @ stage.solve_gamma(stage.MB)
    return A_red, B_red


def leader_stage(Pbar_next, stage: FollowerStageData, S_next, problem: GameProblem,
                 k=None) -> LeaderStageData:
    Pbar_next = np.asarray(Pbar_next, dtype=float)
    L = _follower_state_term(stage, S_next, problem)
    A_red, B_red = reduced_system(stage, S_next, problem)
    GinvMB = stage.solve_gamma(stage.MB)
    GinvL = stage.solve_gamma(L)
    GammaL = symmetrize(problem.R2bar + GinvMB.T @ problem.R1bar @ GinvMB
                        + B_red.T @ Pbar_next @ B_red)
    gamma = PDSolver(GammaL, GammaLNotPD, name="GammaL", stage=k)
    MLcal = GinvMB.T @ problem.R1bar @ GinvL + B_red.T @ Pbar_next @ A_red
    MFcal = L - stage.MB @ gamma.solve(MLcal)
    return LeaderStageData(GammaL=GammaL, MLcal=MLcal, MFcal=MFcal,
                           A_red=A_red, B_red=B_red, gamma=gamma)


def leader_value_update(problem: GameProblem, stage: FollowerStageData, lst: LeaderStageData,
                        Pbar_next, S_next):
    L = _follower_state_term(stage, S_next, problem)
    GinvL = stage.solve_gamma(L)
    return (problem.Qbar + GinvL.T @ problem.R1bar @ GinvL
            - lst.MLcal.T @ lst.gamma.solve(lst.MLcal)
            + lst.A_red.T @ Pbar_next @ lst.A_red)


def leader_backward(problem: GameProblem, follower_rec: FollowerRecursion) -> LeaderRecursion:
    N = problem.N
    Pbar = [None] * (N + 2)
    Pbar[N + 1] = problem.Pbar_terminal.copy()
    stages = [None] * (N + 1)
    gains = [None] * (N + 1)
    skew = [0.0] * (N + 2)
    for k in range(N, -1, -1):
        fst = follower_rec.stages[k]
        S_next = follower_rec.S[k + 1]
        lst = leader_stage(Pbar[k + 1], fst, S_next, problem, k=k)
        stages[k] = lst
        gains[k] = lst.gain
        Pk = leader_value_update(problem, fst, lst, Pbar[k + 1], S_next)
        skew[k] = asymmetry(Pk)
        Pbar[k] = symmetrize(Pk)
        if not np.all(np.isfinite(Pbar[k])):
            raise NonFiniteValue("leader recursion produced non-finite values", stage=k)
    return LeaderRecursion(Pbar=Pbar, stages=stages, leader_state_feedback=gains,
                           asymmetry=skew)


def leader_cost(rec: LeaderRecursion, x0) -> float:
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    return float(x0 @ rec.Pbar[0] @ x0)
