"""Memoryless baselines: finite-horizon LQR and stagewise feedback Stackelberg."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GammaNotPD, LeaderStagePDFailure, NonFiniteValue
from .linalg import PDSolver, symmetrize
from .model import GainSchedule, GameProblem


@dataclass(frozen=True, eq=False)
class LqrSolution:
    P: list
    K: list
    predicted_J: float | None = None
    beta: list = field(default_factory=list)

    @property
    def N(self):
        return len(self.K) - 1


def _as2d(M):
    return np.atleast_2d(np.asarray(M, dtype=float))


def standard_lqr(A, B, Q, R, P_terminal, N, x0=None) -> LqrSolution:
    """Textbook backward Riccati recursion."""
    A, B, Q, R = _as2d(A), _as2d(B), _as2d(Q), _as2d(R)
    P = [None] * (N + 2)
    K = [None] * (N + 1)
    P[N + 1] = _as2d(P_terminal)
    for k in range(N, -1, -1):
        Pn = P[k + 1]
        gamma = PDSolver(R + B.T @ Pn @ B, GammaNotPD, name="R + B'PB", stage=k)
        BPA = B.T @ Pn @ A
        K[k] = -gamma.solve(BPA)
        P[k] = symmetrize(Q + A.T @ Pn @ A - BPA.T @ gamma.solve(BPA))
    J = None if x0 is None else float(np.asarray(x0, float) @ P[0] @ np.asarray(x0, float))
    return LqrSolution(P=P, K=K, predicted_J=J)


def constrained_lqr(A, B, Q, R, P_terminal, N, x0=None) -> LqrSolution:
    """LQR restricted to current-state feedback, solved through the multiplier route.

    At each stage the stationarity condition ``R u + B' lambda - beta = 0`` with
    ``lambda = P[k+1] x[k+1]`` and ``u = K x`` must hold for every ``x``; this
    pins the gain and leaves the multiplier coefficient ``beta = 0``. The value
    matrix then follows from the co-state update
    ``lambda[k-1] = Q x + A' lambda[k] + K' beta``.
    """
    A, B, Q, R = _as2d(A), _as2d(B), _as2d(Q), _as2d(R)
    P = [None] * (N + 2)
    K = [None] * (N + 1)
    beta = [None] * (N + 1)
    P[N + 1] = _as2d(P_terminal)
    for k in range(N, -1, -1):
        Pn = P[k + 1]
        Gamma = R + B.T @ Pn @ B
        if np.linalg.eigvalsh(symmetrize(Gamma)).min() <= 0.0:
            raise GammaNotPD("R + B'PB is not positive definite", stage=k)
        K[k] = np.linalg.solve(Gamma, -(B.T @ Pn @ A))
        # multiplier coefficient left over once u = K x is imposed
        beta[k] = Gamma @ K[k] + B.T @ Pn @ A
        P[k] = symmetrize(Q + A.T @ Pn @ (A + B @ K[k]) + K[k].T @ beta[k])
    J = None if x0 is None else float(np.asarray(x0, float) @ P[0] @ np.asarray(x0, float))
    return LqrSolution(P=P, K=K, predicted_J=J, beta=beta)


def lqr_costate_check(sol: LqrSolution, A, B, Q, x0) -> float:
    """Max of ``|lambda[k-1] - P[k] x[k]|`` along the closed loop, co-states run backward."""
    A, B, Q = _as2d(A), _as2d(B), _as2d(Q)
    N = sol.N
    x = [np.asarray(x0, dtype=float).reshape(-1)]
    for k in range(N + 1):
        x.append((A + B @ sol.K[k]) @ x[k])
    beta = sol.beta or [np.zeros_like(Kk) for Kk in sol.K]
    lam = sol.P[N + 1] @ x[N + 1]  # lambda_N
    worst = 0.0
    for k in range(N, 0, -1):
        lam = Q @ x[k] + A.T @ lam + sol.K[k].T @ (beta[k] @ x[k])  # lambda_{k-1}
        worst = max(worst, float(np.linalg.norm(lam - sol.P[k] @ x[k])))
    return worst


# ------------------------------------------------------ feedback Stackelberg

@dataclass(frozen=True, eq=False)
class FeedbackStackelbergSolution:
    problem: GameProblem
    Pf: list
    Pl: list
    Kf: list
    Kl: list
    predicted_Jf: float
    predicted_Jl: float

    @property
    def N(self):
        return self.problem.N

    @property
    def follower_schedule(self) -> GainSchedule:
        return GainSchedule.memoryless(self.Kf)

    @property
    def leader_schedule(self) -> GainSchedule:
        return GainSchedule.memoryless(self.Kl)


def _stage_reaction(problem: GameProblem, Pf_next, k=None):
    B1, B2, A = problem.B1, problem.B2, problem.A
    M1 = B1.T @ Pf_next @ A
    MB = B1.T @ Pf_next @ B2
    gamma = PDSolver(problem.R1 + B1.T @ Pf_next @ B1, GammaNotPD, name="GammaF", stage=k)
    return M1, MB, gamma


def follower_stage_reaction(problem: GameProblem, Pf_next, Kl):
    """Follower's one-stage best response to a memoryless leader gain."""
    M1, MB, gamma = _stage_reaction(problem, Pf_next)
    return -gamma.solve(M1 + MB @ Kl)


def leader_stage_value(problem: GameProblem, Pf_next, Pl_next, Kl):
    """Leader's stage cost-to-go matrix when announcing ``Kl`` against a best-responding follower."""
    Kf = follower_stage_reaction(problem, Pf_next, Kl)
    F = problem.A + problem.B1 @ Kf + problem.B2 @ Kl
    return problem.Qbar + Kf.T @ problem.R1bar @ Kf + Kl.T @ problem.R2bar @ Kl + F.T @ Pl_next @ F


def solve_feedback_stackelberg(problem: GameProblem) -> FeedbackStackelbergSolution:
    """Stagewise feedback Stackelberg solution (leader commits one stage gain at a time)."""
    N = problem.N
    A, B1, B2 = problem.A, problem.B1, problem.B2
    Pf = [None] * (N + 2)
    Pl = [None] * (N + 2)
    Kf = [None] * (N + 1)
    Kl = [None] * (N + 1)
    Pf[N + 1] = problem.P_terminal.copy()
    Pl[N + 1] = problem.Pbar_terminal.copy()
    for k in range(N, -1, -1):
        M1, MB, gamma = _stage_reaction(problem, Pf[k + 1], k)
        GinvM1 = gamma.solve(M1)
        GinvMB = gamma.solve(MB)
        Ar = A - B1 @ GinvM1
        Br = B2 - B1 @ GinvMB
        H = GinvMB.T @ problem.R1bar @ GinvMB + problem.R2bar + Br.T @ Pl[k + 1] @ Br
        lead = PDSolver(H, LeaderStagePDFailure, name="leader stage coefficient", stage=k)
        Kl[k] = -lead.solve(GinvMB.T @ problem.R1bar @ GinvM1 + Br.T @ Pl[k + 1] @ Ar)
        Kf[k] = -gamma.solve(M1 + MB @ Kl[k])
        F = A + B1 @ Kf[k] + B2 @ Kl[k]
        Pf[k] = symmetrize(problem.Q + Kf[k].T @ problem.R1 @ Kf[k]
                           + Kl[k].T @ problem.R2 @ Kl[k] + F.T @ Pf[k + 1] @ F)
        Pl[k] = symmetrize(problem.Qbar + Kf[k].T @ problem.R1bar @ Kf[k]
                           + Kl[k].T @ problem.R2bar @ Kl[k] + F.T @ Pl[k + 1] @ F)
        if not (np.all(np.isfinite(Pf[k])) and np.all(np.isfinite(Pl[k]))):
            raise NonFiniteValue("feedback recursion produced non-finite values", stage=k)
    x0 = problem.x0
    return FeedbackStackelbergSolution(problem=problem, Pf=Pf, Pl=Pl, Kf=Kf, Kl=Kl,
                                       predicted_Jf=float(x0 @ Pf[0] @ x0),
                                       predicted_Jl=float(x0 @ Pl[0] @ x0))
