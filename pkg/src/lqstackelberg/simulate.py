"""Forward simulation, direct cost summation and co-state reconstruction."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteValue
from .model import GainSchedule, GameProblem, evaluate_strategy

DIVERGENCE_LIMIT = 1e150


@dataclass(frozen=True, eq=False)
class Trajectory:
    problem: GameProblem
    x: list
    uf: list
    ul: list
    stage_Jf: list
    stage_Jl: list
    total_Jf: float
    total_Jl: float
    lambda_f: list | None = None
    lambda_l: list | None = None
    residuals: dict = field(default_factory=dict)

    @property
    def N(self):
        return len(self.uf) - 1

    def stationarity_ok(self, tol=1e-8) -> bool:
        """Every stored residual is within ``tol * (1 + |x[k]|)``."""
        if not self.residuals:
            raise ValueError("no residuals attached; call attach_costates first")
        for values in self.residuals.values():
            for k, r in enumerate(values):
                if r > tol * (1.0 + float(np.linalg.norm(self.x[k]))):
                    return False
        return True


def _guard(v, k, what):
    if not np.all(np.isfinite(v)) or np.any(np.abs(v) > DIVERGENCE_LIMIT):
        raise NonFiniteValue(f"{what} diverged beyond {DIVERGENCE_LIMIT:.0e}", stage=k)


def rollout(problem: GameProblem, follower: GainSchedule, leader: GainSchedule) -> Trajectory:
    """Simulate both strategies from ``problem.x0`` and sum the costs stage by stage."""
    N = problem.N
    for name, s in (("follower", follower), ("leader", leader)):
        if s.horizon != N:
            raise ValueError(f"{name} schedule has horizon {s.horizon}, problem has {N}")
    p = problem
    x = [p.x0.astype(float).copy()]
    uf, ul, cf, cl = [], [], [], []
    x_prev = np.zeros(p.n)
    for k in range(N + 1):
        xk = x[k]
        u = evaluate_strategy(follower, k, xk, x_prev)
        v = evaluate_strategy(leader, k, xk, x_prev)
        _guard(u, k, "follower control")
        _guard(v, k, "leader control")
        uf.append(u)
        ul.append(v)
        cf.append(float(xk @ p.Q @ xk + u @ p.R1 @ u + v @ p.R2 @ v))
        cl.append(float(xk @ p.Qbar @ xk + u @ p.R1bar @ u + v @ p.R2bar @ v))
        x_next = p.A @ xk + p.B1 @ u + p.B2 @ v
        _guard(x_next, k + 1, "state")
        x.append(x_next)
        x_prev = xk
    xT = x[-1]
    total_f = math.fsum(cf + [float(xT @ p.P_terminal @ xT)])
    total_l = math.fsum(cl + [float(xT @ p.Pbar_terminal @ xT)])
    return Trajectory(problem=p, x=x, uf=uf, ul=ul, stage_Jf=cf, stage_Jl=cl,
                      total_Jf=total_f, total_Jl=total_l)


def attach_costates(traj: Trajectory, frec, lrec) -> Trajectory:
    """Rebuild both co-state sequences from the value matrices and evaluate stationarity.

    ``lambda_f[k] = P[k+1] x[k+1] + S[k+1]' x[k]`` and
    ``lambda_l[k] = Pbar[k+1] x[k+1]``; the residuals are the follower and
    leader stationarity conditions with zero constraint multipliers.
    """
    p = traj.problem
    lam_f, lam_l, res_f, res_l = [], [], [], []
    for k in range(traj.N + 1):
        x, x_next = traj.x[k], traj.x[k + 1]
        lf = frec.P[k + 1] @ x_next + frec.S[k + 1].T @ x
        ll = lrec.Pbar[k + 1] @ x_next
        lam_f.append(lf)
        lam_l.append(ll)
        res_f.append(float(np.linalg.norm(p.R1 @ traj.uf[k] + p.B1.T @ lf)))

        fst, lst = frec.stages[k], lrec.stages[k]
        GinvMB = fst.solve_gamma(fst.MB)
        GinvL = fst.solve_gamma(fst.M1 + p.B1.T @ frec.S[k + 1].T)
        r = (GinvMB.T @ p.R1bar @ GinvL @ x
             + (p.R2bar + GinvMB.T @ p.R1bar @ GinvMB) @ traj.ul[k]
             + lst.B_red.T @ ll)
        res_l.append(float(np.linalg.norm(r)))
    return dataclasses.replace(traj, lambda_f=lam_f, lambda_l=lam_l,
                               residuals={"follower": res_f, "leader": res_l})
