"""Independent numerical checks of the Riccati-based solutions.

Nothing here calls the production recursions to produce the quantity being
checked: the brute-force search only simulates, the augmented-state LQR
solves the follower problem on the stacked state ``(x[k], x[k-1])``, and the
reduced-LQR check runs a generic cross-term Riccati recursion.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .errors import DimensionTooLarge, SearchBudgetExceeded
from .follower import follower_backward, follower_cost, follower_value_update
from .model import GainSchedule, GameProblem
from .simulate import rollout

MAX_PARAMS = 12
GRID_LIMIT = 50_000


@dataclass(frozen=True)
class SearchConfig:
    bound: float = 5.0
    resolution: int = 5
    levels: int = 4
    max_iter: int = 2000
    tol: float = 1e-10
    seed: int = 0
    starts: int = 8

    def __post_init__(self):
        if not np.isfinite(self.bound) or self.bound <= 0:
            raise ValueError("bound must be finite and positive")
        if self.resolution < 3:
            raise ValueError("resolution must be at least 3")
        if self.levels < 1 or self.starts < 1:
            raise ValueError("levels and starts must be positive")


@dataclass
class Check:
    passed: bool
    value: float
    tolerance: float

    def __post_init__(self):
        self.passed = bool(self.passed)
        self.value = float(self.value)
        self.tolerance = float(self.tolerance)


@dataclass
class OracleReport:
    name: str
    best_objective: float | None = None
    best_params: np.ndarray | None = None
    analytic_objective: float | None = None
    checks: dict = field(default_factory=dict)
    evaluations: int = 0

    @property
    def gap(self):
        if self.best_objective is None or self.analytic_objective is None:
            return None
        return self.best_objective - self.analytic_objective

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())


# ------------------------------------------------------------ brute force

def _unpack(theta, N, m1, n):
    size = m1 * n
    current = [theta[k * size:(k + 1) * size].reshape(m1, n) for k in range(N + 1)]
    off = (N + 1) * size
    memory = [np.zeros((m1, n))]
    memory += [theta[off + (k - 1) * size: off + k * size].reshape(m1, n) for k in range(1, N + 1)]
    return GainSchedule(tuple(current), tuple(memory))


def _grid_stage(f, d, cfg, lo, hi):
    best = None
    for _ in range(cfg.levels):
        if cfg.resolution ** d <= GRID_LIMIT:
            axes = [np.linspace(lo[i], hi[i], cfg.resolution) for i in range(d)]
            points = (np.array(p) for p in itertools.product(*axes))
        else:
            sampler = qmc.Halton(d, scramble=True, seed=cfg.seed)
            points = qmc.scale(sampler.random(4096), lo, hi)
        for p in points:
            cand = (f(p), tuple(p))
            if best is None or cand < best:
                best = cand
        centre = np.array(best[1])
        half = (hi - lo) / (cfg.resolution - 1)
        lo = np.maximum(centre - half, -cfg.bound)
        hi = np.minimum(centre + half, cfg.bound)
    return np.array(best[1])


def brute_force_follower(problem: GameProblem, leader: GainSchedule,
                         cfg: SearchConfig = SearchConfig(), match_tol: float = 1e-4,
                         undercut_tol: float = 1e-6) -> OracleReport:
    """Minimize the simulated follower cost over one-step-memory schedules.

    Parameters are ``K[0..N]`` and ``G[1..N]`` inside the box ``[-bound, bound]``;
    a refining grid (or Halton cloud when the grid is too large) seeds
    Nelder-Mead runs together with ``cfg.starts`` low-discrepancy starts.
    """
    N, n, m1 = problem.N, problem.n, problem.m1
    d = (2 * N + 1) * m1 * n
    if d > MAX_PARAMS:
        raise DimensionTooLarge(f"{d} follower parameters exceed the desk-scale limit {MAX_PARAMS}")

    counter = [0]

    def objective(theta):
        counter[0] += 1
        sched = _unpack(np.asarray(theta, dtype=float), N, m1, n)
        return rollout(problem, sched, leader).total_Jf

    lo = np.full(d, -cfg.bound)
    hi = np.full(d, cfg.bound)
    starts = [_grid_stage(objective, d, cfg, lo.copy(), hi.copy())]
    sampler = qmc.Halton(d, scramble=True, seed=cfg.seed)
    starts += list(qmc.scale(sampler.random(cfg.starts), lo, hi))

    candidates = []
    converged = False
    for x_start in starts:
        res = minimize(objective, x_start, method="Nelder-Mead",
                       bounds=list(zip(lo, hi)),
                       options=dict(maxiter=cfg.max_iter * d, xatol=1e-10, fatol=cfg.tol,
                                    adaptive=d > 4))
        converged |= bool(res.success)
        candidates.append((float(res.fun), tuple(np.asarray(res.x, dtype=float))))
    if not converged:
        raise SearchBudgetExceeded("no simplex run converged within the iteration cap")
    best_val, best_theta = min(candidates)

    analytic = follower_cost(follower_backward(problem, leader), problem.x0)
    rep = OracleReport("brute_force_follower", best_objective=best_val,
                       best_params=np.array(best_theta), analytic_objective=analytic,
                       evaluations=counter[0])
    scale = 1.0 + abs(analytic)
    rep.checks["no_undercut"] = Check(rep.gap >= -undercut_tol * scale, rep.gap,
                                      -undercut_tol * scale)
    rep.checks["matches_analytic"] = Check(abs(rep.gap) <= match_tol * scale, abs(rep.gap),
                                           match_tol * scale)
    return rep


# ------------------------------------------------ augmented-state best response

def augmented_follower_value(problem: GameProblem, leader: GainSchedule) -> float:
    """Exact optimal follower cost by LQR on the stacked state ``(x[k], x[k-1])``.

    With the leader's memory strategy fixed the follower faces an ordinary
    time-varying LQR in the stacked state, whose optimum lies in the
    one-step-memory class.
    """
    p = problem
    n, m1 = p.n, p.m1
    V = np.zeros((2 * n, 2 * n))
    V[:n, :n] = p.P_terminal
    Ba = np.vstack([p.B1, np.zeros((n, m1))])
    for k in range(p.N, -1, -1):
        Kb, Gb = leader.current[k], leader.memory[k]
        Fa = np.block([[p.A + p.B2 @ Kb, p.B2 @ Gb], [np.eye(n), np.zeros((n, n))]])
        Lk = np.hstack([Kb, Gb])
        Qa = Lk.T @ p.R2 @ Lk
        Qa[:n, :n] += p.Q
        H = p.R1 + Ba.T @ V @ Ba
        gain = -np.linalg.solve(H, Ba.T @ V @ Fa)
        Fc = Fa + Ba @ gain
        V = Qa + gain.T @ p.R1 @ gain + Fc.T @ V @ Fc
    z = np.concatenate([p.x0, np.zeros(n)])
    return float(z @ V @ z)


# ------------------------------------------------- stationarity by differences

def follower_value_at(problem: GameProblem, solution, k: int, Kbar):
    """``P[k]`` as a function of ``Kbar[k]`` with every stage-(k+1) quantity frozen."""
    frec = solution.follower_rec
    st = frec.stages[k]
    if k < problem.N:
        return follower_value_update(problem, st, frec.P[k + 1], frec.S[k + 1], Kbar,
                                     solution.leader_schedule.memory[k + 1],
                                     frec.stages[k + 1].Delta)
    return follower_value_update(problem, st, frec.P[k + 1], frec.S[k + 1], Kbar)


def directional_derivative(problem, solution, k, Kbar, direction, x, h):
    """Central difference of ``x' P[k](Kbar) x`` along ``direction``."""
    fp = x @ follower_value_at(problem, solution, k, Kbar + h * direction) @ x
    fm = x @ follower_value_at(problem, solution, k, Kbar - h * direction) @ x
    return float((fp - fm) / (2.0 * h))


def finite_diff_stationarity(problem: GameProblem, solution, h: float = 1e-5,
                             probes: int = 4, seed: int = 0, gains=None,
                             tol: float = 1e-5) -> OracleReport:
    """Probe stationarity of the follower value in the leader's current gain.

    ``gains`` overrides the ``Kbar`` schedule being probed (defaults to the
    solution's). Stage 0 is skipped: with no previous state its gain is the
    leader's state feedback, not a stationary point of ``P[0]``.
    """
    if not 1e-7 <= h <= 1e-3:
        raise ValueError("h must lie in [1e-7, 1e-3]")
    rng = np.random.default_rng(seed)
    gains = solution.leader_schedule.current if gains is None else gains
    rep = OracleReport("finite_diff_stationarity")
    for k in range(1, problem.N + 1):
        worst = None
        for _ in range(probes):
            x = rng.standard_normal(problem.n)
            E = rng.standard_normal((problem.m2, problem.n))
            E /= np.linalg.norm(E)
            dd = abs(directional_derivative(problem, solution, k, np.asarray(gains[k]), E, x, h))
            bound = tol * (1.0 + abs(x @ follower_value_at(problem, solution, k, gains[k]) @ x))
            if worst is None or dd / bound > worst[0] / worst[1]:
                worst = (dd, bound)
        rep.checks[f"stage_{k}"] = Check(worst[0] <= worst[1], worst[0], worst[1])
    return rep


# ---------------------------------------------------------- reduced LQR check

def _cross_term_lqr(As, Bs, Qs, Ns, Rs, P_terminal):
    V = np.array(P_terminal, dtype=float)
    N = len(As) - 1
    Vs = [None] * (N + 2)
    Ks = [None] * (N + 1)
    Vs[N + 1] = V
    for k in range(N, -1, -1):
        A, B, Q, Nx, R = As[k], Bs[k], Qs[k], Ns[k], Rs[k]
        H = R + B.T @ V @ B
        lin = B.T @ V @ A + Nx.T
        Ks[k] = -np.linalg.solve(H, lin)
        V = Q + A.T @ V @ A - lin.T @ np.linalg.solve(H, lin)
        V = 0.5 * (V + V.T)
        Vs[k] = V
    return Vs, Ks


def reduced_lqr_crosscheck(problem: GameProblem, frec, lrec, tol: float = 1e-10) -> OracleReport:
    """Solve the leader's reduced problem as a generic cross-term LQR and compare.

    Deviations are measured relative to ``1 + max|reference|``.
    """
    p = problem
    As, Bs, Qs, Ns, Rs = [], [], [], [], []
    for k in range(p.N + 1):
        st = frec.stages[k]
        L = st.M1 + p.B1.T @ frec.S[k + 1].T
        Gi_L = np.linalg.solve(st.GammaF, L)
        Gi_MB = np.linalg.solve(st.GammaF, st.MB)
        As.append(p.A - p.B1 @ Gi_L)
        Bs.append(p.B2 - p.B1 @ Gi_MB)
        Qs.append(p.Qbar + Gi_L.T @ p.R1bar @ Gi_L)
        Ns.append(Gi_L.T @ p.R1bar @ Gi_MB)
        Rs.append(p.R2bar + Gi_MB.T @ p.R1bar @ Gi_MB)
    Vs, Ks = _cross_term_lqr(As, Bs, Qs, Ns, Rs, p.Pbar_terminal)

    def rel(a, b):
        return float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b)))) if b.size else 0.0

    gain_dev = max(rel(Ks[k], lrec.leader_state_feedback[k]) for k in range(p.N + 1))
    value_dev = max(rel(Vs[k], lrec.Pbar[k]) for k in range(p.N + 2))
    rep = OracleReport("reduced_lqr_crosscheck")
    rep.checks["gain_deviation"] = Check(gain_dev <= tol, gain_dev, tol)
    rep.checks["value_deviation"] = Check(value_dev <= tol, value_dev, tol)
    return rep
