"""Named pass/fail checks bundled for the ``verify`` command."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .closed_loop import effective_trajectory_identity_check, solve_closed_loop
from .errors import DimensionTooLarge
from .feedback import constrained_lqr, lqr_costate_check, solve_feedback_stackelberg, standard_lqr
from .follower import follower_backward, follower_cost
from .model import GainSchedule, GameProblem
from .oracle import (MAX_PARAMS, SearchConfig, brute_force_follower, finite_diff_stationarity,
                     reduced_lqr_crosscheck)
from .simulate import attach_costates, rollout

DEFAULT_TOLERANCES = {
    "S": 1e-10,
    "stationarity": 1e-12,
    "cost": 1e-8,
    "costate": 1e-8,
    "lqr": 1e-12,
    "reduced": 1e-10,
    "identity": 1e-9,
    "finite_diff": 1e-5,
    "oracle_match": 1e-4,
    "oracle_undercut": 1e-6,
    "solution": 1e-9,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    tolerance: float
    note: str = ""


def merged_tolerances(overrides=None) -> dict:
    tol = dict(DEFAULT_TOLERANCES)
    for key, value in (overrides or {}).items():
        if key not in tol:
            raise KeyError(f"unknown tolerance {key!r}; known: {', '.join(sorted(tol))}")
        value = float(value)
        if not np.isfinite(value) or value < 0:
            raise ValueError(f"tolerance {key} must be finite and non-negative")
        tol[key] = value
    return tol


def _rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


def _maxdiff(As, Bs):
    worst = 0.0
    for a, b in zip(As, Bs):
        a, b = np.asarray(a), np.asarray(b)
        if a.size:
            worst = max(worst, float(np.max(np.abs(a - b)) / (1.0 + np.max(np.abs(b)))))
    return worst


def _check(name, value, tol, note=""):
    return CheckResult(name, bool(value <= tol), float(value), float(tol), note)


def stationarity_residual(frec, schedule: GainSchedule) -> float:
    """Scaled ``|Delta Kbar + M2cal|`` over stages 1..N."""
    worst = 0.0
    for k in range(1, len(frec.stages)):
        st = frec.stages[k]
        K = np.asarray(schedule.current[k])
        r = st.Delta @ K + st.M2cal
        scale = 1.0 + np.linalg.norm(st.Delta) * np.linalg.norm(K) + np.linalg.norm(st.M2cal)
        worst = max(worst, float(np.linalg.norm(r) / scale))
    return worst


def invariant_suite(problem: GameProblem, tolerances=None, closed=None, feedback=None):
    """Fast checks: recursions against simulation, co-states and independent routes."""
    tol = merged_tolerances(tolerances)
    closed = closed or solve_closed_loop(problem)
    feedback = feedback or solve_feedback_stackelberg(problem)
    out = []

    out.append(_check("S_identically_zero", closed.max_S, tol["S"]))
    out.append(_check("stationarity_Delta_Kbar_plus_M2",
                      stationarity_residual(closed.follower_rec, closed.leader_schedule),
                      tol["stationarity"], "stage 0 skipped"))

    traj = rollout(problem, closed.follower_schedule, closed.leader_schedule)
    traj = attach_costates(traj, closed.follower_rec, closed.leader_rec)
    out.append(_check("cost_identity_closed_loop_follower",
                      _rel(traj.total_Jf, closed.predicted_Jf), tol["cost"]))
    out.append(_check("cost_identity_closed_loop_leader",
                      _rel(traj.total_Jl, closed.predicted_Jl), tol["cost"]))
    for who in ("follower", "leader"):
        worst = max(r / (1.0 + float(np.linalg.norm(traj.x[k])))
                    for k, r in enumerate(traj.residuals[who]))
        out.append(_check(f"costate_stationarity_{who}", worst, tol["costate"]))

    fb = rollout(problem, feedback.follower_schedule, feedback.leader_schedule)
    out.append(_check("cost_identity_feedback_follower",
                      _rel(fb.total_Jf, feedback.predicted_Jf), tol["cost"]))
    out.append(_check("cost_identity_feedback_leader",
                      _rel(fb.total_Jl, feedback.predicted_Jl), tol["cost"]))

    p = problem
    lqr_dev, lqr_costate = 0.0, 0.0
    for B, Q, R, PT in ((p.B1, p.Q, p.R1, p.P_terminal), (p.B2, p.Qbar, p.R2bar, p.Pbar_terminal)):
        std = standard_lqr(p.A, B, Q, R, PT, p.N, p.x0)
        con = constrained_lqr(p.A, B, Q, R, PT, p.N, p.x0)
        lqr_dev = max(lqr_dev, _maxdiff(con.K, std.K), _maxdiff(con.P, std.P))
        scale = 1.0 + max(float(np.max(np.abs(P))) for P in std.P) * (1.0 + np.linalg.norm(p.x0))
        lqr_costate = max(lqr_costate, lqr_costate_check(con, p.A, B, Q, p.x0) / scale)
    out.append(_check("constrained_vs_standard_lqr", lqr_dev, tol["lqr"]))
    out.append(_check("lqr_costate_recursion", lqr_costate, tol["costate"]))

    red = reduced_lqr_crosscheck(problem, closed.follower_rec, closed.leader_rec, tol=tol["reduced"])
    out.append(_check("reduced_lqr_crosscheck",
                      max(c.value for c in red.checks.values()), tol["reduced"]))

    ident = effective_trajectory_identity_check(closed, traj, tol=tol["identity"])
    worst = max([r / b * tol["identity"] for r, b in zip(ident.residuals[1:], ident.bounds[1:])],
                default=0.0)
    out.append(_check("trajectory_identity", worst, tol["identity"], "stage 0 skipped"))

    fd = finite_diff_stationarity(problem, closed, tol=tol["finite_diff"])
    worst = max([c.value / c.tolerance * tol["finite_diff"] for c in fd.checks.values()], default=0.0)
    out.append(_check("finite_difference_stationarity", worst, tol["finite_diff"],
                      "stage 0 skipped"))
    return out


def oracle_horizon(problem: GameProblem, requested: int = 1) -> int:
    """Largest horizon not above ``requested`` that keeps the follower search desk-scale."""
    per = problem.m1 * problem.n
    if per > MAX_PARAMS:
        raise DimensionTooLarge(f"even N=0 needs {per} follower parameters (limit {MAX_PARAMS})")
    cap = (MAX_PARAMS // per - 1) // 2
    return max(0, min(problem.N, requested, cap))


def truncate(problem: GameProblem, schedule: GainSchedule, N: int):
    return (problem.replace(N=N),
            GainSchedule(tuple(schedule.current[: N + 1]), tuple(schedule.memory[: N + 1])))


def oracle_suite(problem: GameProblem, tolerances=None, closed=None, seed: int = 0,
                 horizon: int = 1):
    """Brute-force follower best response on the instance truncated to a desk-scale horizon."""
    tol = merged_tolerances(tolerances)
    closed = closed or solve_closed_loop(problem)
    N = oracle_horizon(problem, horizon)
    short, leader = truncate(problem, closed.leader_schedule, N)
    rep = brute_force_follower(short, leader, SearchConfig(seed=seed),
                               match_tol=tol["oracle_match"], undercut_tol=tol["oracle_undercut"])
    scale = 1.0 + abs(rep.analytic_objective)
    note = f"N truncated to {N}; gap {rep.gap:+.3e}"
    return [
        CheckResult("brute_force_no_undercut", rep.checks["no_undercut"].passed,
                    max(0.0, -rep.gap) / scale, tol["oracle_undercut"], note),
        CheckResult("brute_force_matches_analytic", rep.checks["matches_analytic"].passed,
                    abs(rep.gap) / scale, tol["oracle_match"], note),
    ]


def solution_document_checks(problem: GameProblem, doc, tolerances=None):
    """Audit a stored solution: gains against a fresh solve, stationarity, cost claims."""
    tol = merged_tolerances(tolerances)
    mode = doc["mode"]
    fresh = solve_closed_loop(problem) if mode == "closed-loop" else solve_feedback_stackelberg(problem)
    leader = doc["leader_schedule"]
    follower = doc["follower_schedule"]
    out = []
    out.append(_check("solution_leader_gains_match",
                      max(_maxdiff(leader.current, fresh.leader_schedule.current),
                          _maxdiff(leader.memory, fresh.leader_schedule.memory)),
                      tol["solution"]))
    out.append(_check("solution_follower_gains_match",
                      max(_maxdiff(follower.current, fresh.follower_schedule.current),
                          _maxdiff(follower.memory, fresh.follower_schedule.memory)),
                      tol["solution"]))
    traj = rollout(problem, follower, leader)
    out.append(_check("solution_cost_claim_follower",
                      _rel(traj.total_Jf, doc["predicted_Jf"]), tol["cost"]))
    out.append(_check("solution_cost_claim_leader",
                      _rel(traj.total_Jl, doc["predicted_Jl"]), tol["cost"]))
    if mode == "closed-loop":
        frec = follower_backward(problem, leader)
        out.append(_check("solution_stationarity_Delta_Kbar_plus_M2",
                          stationarity_residual(frec, leader), tol["stationarity"],
                          "stage 0 skipped"))
        best = follower_cost(frec, problem.x0)
        out.append(_check("solution_follower_best_response",
                          _rel(traj.total_Jf, best), tol["cost"]))
    return out
