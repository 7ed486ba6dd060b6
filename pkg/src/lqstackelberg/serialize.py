"""Deterministic text output: decimal formatting, solution documents and CSV tables."""
from __future__ import annotations

import csv
import io
import json
import math
from decimal import ROUND_HALF_EVEN, Decimal, localcontext

import numpy as np

from .errors import ParseError
from .model import GainSchedule, problem_from_dict, problem_to_dict

SOLUTION_KIND = "lqstackelberg.solution"
MODES = ("closed-loop", "feedback")


def fmt(x, precision: int = 6) -> str:
    """Fixed-point text with round-half-even; ``-0`` prints as ``0``."""
    x = float(x)
    if not math.isfinite(x):
        return repr(x)
    with localcontext() as ctx:
        ctx.prec = 400
        q = Decimal(repr(x)).quantize(Decimal(1).scaleb(-precision), rounding=ROUND_HALF_EVEN)
        if q == 0:
            q = abs(q)
        return f"{q:f}"


def _entries(prefix, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return {f"{prefix}_{i}_{j}": M[i, j] for i in range(M.shape[0]) for j in range(M.shape[1])}


# ------------------------------------------------------------ solution JSON

def _stage_rows(sol, mode):
    N = sol.problem.N
    if mode == "closed-loop":
        frec, lrec = sol.follower_rec, sol.leader_rec
        P, Pbar, S = frec.P, lrec.Pbar, frec.S
        eff_f, eff_l = sol.effective_follower, sol.effective_leader
    else:
        P, Pbar = sol.Pf, sol.Pl
        S = [np.zeros_like(M) for M in P]
        eff_f, eff_l = sol.Kf, sol.Kl
    ls, fs = sol.leader_schedule, sol.follower_schedule
    rows = []
    for k in range(N + 1):
        rows.append({
            "k": k,
            "leader_current": ls.current[k].tolist(),
            "leader_memory": ls.memory[k].tolist(),
            "follower_current": fs.current[k].tolist(),
            "follower_memory": fs.memory[k].tolist(),
            "effective_leader": np.asarray(eff_l[k]).tolist(),
            "effective_follower": np.asarray(eff_f[k]).tolist(),
            "P": P[k].tolist(),
            "Pbar": Pbar[k].tolist(),
            "S": S[k].tolist(),
        })
    terminal = {"P": P[N + 1].tolist(), "Pbar": Pbar[N + 1].tolist()}
    return rows, terminal


def solution_document(sol, mode: str, version: str) -> dict:
    """Full-precision solution record; floats round-trip exactly through JSON."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    rows, terminal = _stage_rows(sol, mode)
    return {
        "kind": SOLUTION_KIND,
        "version": version,
        "mode": mode,
        "problem": problem_to_dict(sol.problem),
        "predicted_costs": {"follower": sol.predicted_Jf, "leader": sol.predicted_Jl},
        "stages": rows,
        "terminal": terminal,
    }


def dumps_solution(doc: dict) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def _schedule(rows, cur, mem, name):
    try:
        current = tuple(np.array(r[cur], dtype=float) for r in rows)
        memory = tuple(np.array(r[mem], dtype=float) for r in rows)
        return GainSchedule(current, memory)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"solution document: bad {name} schedule ({exc})") from None


def parse_solution(text: str) -> dict:
    """Decode a solution document into problem, schedules and claimed costs."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"solution document: invalid JSON ({exc})") from None
    if not isinstance(doc, dict) or doc.get("kind") != SOLUTION_KIND:
        raise ParseError("not a solution document")
    if doc.get("mode") not in MODES:
        raise ParseError(f"solution document: mode must be one of {MODES}")
    rows = doc.get("stages")
    if not isinstance(rows, list) or not rows:
        raise ParseError("solution document: no stages")
    if [r.get("k") for r in rows] != list(range(len(rows))):
        raise ParseError("solution document: stages must be listed for k = 0..N in order")
    try:
        costs = doc["predicted_costs"]
        Jf, Jl = float(costs["follower"]), float(costs["leader"])
    except (KeyError, TypeError, ValueError):
        raise ParseError("solution document: predicted_costs missing or malformed") from None
    return {
        "mode": doc["mode"],
        "problem": problem_from_dict(doc["problem"]) if "problem" in doc else None,
        "leader_schedule": _schedule(rows, "leader_current", "leader_memory", "leader"),
        "follower_schedule": _schedule(rows, "follower_current", "follower_memory", "follower"),
        "predicted_Jf": Jf,
        "predicted_Jl": Jl,
    }


# -------------------------------------------------------------------- CSV

def _csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def gains_csv(sol, mode: str, precision: int = 6) -> str:
    """One row per stage: effective gains, then the strategy parameters in row-major order."""
    if mode == "closed-loop":
        eff_f, eff_l = sol.effective_follower, sol.effective_leader
    else:
        eff_f, eff_l = sol.Kf, sol.Kl
    ls, fs = sol.leader_schedule, sol.follower_schedule
    records = []
    for k in range(sol.problem.N + 1):
        rec = {}
        rec.update(_entries("uf_gain", eff_f[k]))
        rec.update(_entries("ul_gain", eff_l[k]))
        if mode == "closed-loop":
            rec.update(_entries("Kbar", ls.current[k]))
            rec.update(_entries("Gbar", ls.memory[k]))
            rec.update(_entries("Kf", fs.current[k]))
            rec.update(_entries("Gf", fs.memory[k]))
        records.append(rec)
    header = ["k"] + list(records[0])
    rows = [[k] + [fmt(v, precision) for v in rec.values()] for k, rec in enumerate(records)]
    return _csv_text(header, rows)


def trajectory_csv(traj, precision: int = 6) -> str:
    """Stage rows ``k = 0..N`` plus a terminal row whose cost columns hold the terminal penalty."""
    p = traj.problem
    header = (["k"] + [f"x_{i}" for i in range(p.n)] + [f"uf_{i}" for i in range(p.m1)]
              + [f"ul_{i}" for i in range(p.m2)] + ["stage_Jf", "stage_Jl"])
    rows = []
    for k in range(traj.N + 1):
        rows.append([k] + [fmt(v, precision) for v in traj.x[k]]
                    + [fmt(v, precision) for v in traj.uf[k]]
                    + [fmt(v, precision) for v in traj.ul[k]]
                    + [fmt(traj.stage_Jf[k], precision), fmt(traj.stage_Jl[k], precision)])
    xT = traj.x[-1]
    rows.append([traj.N + 1] + [fmt(v, precision) for v in xT] + [""] * (p.m1 + p.m2)
                + [fmt(xT @ p.P_terminal @ xT, precision), fmt(xT @ p.Pbar_terminal @ xT, precision)])
    return _csv_text(header, rows)


def table_csv(columns, values, precision: int = 6) -> str:
    """``values`` maps column name to a per-stage sequence; ``None`` prints as empty."""
    N = len(next(iter(values.values())))
    rows = [[k] + ["" if values[c][k] is None else fmt(values[c][k], precision) for c in columns]
            for k in range(N)]
    return _csv_text(["k"] + list(columns), rows)
