"""Command-line front end.

Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 verification failure.
A problem argument of ``@benchmark`` selects the embedded benchmark instance.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field

from . import __version__, benchmark
from .checks import (CheckResult, invariant_suite, merged_tolerances, oracle_suite,
                     solution_document_checks)
from .closed_loop import solve_closed_loop
from .errors import (DimensionTooLarge, ParseError, SearchBudgetExceeded, SolverError,
                     StackelbergError)
from .feedback import solve_feedback_stackelberg
from .model import read_problem
from .serialize import (dumps_solution, fmt, gains_csv, parse_solution, solution_document,
                        table_csv, trajectory_csv)
from .simulate import rollout

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY = 0, 2, 3, 4
BENCHMARK_TOKEN = "@benchmark"


class VerificationFailed(Exception):
    def __init__(self, failed):
        self.failed = failed
        super().__init__(", ".join(c.name for c in failed))


@dataclass
class RunManifest:
    command: str
    problem: str | None
    mode: str | None
    tolerances: dict
    version: str
    wall_time: float = 0.0
    outputs: list = field(default_factory=list)


class _Writer:
    def __init__(self, out_dir, manifest: RunManifest):
        self.out = out_dir
        self.manifest = manifest
        os.makedirs(out_dir, exist_ok=True)

    def write(self, name, text):
        with open(os.path.join(self.out, name), "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        self.manifest.outputs.append(name)

    def finish(self, started):
        self.manifest.wall_time = round(time.perf_counter() - started, 6)
        with open(os.path.join(self.out, "manifest.json"), "w", encoding="utf-8") as fh:
            json.dump(asdict(self.manifest), fh, indent=2)
            fh.write("\n")


def _load(path):
    if path == BENCHMARK_TOKEN:
        return benchmark.benchmark_problem()
    try:
        return read_problem(path)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def _solve(problem, mode):
    return solve_closed_loop(problem) if mode == "closed-loop" else solve_feedback_stackelberg(problem)


def _costs_line(label, Jf, Jl, prec):
    return f"{label}: Jf = {fmt(Jf, prec)}  Jl = {fmt(Jl, prec)}"


# ---------------------------------------------------------------- commands

def cmd_solve(args) -> RunManifest:
    started = time.perf_counter()
    problem = _load(args.problem)
    sol = _solve(problem, args.mode)
    m = RunManifest("solve", args.problem, args.mode, {}, __version__)
    w = _Writer(args.out, m)
    w.write("solution.json", dumps_solution(solution_document(sol, args.mode, __version__)))
    w.write("gains.csv", gains_csv(sol, args.mode, args.precision))
    w.finish(started)
    print(_costs_line(f"predicted ({args.mode})", sol.predicted_Jf, sol.predicted_Jl, args.precision))
    return m


def cmd_simulate(args) -> RunManifest:
    started = time.perf_counter()
    problem = _load(args.problem)
    sol = _solve(problem, args.mode)
    traj = rollout(problem, sol.follower_schedule, sol.leader_schedule)
    m = RunManifest("simulate", args.problem, args.mode, {}, __version__)
    w = _Writer(args.out, m)
    w.write("trajectory.csv", trajectory_csv(traj, args.precision))
    w.finish(started)
    print(_costs_line(f"simulated ({args.mode})", traj.total_Jf, traj.total_Jl, args.precision))
    return m


def comparison_report(problem, precision=6):
    """Solve and simulate both modes; return (report text, solutions, trajectories)."""
    sols = {mode: _solve(problem, mode) for mode in ("closed-loop", "feedback")}
    trajs = {mode: rollout(problem, s.follower_schedule, s.leader_schedule) for mode, s in sols.items()}
    cl, fb = trajs["closed-loop"], trajs["feedback"]
    lines = [
        "cost comparison (simulated)",
        f"{'mode':<12} {'follower':>16} {'leader':>16}",
        f"{'closed-loop':<12} {fmt(cl.total_Jf, precision):>16} {fmt(cl.total_Jl, precision):>16}",
        f"{'feedback':<12} {fmt(fb.total_Jf, precision):>16} {fmt(fb.total_Jl, precision):>16}",
        f"follower margin (feedback - closed-loop): {fmt(fb.total_Jf - cl.total_Jf, precision)}",
        f"leader margin (feedback - closed-loop): {fmt(fb.total_Jl - cl.total_Jl, precision)}",
        f"closed_loop_leader_cost_le_feedback: {str(cl.total_Jl <= fb.total_Jl).lower()}",
        "",
    ]
    return "\n".join(lines), sols, trajs


def cmd_compare(args) -> RunManifest:
    started = time.perf_counter()
    problem = _load(args.problem)
    report, sols, trajs = comparison_report(problem, args.precision)
    m = RunManifest("compare", args.problem, "closed-loop,feedback", {}, __version__)
    w = _Writer(args.out, m)
    w.write("comparison.txt", report)
    for mode, sol in sols.items():
        tag = mode.replace("-", "_")
        w.write(f"gains_{tag}.csv", gains_csv(sol, mode, args.precision))
        w.write(f"trajectory_{tag}.csv", trajectory_csv(trajs[mode], args.precision))
    w.finish(started)
    sys.stdout.write(report)
    return m


def _parse_overrides(items):
    out = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"--tolerance expects NAME=VALUE, got {item!r}")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ParseError(f"--tolerance {name}: {value!r} is not a number") from None
    try:
        return merged_tolerances(out)
    except (KeyError, ValueError) as exc:
        raise ParseError(str(exc.args[0])) from None


def _check_lines(results, precision):
    lines = []
    for c in results:
        status = "PASS" if c.passed else "FAIL"
        note = f"  ({c.note})" if c.note else ""
        lines.append(f"{status} {c.name}: {c.value:.3e} (tolerance {c.tolerance:.1e}){note}")
    return lines


def cmd_verify(args) -> RunManifest:
    started = time.perf_counter()
    problem = _load(args.problem)
    tol = _parse_overrides(args.tolerance)
    results = []
    if args.solution:
        try:
            with open(args.solution, encoding="utf-8") as fh:
                doc = parse_solution(fh.read())
        except OSError as exc:
            raise ParseError(f"cannot read {args.solution}: {exc.strerror or exc}") from None
        if doc["problem"] is not None:
            same = doc["problem"].same_as(problem)
            results.append(CheckResult("solution_problem_matches", same, 0.0 if same else 1.0, 0.0))
        if doc["leader_schedule"].horizon != problem.N:
            raise ParseError("solution document horizon does not match the problem")
        results += solution_document_checks(problem, doc, tol)
    closed = solve_closed_loop(problem)
    results += invariant_suite(problem, tol, closed=closed)
    if args.level == "full":
        try:
            results += oracle_suite(problem, tol, closed=closed, seed=args.seed,
                                    horizon=args.oracle_horizon)
        except SearchBudgetExceeded as exc:
            results.append(CheckResult("brute_force_search", False, float("inf"), 0.0, str(exc)))
    lines = _check_lines(results, args.precision)
    m = RunManifest("verify", args.problem, args.level, tol, __version__)
    if args.out:
        w = _Writer(args.out, m)
        w.write("verify_report.txt", "\n".join(lines) + "\n")
        w.finish(started)
    print("\n".join(lines))
    failed = [c for c in results if not c.passed]
    if failed:
        raise VerificationFailed(failed)
    return m


def _deviation_rows(sol_fb, sol_cl):
    computed = {
        ("Table1", "follower"): [float(K[0, 0]) for K in sol_fb.Kf],
        ("Table1", "leader"): [float(K[0, 0]) for K in sol_fb.Kl],
        ("Table2", "follower"): [float(K[0, 0]) for K in sol_cl.effective_follower],
        ("Table2", "leader"): [float(K[0, 0]) for K in sol_cl.effective_leader],
        ("Table3", "Kbar"): [float(K[0, 0]) for K in sol_cl.leader_schedule.current],
        ("Table3", "Gbar"): [float(G[0, 0]) for G in sol_cl.leader_schedule.memory],
    }
    published = {
        ("Table1", "follower"): benchmark.TABLE1["follower"],
        ("Table1", "leader"): benchmark.TABLE1["leader"],
        ("Table2", "follower"): benchmark.TABLE2["follower"],
        ("Table2", "leader"): benchmark.TABLE2["leader"],
        ("Table3", "Kbar"): benchmark.TABLE3["Kbar"],
        ("Table3", "Gbar"): benchmark.TABLE3["Gbar"],
    }
    rows = []
    for key, values in computed.items():
        for k, v in enumerate(values):
            ref = published[key][k]
            if ref is None:
                rows.append((*key, k, v, None, None, "not-printed"))
                continue
            dev = abs(v - ref)
            if dev <= benchmark.TABLE_TOL:
                status = "ok"
            elif key[0] != "Table1" and k in benchmark.SUSPECT_STAGES:
                status = "suspected-typo"
            else:
                status = "deviates"
            rows.append((*key, k, v, ref, dev, status))
    return computed, rows


def reproduction(precision=6):
    """Tables and deviation report for the embedded instance."""
    problem = benchmark.benchmark_problem()
    fb = solve_feedback_stackelberg(problem)
    cl = solve_closed_loop(problem)
    computed, rows = _deviation_rows(fb, cl)
    tables = {
        "table1.csv": table_csv(("follower", "leader"),
                                {"follower": computed[("Table1", "follower")],
                                 "leader": computed[("Table1", "leader")]}, precision),
        "table2.csv": table_csv(("follower", "leader"),
                                {"follower": computed[("Table2", "follower")],
                                 "leader": computed[("Table2", "leader")]}, precision),
        "table3.csv": table_csv(("Kbar", "Gbar"),
                                {"Kbar": computed[("Table3", "Kbar")],
                                 "Gbar": [None] + computed[("Table3", "Gbar")][1:]}, precision),
    }
    lines = [f"deviation report (flag threshold {benchmark.TABLE_TOL})",
             f"{'table':<7} {'entry':<9} {'k':>2} {'computed':>12} {'published':>12} "
             f"{'deviation':>12}  status"]
    for table, entry, k, v, ref, dev, status in rows:
        ref_s = "" if ref is None else fmt(ref, 4)
        dev_s = "" if dev is None else fmt(dev, precision)
        lines.append(f"{table:<7} {entry:<9} {k:>2} {fmt(v, precision):>12} {ref_s:>12} "
                     f"{dev_s:>12}  {status}")
    lines.append("")
    lines.append("costs (predicted)")
    for mode, sol in (("feedback", fb), ("closed_loop", cl)):
        for who, val in (("follower", sol.predicted_Jf), ("leader", sol.predicted_Jl)):
            ref = benchmark.COSTS[mode][who]
            lines.append(f"{mode:<12} {who:<9} {fmt(val, precision):>14} {fmt(ref, 4):>12} "
                         f"{fmt(abs(val - ref), precision):>12}")
    lines.append("")
    return tables, "\n".join(lines), rows


def cmd_reproduce(args) -> RunManifest:
    started = time.perf_counter()
    tables, report, rows = reproduction(args.precision)
    m = RunManifest("reproduce", BENCHMARK_TOKEN, "closed-loop,feedback",
                    {"table": benchmark.TABLE_TOL}, __version__)
    w = _Writer(args.out, m)
    for name, text in tables.items():
        w.write(name, text)
    w.write("deviations.txt", report)
    w.finish(started)
    flagged = sum(1 for r in rows if r[-1] in ("deviates", "suspected-typo"))
    print(f"wrote {len(m.outputs)} files to {args.out}; {flagged} table entries flagged")
    return m


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lqstackelberg",
                                 description="LQ leader-follower games with one-step-memory strategies.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, problem=True, out_required=True):
        if problem:
            p.add_argument("problem", help=f"problem JSON file, or {BENCHMARK_TOKEN}")
        p.add_argument("--out", required=out_required, help="output directory")
        p.add_argument("--precision", type=int, default=6, help="decimals in text output")

    p = sub.add_parser("solve", help="solve and write the solution document and gain table")
    common(p)
    p.add_argument("--mode", choices=("closed-loop", "feedback"), default="closed-loop")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="solve, simulate and write the trajectory table")
    common(p)
    p.add_argument("--mode", choices=("closed-loop", "feedback"), default="closed-loop")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", help="closed-loop versus feedback costs and gains")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", help="run the invariant suite (and the brute-force oracle)")
    common(p, out_required=False)
    p.add_argument("--level", choices=("fast", "full"), default="fast")
    p.add_argument("--solution", help="solution document to audit")
    p.add_argument("--seed", type=int, default=0, help="oracle multi-start seed")
    p.add_argument("--oracle-horizon", type=int, default=1,
                   help="horizon the brute-force search is truncated to")
    p.add_argument("--tolerance", action="append", metavar="NAME=VALUE",
                   help="override a check tolerance (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reproduce", help="regenerate the benchmark gain tables and deviation report")
    common(p, problem=False)
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.precision < 0 or args.precision > 30:
        print("error: --precision must lie in [0, 30]", file=sys.stderr)
        return EXIT_INPUT
    try:
        args.func(args)
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except SolverError as exc:
        print(f"solver error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (DimensionTooLarge, StackelbergError) as exc:
        print(f"input error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
