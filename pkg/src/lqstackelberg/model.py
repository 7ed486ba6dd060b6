"""Game data model, strategy schedules, validation and problem-file ingestion."""
from __future__ import annotations

import io
import json
import math
import numbers
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DefinitenessError, DimensionError, ParseError, StageOutOfRange
from .linalg import asymmetry

SYMMETRY_TOL = 1e-12
DEFINITENESS_RTOL = 1e-10

MATRIX_FIELDS = ("A", "B1", "B2", "Q", "R1", "R2", "Qbar", "R1bar", "R2bar",
                 "P_terminal", "Pbar_terminal")
PSD_FIELDS = ("Q", "Qbar", "P_terminal", "Pbar_terminal")
PD_FIELDS = ("R1", "R2", "R1bar", "R2bar")
WEIGHT_FIELDS = PSD_FIELDS + PD_FIELDS


def _frozen(a, ndim=2):
    a = np.array(a, dtype=float)
    if ndim == 2 and a.ndim < 2:
        a = a.reshape((1, 1)) if a.size == 1 else np.atleast_2d(a)
    if ndim == 1:
        a = a.reshape(-1)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class GameProblem:
    """Finite-horizon LQ leader-follower game.

    The state evolves as ``x[k+1] = A x[k] + B1 uf[k] + B2 ul[k]`` for
    ``k = 0..N``; the follower weights are ``Q, R1, R2, P_terminal`` and the
    leader weights ``Qbar, R1bar, R2bar, Pbar_terminal``.

    Construction never checks definiteness; use :func:`validate`.
    """

    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    Q: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    Qbar: np.ndarray
    R1bar: np.ndarray
    R2bar: np.ndarray
    P_terminal: np.ndarray
    Pbar_terminal: np.ndarray
    N: int
    x0: np.ndarray

    def __post_init__(self):
        for name in MATRIX_FIELDS:
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "x0", _frozen(self.x0, ndim=1))
        object.__setattr__(self, "N", int(self.N))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m1(self) -> int:
        return self.B1.shape[1]

    @property
    def m2(self) -> int:
        return self.B2.shape[1]

    def replace(self, **changes) -> "GameProblem":
        data = {name: getattr(self, name) for name in MATRIX_FIELDS + ("N", "x0")}
        data.update(changes)
        return GameProblem(**data)

    def same_as(self, other: "GameProblem") -> bool:
        """Exact equality of every field."""
        if self.N != other.N:
            return False
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in MATRIX_FIELDS + ("x0",)
        )


@dataclass(frozen=True, eq=False)
class GainSchedule:
    """Per-stage gains of a one-step-memory strategy ``u[k] = current[k] x[k] + memory[k] x[k-1]``."""

    current: tuple
    memory: tuple

    def __post_init__(self):
        cur = tuple(_frozen(c) for c in self.current)
        mem = tuple(_frozen(g) for g in self.memory)
        if len(cur) == 0 or len(cur) != len(mem):
            raise ValueError("current and memory must be non-empty and of equal length")
        for c, g in zip(cur, mem):
            if c.shape != g.shape or c.shape != cur[0].shape:
                raise ValueError("all gain matrices must share one shape")
            if not (np.all(np.isfinite(c)) and np.all(np.isfinite(g))):
                raise ValueError("gain entries must be finite")
        if np.any(mem[0] != 0.0):
            raise ValueError("memory[0] must be the zero matrix (no state before x0)")
        object.__setattr__(self, "current", cur)
        object.__setattr__(self, "memory", mem)

    @property
    def horizon(self) -> int:
        return len(self.current) - 1

    @property
    def shape(self):
        return self.current[0].shape

    @classmethod
    def zeros(cls, N: int, m: int, n: int) -> "GainSchedule":
        z = [np.zeros((m, n)) for _ in range(N + 1)]
        return cls(tuple(z), tuple(z))

    @classmethod
    def memoryless(cls, gains: Sequence) -> "GainSchedule":
        gains = [_frozen(g) for g in gains]
        return cls(tuple(gains), tuple(np.zeros_like(g) for g in gains))

    def evaluate(self, k, x_k, x_prev=None):
        return evaluate_strategy(self, k, x_k, x_prev)


def evaluate_strategy(s: GainSchedule, k: int, x_k, x_prev=None) -> np.ndarray:
    """Control at stage ``k``; ``x_prev`` defaults to zero (the state before x0)."""
    if not 0 <= k <= s.horizon:
        raise StageOutOfRange(f"stage {k} outside 0..{s.horizon}")
    x_k = np.asarray(x_k, dtype=float).reshape(-1)
    u = s.current[k] @ x_k
    if x_prev is not None:
        u = u + s.memory[k] @ np.asarray(x_prev, dtype=float).reshape(-1)
    return u


# ---------------------------------------------------------------- validation

@dataclass(frozen=True)
class Finding:
    severity: str
    code: str
    message: str


@dataclass
class ValidationReport:
    findings: list = field(default_factory=list)
    eigen_extremes: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not any(f.severity == "error" for f in self.findings)

    def codes(self):
        return [f.code for f in self.findings]

    def error(self, code, message):
        self.findings.append(Finding("error", code, message))


def _definiteness(M, strict):
    """Return (ok, min_eig, max_eig) with the relative eigenvalue test."""
    if M.shape == (1, 1):
        v = float(M[0, 0])
        return (v > 0.0 if strict else v >= 0.0), v, v
    eig = np.linalg.eigvalsh(0.5 * (M + M.T))
    lo, hi = float(eig.min()), float(eig.max())
    scale = max(abs(lo), abs(hi))
    if strict:
        ok = scale > 0.0 and lo > DEFINITENESS_RTOL * scale
    else:
        ok = lo >= -DEFINITENESS_RTOL * scale
    return ok, lo, hi


def validate(p: GameProblem) -> ValidationReport:
    """Check shapes, symmetry and definiteness of every matrix; never raises."""
    rep = ValidationReport()
    n = p.A.shape[0]
    if p.A.shape != (n, n):
        rep.error("A_not_square", f"A has shape {p.A.shape}")
    if p.B1.shape[0] != n:
        rep.error("B1_rows", f"B1 has {p.B1.shape[0]} rows, expected {n}")
    if p.B2.shape[0] != n:
        rep.error("B2_rows", f"B2 has {p.B2.shape[0]} rows, expected {n}")
    m1, m2 = p.B1.shape[1], p.B2.shape[1]
    expected = {"Q": n, "Qbar": n, "P_terminal": n, "Pbar_terminal": n,
                "R1": m1, "R1bar": m1, "R2": m2, "R2bar": m2}
    if p.x0.shape != (n,):
        rep.error("x0_length", f"x0 has length {p.x0.size}, expected {n}")
    if p.N < 0:
        rep.error("N_negative", f"horizon N={p.N} is negative")
    for name in MATRIX_FIELDS:
        if not np.all(np.isfinite(getattr(p, name))):
            rep.error(f"{name}_not_finite", f"{name} has non-finite entries")
    if not np.all(np.isfinite(p.x0)):
        rep.error("x0_not_finite", "x0 has non-finite entries")
    for name in WEIGHT_FIELDS:
        M = getattr(p, name)
        d = expected[name]
        if M.shape != (d, d):
            rep.error(f"{name}_shape", f"{name} has shape {M.shape}, expected ({d}, {d})")
            continue
        if not np.all(np.isfinite(M)):
            continue
        if asymmetry(M) > SYMMETRY_TOL:
            rep.error(f"{name}_not_symmetric", f"{name} asymmetry {asymmetry(M):.3e}")
        strict = name in PD_FIELDS
        ok, lo, hi = _definiteness(M, strict)
        rep.eigen_extremes[name] = (lo, hi)
        if not ok:
            kind = "pd" if strict else "psd"
            rep.error(f"{name}_not_{kind}",
                      f"{name} is not {'positive definite' if strict else 'positive semidefinite'}"
                      f" (eigenvalues in [{lo:.6g}, {hi:.6g}])")
    return rep


# ----------------------------------------------------------------- file I/O

def _is_number(v):
    return isinstance(v, numbers.Real) and not isinstance(v, bool)


def _parse_matrix(name, value):
    if _is_number(value):
        return np.array([[float(value)]])
    if not isinstance(value, list) or not value:
        raise ParseError(f"{name}: expected a number or a non-empty array of rows")
    if not all(isinstance(row, list) for row in value):
        raise ParseError(f"{name}: expected an array of rows")
    width = len(value[0])
    if width == 0 or any(len(row) != width for row in value):
        raise ParseError(f"{name}: rows are empty or ragged")
    if not all(_is_number(v) for row in value for v in row):
        raise ParseError(f"{name}: entries must be numbers")
    return np.array(value, dtype=float)


def _parse_vector(name, value):
    if _is_number(value):
        return np.array([float(value)])
    if isinstance(value, list) and value and all(_is_number(v) for v in value):
        return np.array(value, dtype=float)
    if isinstance(value, list) and value and all(isinstance(r, list) for r in value):
        flat = [v for r in value for v in r]
        if all(len(r) == 1 for r in value) or len(value) == 1:
            if all(_is_number(v) for v in flat):
                return np.array(flat, dtype=float)
    raise ParseError(f"{name}: expected a number or a flat array of numbers")


def _read_text(source) -> str:
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, (bytes, bytearray)):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"problem document is not UTF-8: {exc}") from None
    if not isinstance(source, str):
        raise ParseError("problem source must be bytes, text or a readable stream")
    return source


def _repair_symmetry(name, M):
    if M.shape[0] != M.shape[1]:
        return M
    gap = asymmetry(M)
    if gap > SYMMETRY_TOL:
        raise DefinitenessError(f"{name} is not symmetric (max asymmetry {gap:.3e})")
    if gap > 0.0:
        M = 0.5 * (M + M.T)
    return M


def problem_from_dict(doc: dict) -> GameProblem:
    """Build and check a problem from a decoded JSON object."""
    if not isinstance(doc, dict):
        raise ParseError("problem document must be a JSON object")
    missing = [f for f in MATRIX_FIELDS + ("N", "x0") if f not in doc]
    if missing:
        raise ParseError(f"missing fields: {', '.join(missing)}")
    mats = {name: _parse_matrix(name, doc[name]) for name in MATRIX_FIELDS}
    N = doc["N"]
    if isinstance(N, bool) or not isinstance(N, int):
        raise ParseError("N must be an integer")
    x0 = _parse_vector("x0", doc["x0"])
    for name in WEIGHT_FIELDS:
        mats[name] = _repair_symmetry(name, mats[name])
    p = GameProblem(N=N, x0=x0, **mats)

    rep = validate(p)
    dim_errors = [f for f in rep.findings
                  if f.code.endswith(("_shape", "_rows", "_not_square", "_length"))
                  or f.code == "N_negative"]
    if dim_errors:
        raise DimensionError("; ".join(f.message for f in dim_errors))
    other = [f for f in rep.findings if f.severity == "error"]
    if other:
        raise DefinitenessError("; ".join(f"{f.code}: {f.message}" for f in other))
    return p


def load_problem(source) -> GameProblem:
    """Parse a problem document from bytes, text or a readable stream."""
    text = _read_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    return problem_from_dict(doc)


def read_problem(path) -> GameProblem:
    with open(path, "rb") as fh:
        return load_problem(fh)


def problem_to_dict(p: GameProblem) -> dict:
    doc = {name: getattr(p, name).tolist() for name in MATRIX_FIELDS}
    doc["N"] = p.N
    doc["x0"] = p.x0.tolist()
    return doc


def dump_problem(p: GameProblem, indent=None) -> str:
    for name in MATRIX_FIELDS + ("x0",):
        if not np.all(np.isfinite(getattr(p, name))):
            raise ValueError(f"{name} has non-finite entries; JSON cannot carry them")
    return json.dumps(problem_to_dict(p), indent=indent)


def write_problem(p: GameProblem, path) -> None:
    with io.open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_problem(p, indent=2))
        fh.write("\n")


def scalar_problem(A, B1, B2, Q, R1, R2, Qbar, R1bar, R2bar, P_terminal, Pbar_terminal, N, x0):
    """Convenience constructor for one-dimensional instances."""
    vals = dict(A=A, B1=B1, B2=B2, Q=Q, R1=R1, R2=R2, Qbar=Qbar, R1bar=R1bar,
                R2bar=R2bar, P_terminal=P_terminal, Pbar_terminal=Pbar_terminal)
    for k, v in vals.items():
        if not math.isfinite(float(v)):
            raise ValueError(f"{k} must be finite")
    return GameProblem(N=N, x0=[x0], **{k: [[float(v)]] for k, v in vals.items()})
