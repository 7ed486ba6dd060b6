import io
import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lqstackelberg import (DefinitenessError, DimensionError, GainSchedule, ParseError,
                           StageOutOfRange, dump_problem, evaluate_strategy, load_problem,
                           validate)
from lqstackelberg.model import problem_to_dict, scalar_problem

from conftest import random_problem


def _doc(bench):
    return problem_to_dict(bench)


def test_scalar_and_one_by_one_parse_identically(bench):
    nested = _doc(bench)
    flat = {k: (v[0][0] if isinstance(v, list) and isinstance(v[0], list) else v)
            for k, v in nested.items()}
    flat["x0"] = 5.0
    assert load_problem(json.dumps(flat)).same_as(load_problem(json.dumps(nested)))


@pytest.mark.parametrize("source", ["text", "bytes", "stream"])
def test_load_accepts_text_bytes_and_streams(bench, source):
    text = dump_problem(bench)
    arg = {"text": text, "bytes": text.encode(), "stream": io.BytesIO(text.encode())}[source]
    assert load_problem(arg).same_as(bench)


@pytest.mark.parametrize("mutate, err", [
    (lambda d: d.pop("Q"), ParseError),
    (lambda d: d.update(N=2.5), ParseError),
    (lambda d: d.update(A=[[1, 2], [3]]), ParseError),
    (lambda d: d.update(A=[["a"]]), ParseError),
    (lambda d: d.update(B1=[[1], [1]]), DimensionError),
    (lambda d: d.update(x0=[1, 2]), DimensionError),
    (lambda d: d.update(N=-1), DimensionError),
    (lambda d: d.update(R1=0), DefinitenessError),
    (lambda d: d.update(Q=-1), DefinitenessError),
])
def test_bad_documents_raise_typed_errors(bench, mutate, err):
    d = _doc(bench)
    mutate(d)
    with pytest.raises(err):
        load_problem(json.dumps(d))


def test_invalid_json_is_a_parse_error():
    with pytest.raises(ParseError):
        load_problem("{not json")


def test_tiny_asymmetry_is_repaired_large_is_rejected():
    rng = np.random.default_rng(0)
    p = random_problem(rng, n=2, m1=1, m2=1, N=1)
    d = problem_to_dict(p)
    Q = np.array(d["Q"])
    d["Q"] = (Q + np.array([[0, 1e-14], [0, 0]])).tolist()
    q = load_problem(json.dumps(d)).Q
    assert np.array_equal(q, q.T)
    d["Q"] = (Q + np.array([[0, 1e-3], [0, 0]])).tolist()
    with pytest.raises(DefinitenessError):
        load_problem(json.dumps(d))


def test_validate_reports_codes_without_raising(bench):
    bad = bench.replace(R2=[[-1.0]], Qbar=[[-2.0]])
    rep = validate(bad)
    assert not rep.ok
    assert {"R2_not_pd", "Qbar_not_psd"} <= set(rep.codes())
    assert validate(bench).ok


def test_problem_arrays_are_read_only(bench):
    with pytest.raises(ValueError):
        bench.A[0, 0] = 1.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_json_round_trip_is_exact(seed):
    p = random_problem(np.random.default_rng(seed))
    assert load_problem(dump_problem(p)).same_as(p)


def test_gain_schedule_invariants():
    z = np.zeros((1, 1))
    with pytest.raises(ValueError):
        GainSchedule((z, z), (z,))
    with pytest.raises(ValueError):
        GainSchedule((z,), (np.ones((1, 1)),))
    with pytest.raises(ValueError):
        GainSchedule((z, np.zeros((1, 2))), (z, z))
    s = GainSchedule.zeros(3, 2, 1)
    assert s.horizon == 3 and s.shape == (2, 1)


def test_evaluate_strategy_memory_and_range():
    s = GainSchedule((np.array([[2.0]]), np.array([[3.0]])), (np.zeros((1, 1)), np.array([[0.5]])))
    assert evaluate_strategy(s, 0, np.array([1.0]), np.array([7.0]))[0] == 2.0
    assert evaluate_strategy(s, 1, np.array([1.0]), np.array([2.0]))[0] == 4.0
    with pytest.raises(StageOutOfRange):
        evaluate_strategy(s, 2, np.array([1.0]))
    with pytest.raises(IndexError):
        evaluate_strategy(s, -1, np.array([1.0]))


def test_scalar_problem_rejects_non_finite():
    with pytest.raises(ValueError):
        scalar_problem(A=float("nan"), B1=1, B2=1, Q=1, R1=1, R2=1, Qbar=1, R1bar=1, R2bar=1,
                       P_terminal=1, Pbar_terminal=1, N=1, x0=1)
