import numpy as np
import pytest

from lqstackelberg import GameProblem, benchmark_problem

ACCEPTANCE_LINES = []


def spd(rng, d, floor=0.5):
    M = rng.standard_normal((d, d))
    return M @ M.T + floor * np.eye(d)


def psd(rng, d):
    # rank-deficient half the time so semidefinite weights get exercised
    r = d if rng.random() < 0.5 else max(1, d - 1)
    M = rng.standard_normal((d, r))
    return M @ M.T


def random_problem(rng, n=None, m1=None, m2=None, N=None):
    n = n if n is not None else int(rng.integers(1, 3))
    m1 = m1 if m1 is not None else int(rng.integers(1, n + 1))
    m2 = m2 if m2 is not None else int(rng.integers(1, n + 1))
    N = N if N is not None else int(rng.integers(0, 6))
    return GameProblem(
        A=rng.uniform(-1.2, 1.2, (n, n)),
        B1=rng.standard_normal((n, m1)),
        B2=rng.standard_normal((n, m2)),
        Q=psd(rng, n), R1=spd(rng, m1), R2=spd(rng, m2),
        Qbar=psd(rng, n), R1bar=spd(rng, m1), R2bar=spd(rng, m2),
        P_terminal=psd(rng, n), Pbar_terminal=psd(rng, n),
        N=N, x0=rng.standard_normal(n) * 2.0,
    )


def random_problems(seed, count, **kw):
    rng = np.random.default_rng(seed)
    return [random_problem(rng, **kw) for _ in range(count)]


@pytest.fixture(scope="session")
def bench():
    return benchmark_problem()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
