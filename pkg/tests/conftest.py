import numpy as np
import pytest

from hirzebruch_csc import CurvatureState, SolverParams, solve_closed_form

M_VALUES = (1, 2, 3)
R_VALUES = (-8.0, 0.0, 8.0, 24.0, 40.0)
GRID = [(m, R) for m in M_VALUES for R in R_VALUES]


def random_jets(n=1000, seed=0, lo=0.2, hi=3.0):
    rng = np.random.default_rng(seed)
    f = rng.uniform(lo, hi, n)
    d = rng.uniform(-3.0, 3.0, (4, n))
    return CurvatureState(np.zeros(n), f, d[0], d[1], d[2], d[3])


@pytest.fixture(scope="session")
def g18():
    return solve_closed_form(SolverParams(1, 8.0))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
