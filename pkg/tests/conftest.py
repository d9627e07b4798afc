import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from mgdyn.multigraph import Multigraph, Pattern

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# (label, passed, detail) in the order the acceptance tests ran
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {label}: {detail}")


@pytest.fixture
def record():
    def _record(label, passed, detail=""):
        ACCEPTANCE.append((str(label), bool(passed), detail))
        print(f"{'PASS' if passed else 'FAIL'}  criterion {label}: {detail}")
        return passed
    return _record


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def triangle() -> Multigraph:
    return Multigraph(3, [(0, 1), (1, 2), (0, 2)])


@st.composite
def multigraphs(draw, min_n=1, max_n=6, max_mult=3):
    n = draw(st.integers(min_n, max_n))
    z = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        z[i, i] = 2 * draw(st.integers(0, max_mult))
        for j in range(i + 1, n):
            z[i, j] = z[j, i] = draw(st.integers(0, max_mult))
    return Multigraph.from_adjacency(z)


@st.composite
def patterns(draw, max_k=3, max_mult=3):
    k = draw(st.integers(1, max_k))
    a = np.zeros((k, k), dtype=np.int64)
    for i in range(k):
        a[i, i] = 2 * draw(st.integers(0, max_mult // 2 + 1))
        for j in range(i + 1, k):
            a[i, j] = a[j, i] = draw(st.integers(0, max_mult))
    return Pattern(a)
