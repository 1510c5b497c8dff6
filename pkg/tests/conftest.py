import numpy as np
import pytest
from hypothesis import settings, strategies as st

from choicebandit.gev import GnlModel, Nest

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def nl_models(draw, max_n=10):
    n = draw(st.integers(1, max_n))
    perm = draw(st.permutations(range(n)))
    cuts = sorted(draw(st.sets(st.integers(1, max(1, n - 1)), max_size=3)) if n > 1 else [])
    blocks, start = [], 0
    for c in cuts + [n]:
        if c > start:
            blocks.append(list(perm[start:c]))
            start = c
    mus = [draw(st.floats(0.15, 1.0)) for _ in blocks]
    return GnlModel.nl(blocks, mus)


@st.composite
def gnl_models(draw, max_n=10):
    """Arbitrary GNL models, including alternatives shared between two nests."""
    n = draw(st.integers(1, max_n))
    L = draw(st.integers(1, min(n, 4)))
    mu = draw(st.floats(0.5, 1.5))
    nest_mu = [mu * draw(st.floats(0.15, 1.0)) for _ in range(L)]
    alloc = [dict() for _ in range(L)]
    for i in range(n):
        first = i if i < L else draw(st.integers(0, L - 1))
        second = draw(st.integers(0, L - 1))
        if second != first and draw(st.booleans()):
            w = draw(st.floats(0.1, 0.9))
            alloc[first][i], alloc[second][i] = w, 1.0 - w
        else:
            alloc[first][i] = 1.0
    return GnlModel(n, mu, tuple(Nest(str(k), nest_mu[k], alloc[k]) for k in range(L)))


def utilities(n, bound=50.0):
    return st.lists(st.floats(-bound, bound), min_size=n, max_size=n).map(np.array)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run regardless of capture
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
