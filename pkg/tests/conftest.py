import numpy as np
import pytest

from frontier.graphs import build_graph, load_graph


# 4-vertex workhorse: a triangle (0,1,2) with a pendant vertex 3 hanging
# off vertex 2.  Small enough to enumerate product chains by hand.
TRI_PENDANT_TEXT = "0 1\n1 2\n0 2\n2 3\n"


@pytest.fixture
def tri_pendant():
    return load_graph(TRI_PENDANT_TEXT)


@pytest.fixture
def k5():
    edges = [(i, j) for i in range(5) for j in range(5) if i != j]
    return build_graph(np.asarray(edges))


# directed fixture with varied in/out degrees; exact assortativity frozen
# in the tests that consume it
DIRECTED_FIXTURE_EDGES = [
    (0, 1), (0, 2), (0, 3), (0, 4),
    (5, 1), (5, 2), (5, 3), (5, 4),
    (1, 6), (2, 6), (3, 6), (4, 6),
    (6, 0), (6, 5), (1, 2), (2, 1),
]


@pytest.fixture
def directed_fixture():
    return build_graph(np.asarray(DIRECTED_FIXTURE_EDGES))


def pytest_terminal_summary(terminalreporter):
    # re-emit the acceptance verdicts after the captured test output
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
