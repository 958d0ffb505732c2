import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from averkit.core import build_graph  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def path4():
    """Stubborn ends v0=0, v1=3 and an undirected interior a=1, b=2."""
    return build_graph([(0, 0, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1), (2, 3, 1), (3, 3, 1)])


@pytest.fixture
def k3():
    return build_graph([(i, j, 1.0) for i in range(3) for j in range(3) if i != j])


@pytest.fixture
def two_cycle():
    return build_graph([(0, 1, 1.0), (1, 0, 1.0)])


def undirected_path(n, w=1.0):
    edges = [(i, i + 1, w) for i in range(n - 1)] + [(i + 1, i, w) for i in range(n - 1)]
    return build_graph(edges, n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


np.set_printoptions(precision=6, suppress=True)
