import random

import pytest

from ldpcstore.graph import FactorGraph, graph_from_parity_rows


@pytest.fixture
def seven_block_graph():
    """Seven blocks, four checks.

    Block 0 sits on check 0 with blocks 1 and 2; blocks 4 and 6 share both
    of their checks, so erasing the two of them is unrecoverable.
    """
    rows = [[0, 1, 2], [0, 3, 4, 6], [1, 4, 5, 6], [2, 3, 5]]
    return graph_from_parity_rows(rows, 7)


def random_graph(rng: random.Random, n_max=200, m_max=80, p=None) -> FactorGraph:
    """Random bipartite graph; every block gets at least one check."""
    n = rng.randint(2, n_max)
    m = rng.randint(1, m_max)
    dmax = min(m, 4)
    edges = set()
    for v in range(n):
        for c in rng.sample(range(m), rng.randint(1, dmax)):
            edges.add((v, c))
    return FactorGraph.from_edges(n, m, sorted(edges))


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
        terminalreporter.write_line(line)
