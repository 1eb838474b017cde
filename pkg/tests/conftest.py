"""Shared graphs and seeded random corpora."""

import random

import pytest

from cstarkit import config
from cstarkit.graph import INF, Graph, parse_graph


def two_vertex(a, b, d, c=0) -> Graph:
    return Graph.from_matrix([[a, b], [c, d]])


# (a, d, b) for [[a, b], [0, d]] with H = {w}:
# K0(ideal), K0(algebra), K0(quotient) as {"rank", "factors"}, and the case tag.
TABLE_ROWS = [
    ((0, 0, INF), (1, []), (2, []), (1, []), "[11]"),
    ((0, 3, INF), (0, [2]), (1, [2]), (1, []), "[∞1]"),
    ((0, INF, INF), (1, []), (2, []), (1, []), "[∞1]"),
    ((4, 0, 1), (1, []), (1, []), (0, [3]), "[1∞]"),
    ((4, 4, 2), (0, [3]), (0, [9]), (0, [3]), "[∞∞]"),
    ((4, INF, 3), (1, []), (1, [3]), (0, [3]), "[∞∞]"),
    ((INF, 0, 2), (1, []), (2, []), (1, []), "[1∞]"),
    ((INF, 3, 1), (0, [2]), (1, [2]), (1, []), "[∞∞]"),
    ((INF, INF, INF), (1, []), (2, []), (1, []), "[∞∞]"),
]


def table_graph(a, d, b) -> Graph:
    return two_vertex(a, b, d)


EXAMPLE_5_6_E = """\
# x: two loops and one edge to each sink
vertices: v w x
edge x x 2
edge x v 1
edge x w 1
"""

EXAMPLE_5_6_E_PRIME = """\
vertices: v w x
edge x x 2
edge x v 2
edge x w 2
"""


@pytest.fixture
def fourex():
    """The three one-sink extensions of O_4: [[4, b], [0, 0]] for b = 1, 2, 3."""
    return [two_vertex(4, b, 0) for b in (1, 2, 3)]


@pytest.fixture
def corner_pair():
    return parse_graph(EXAMPLE_5_6_E), parse_graph(EXAMPLE_5_6_E_PRIME)


@pytest.fixture
def default_config():
    """Restore the default configuration after a test that changes it."""
    yield config
    config.load_config()


def random_graph(rng: random.Random, n: int, weights=(6, 3, 1, 1)) -> Graph:
    """Sparse random graph; multiplicities drawn from 0, 1, 2 and INF."""
    values = [0, 1, 2, INF]
    rows = [[rng.choices(values, weights=weights)[0] for _ in range(n)] for _ in range(n)]
    return Graph.from_matrix(rows)


def random_corpus(seed: int, count: int, max_vertices: int, weights=(6, 3, 1, 1)):
    rng = random.Random(seed)
    return [random_graph(rng, rng.randint(1, max_vertices), weights) for _ in range(count)]
