import random
from pathlib import Path

import pytest
from hypothesis import settings

from cwsolve.clique_expr import evaluate, random_expression
from cwsolve.graph_core import LabeledGraph

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"


def random_instance(seed: int, n_max: int = 8, k_max: int = 3, n_min: int = 2):
    rng = random.Random(seed)
    n = rng.randint(n_min, n_max)
    k = rng.randint(2, k_max)
    expr = random_expression(n, k, seed)
    return expr, evaluate(expr)


def random_graph(rng: random.Random, n: int, p: float) -> LabeledGraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return LabeledGraph.from_edges(n, edges)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
