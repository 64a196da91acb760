import numpy as np
import pytest
from hypothesis import settings

from dualprox.dualcore import ProblemInstance
from dualprox.graph import Graph
from dualprox.harness.config import RunConfig
from dualprox.harness.instance import generate_instance
from dualprox.oracles import PolytopeOracle, QuadraticOracle, ZeroOracle

settings.register_profile("ci", max_examples=50, deadline=None)
settings.register_profile("dev", max_examples=200, deadline=None)
settings.load_profile("ci")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def two_node():
    """f1 = x^2, f2 = x^2 - 4x, no constraints; optimum x* = 1, value -2."""
    g = Graph.from_edges(2, [(1, 2)])
    f = [QuadraticOracle([1.0], [0.0]), QuadraticOracle([1.0], [-4.0])]
    return ProblemInstance(g, f, [ZeroOracle(1), ZeroOracle(1)], 1)


@pytest.fixture
def two_node_constrained():
    """Same costs with x <= 0.5 at node 2; optimum x* = 0.5, value 0.5 - 2 + 0.25 = -1.5."""
    g = Graph.from_edges(2, [(1, 2)])
    f = [QuadraticOracle([1.0], [0.0]), QuadraticOracle([1.0], [-4.0])]
    return ProblemInstance(g, f, [ZeroOracle(1), PolytopeOracle([[1.0]], [0.5])], 1)


def make_instance(n=5, d=2, p=0.5, seed=0, m=1):
    cfg = RunConfig(n=n, d=d, graph_p=p, seed=seed, m_halfspaces=m, node=1)
    return generate_instance(cfg, np.random.default_rng(seed))


@pytest.fixture(scope="session")
def sec5_instance():
    cfg = RunConfig(seed=0)
    return generate_instance(cfg, np.random.default_rng(0))
