import numpy as np
import pytest

from ssetk.graph import RegularGraph, complete_graph, cycle_graph


def two_cliques_matching(k: int) -> RegularGraph:
    """Two copies of K_k with vertex i joined to i + k; k-regular."""
    edges = []
    for off in (0, k):
        edges += [(off + i, off + j) for i in range(k) for j in range(i + 1, k)]
    edges += [(i, i + k) for i in range(k)]
    return RegularGraph(2 * k, k, np.array(edges))


def k4_minus_edge_pair() -> RegularGraph:
    """Two copies of K4 minus an edge, joined by bridges 2-6 and 3-7; 3-regular on 8 vertices."""
    e = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]
    edges = e + [(a + 4, b + 4) for a, b in e] + [(2, 6), (3, 7)]
    return RegularGraph(8, 3, np.array(edges))


@pytest.fixture
def k4():
    return complete_graph(4)


@pytest.fixture
def c4():
    return cycle_graph(4)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def clustered_instance():
    """Expander with three tight vector clusters plus 600 spread points, rounded through both passes.

    Unlike planted instances (where every occupied cell is heavy) this leaves
    several hundred light vertices, so the separation check is not vacuous.
    """
    from ssetk.graph import generate_random_regular
    from ssetk.sdp import VectorSolution
    from ssetk.softround import round_to_boundary, round_to_corners
    from ssetk.sphere import build_triangulation, compute_profile

    def unit(x):
        return x / np.linalg.norm(x, axis=-1, keepdims=True)

    g = generate_random_regular(3000, 4, seed=1)
    eps = 0.2
    tri = build_triangulation(eps, 4.0)
    rng = np.random.default_rng(0)
    C = unit(rng.standard_normal((3, 3)))
    Z = C[rng.integers(3, size=3000)] + 0.02 * rng.standard_normal((3000, 3))
    Z[:600] = rng.standard_normal((600, 3))
    sol = VectorSolution(unit(Z))
    prof = compute_profile(sol, tri, eps)
    z1, t1 = round_to_boundary(sol, prof, tri, g)
    z2, t2 = round_to_corners(z1, prof, tri, g)
    return g, tri, prof, sol, z1, z2, t1, t2


ACCEPTANCE_LINES: list = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
