import itertools
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import k4_minus_edge_pair
from ssetk import oracle
from ssetk.errors import BudgetError, ParameterError
from ssetk.graph import (
    RegularGraph,
    VertexSet,
    boundary_size,
    complete_graph,
    cycle_graph,
    edge_expansion,
    generate_random_regular,
)
from ssetk.oracle import OracleBudget


def _naive_maxcut(g):
    best = 0
    for bits in itertools.product((0, 1), repeat=g.n - 1):
        side = np.array((0,) + bits, dtype=bool)
        best = max(best, int(np.sum(side[g.edges[:, 0]] != side[g.edges[:, 1]])))
    return best


def _naive_dense(g):
    best = None
    for y in itertools.product((-1, 0, 1), repeat=g.n):
        y = np.array(y)
        if not y.any():
            continue
        r = Fraction(int(np.abs(y[g.edges[:, 0]] + y[g.edges[:, 1]]).sum()), g.d * int(np.abs(y).sum()))
        best = r if best is None or r < best else best
    return best


@pytest.mark.parametrize("g, val", [(cycle_graph(4), 1.0), (cycle_graph(5), 0.8), (complete_graph(4), 4 / 6)])
def test_maxcut_values(g, val):
    side, v = oracle.brute_force_maxcut(g)
    assert v == pytest.approx(val, abs=1e-15)
    assert boundary_size(g, side) == round(val * g.m)


@pytest.mark.parametrize("seed", range(6))
def test_maxcut_matches_naive(seed):
    g = generate_random_regular(10, 3 if seed % 2 else 4, seed=seed)
    assert oracle.maxcut_edges(g)[0] == _naive_maxcut(g)


def test_maxcut_n24_feasible():
    g = generate_random_regular(24, 3, seed=0)
    t = time.perf_counter()
    side, v = oracle.brute_force_maxcut(g)
    assert time.perf_counter() - t < 60
    assert boundary_size(g, side) == round(v * g.m)


def test_conductance_planted_sides():
    g = k4_minus_edge_pair()
    s, phi = oracle.min_conductance(g, exact=True)
    assert phi == Fraction(1, 6)
    assert set(s.members) in ({0, 1, 2, 3}, {4, 5, 6, 7})


@pytest.mark.parametrize("n", range(3, 11))
def test_conductance_complete(n):
    s, phi = oracle.min_conductance(complete_graph(n), exact=True)
    assert phi == Fraction(n - n // 2, n - 1)
    assert len(s) == n // 2


def test_conductance_disconnected():
    g = RegularGraph(6, 2, np.array([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]))
    s, phi = oracle.min_conductance(g)
    assert phi == 0.0 and len(s) == 3


@pytest.mark.parametrize("seed", range(4))
def test_conductance_argmin_consistent(seed):
    g = generate_random_regular(14, 4, seed=seed)
    s, phi = oracle.min_conductance(g)
    assert phi == float(edge_expansion(g, s))
    rng = np.random.default_rng(seed)
    for _ in range(200):
        k = int(rng.integers(1, 8))
        sub = rng.choice(14, size=k, replace=False)
        assert float(edge_expansion(g, VertexSet(tuple(sub.tolist()), 14))) >= phi - 1e-15


def test_sse_profile_values():
    assert oracle.sse_profile(complete_graph(8), 0.1) == (None, float("inf"))
    _, phi = oracle.sse_profile(complete_graph(8), 0.25, exact=True)
    assert phi == Fraction(6, 7)
    s, phi = oracle.sse_profile(cycle_graph(12), 0.25, exact=True)
    assert phi == Fraction(1, 3) and len(s) == 3


@pytest.mark.parametrize("seed", range(4))
def test_dense_cut_matches_naive(seed):
    g = generate_random_regular(8, 3, seed=seed)
    y, r = oracle.brute_force_dense_cut(g, exact=True)
    assert r == _naive_dense(g)
    assert Fraction(int(np.abs(y[g.edges[:, 0]] + y[g.edges[:, 1]]).sum()), g.d * int(np.abs(y).sum())) == r


def test_dense_cut_values():
    y, r = oracle.brute_force_dense_cut(complete_graph(3), exact=True)
    assert r == Fraction(1, 3)
    assert oracle.brute_force_dense_cut(cycle_graph(6))[1] == 0.0
    assert oracle.brute_force_dense_cut(RegularGraph(2, 1, np.array([(0, 1)])))[1] == 0.0


def test_budgets():
    with pytest.raises(BudgetError):
        oracle.brute_force_maxcut(generate_random_regular(26, 3, seed=0))
    with pytest.raises(BudgetError):
        oracle.min_conductance(generate_random_regular(22, 3, seed=0))
    with pytest.raises(BudgetError):
        oracle.brute_force_dense_cut(generate_random_regular(16, 3, seed=0))
    tight = OracleBudget(time_cap=1e-9)
    with pytest.raises(BudgetError):
        oracle.brute_force_maxcut(cycle_graph(12), tight)
    with pytest.raises(ParameterError):
        OracleBudget(max_n={"maxcut": 0, "conductance": 1, "sse": 1, "densecut": 1})


def test_memoized_and_pure():
    oracle.clear_cache()
    g = generate_random_regular(16, 3, seed=4)
    a = oracle.maxcut_edges(g)
    same = RegularGraph(g.n, g.d, g.edges.copy())
    assert oracle.maxcut_edges(same) is a
    assert oracle._CACHE
    oracle.clear_cache()
    assert oracle.maxcut_edges(g) == a
