import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import two_cliques_matching
from ssetk import oracle
from ssetk.errors import ParameterError, SpectralError
from ssetk.graph import (
    RegularGraph,
    SseParams,
    VertexSet,
    complete_graph,
    cycle_graph,
    edge_expansion,
    generate_planted_bipartite_sse,
    generate_random_regular,
    generate_two_expanders,
)
from ssetk.spectral import (
    bipartiteness_ratio,
    cheeger_partition,
    dense_cut,
    normalize_for_sweep,
    quantize_vector,
    second_eigenpair,
    smallest_eigenpair,
    sweep_cut,
)


def _dense_eigs(g):
    return np.linalg.eigvalsh(g.adjacency_matrix().astype(float) / g.d)


# -- eigenpairs --------------------------------------------------------------


@pytest.mark.parametrize("n", [4, 7, 12])
def test_complete_graph_lambda2(n):
    lam, x = second_eigenpair(complete_graph(n))
    assert abs(lam + 1 / (n - 1)) <= 1e-6
    assert abs(_dense_eigs(complete_graph(n))[-2] - lam) <= 1e-6


@pytest.mark.parametrize("n", [5, 8, 13, 30])
def test_cycle_lambda2(n):
    lam, _ = second_eigenpair(cycle_graph(n))
    assert abs(lam - math.cos(2 * math.pi / n)) <= 1e-6


def test_two_cliques_eigvector_separates():
    g = two_cliques_matching(6)
    lam, x = second_eigenpair(g)
    assert abs(lam - _dense_eigs(g)[-2]) <= 1e-6
    assert lam > 0.6
    assert np.all(np.sign(x[:6]) == np.sign(x[0])) and np.all(np.sign(x[6:]) == -np.sign(x[0]))


@pytest.mark.parametrize("seed", range(8))
def test_eigen_contract_random(seed):
    n = [10, 16, 24, 32, 40, 48, 56, 64][seed]
    g = generate_random_regular(n, 3 + seed % 3 if (n * (3 + seed % 3)) % 2 == 0 else 4, seed=seed)
    lam, x = second_eigenpair(g, tol=1e-10)
    ev = _dense_eigs(g)
    assert abs(lam - ev[-2]) <= 1e-6
    assert abs(x.mean()) <= 1e-9
    assert math.isclose(np.mean(x * x), 1.0, rel_tol=1e-12)
    u = x / np.linalg.norm(x)
    A = g.adjacency_matrix().astype(float) / g.d
    assert np.linalg.norm(A @ u - lam * u) <= 1e-8
    lo, y = smallest_eigenpair(g, tol=1e-10)
    assert abs(lo - ev[0]) <= 1e-6


def test_disconnected_indicator():
    g = RegularGraph(6, 2, np.array([(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3)]))
    lam, x = second_eigenpair(g)
    assert lam == 1.0
    assert len(set(np.round(x, 12))) == 2 and abs(x.mean()) < 1e-12


# -- quantizer ------------------------------------------------------------------


def _check_quantized(x, q):
    y = q.values
    assert np.array_equal(y == 0, x == 0)
    pos, neg = x > 0, x < 0
    if q.truncated == 0:
        assert np.all((1 - q.eps) * x[pos] <= y[pos]) and np.all(y[pos] <= (1 + q.eps) * x[pos])
        assert np.all((1 + q.eps) * x[neg] <= y[neg]) and np.all(y[neg] <= (1 - q.eps) * x[neg])
    order = np.argsort(x, kind="stable")
    assert np.all(np.diff(y[order]) >= 0)
    assert q.is_quantized()
    mags = np.abs(y[y != 0])
    assert np.all(np.isin(mags, q.grid))
    assert q.level == q.eps / (1 + q.eps) >= q.eps / 2


vectors = st.lists(
    st.one_of(st.just(0.0), st.floats(1e-6, 1e6), st.floats(-1e6, -1e-6)), min_size=1, max_size=60
)


@settings(max_examples=300, deadline=None)
@given(vectors, st.sampled_from([0.01, 0.05, 0.1, 0.3, 1.0]))
def test_quantizer_properties(xs, eps):
    x = np.array(xs)
    q = quantize_vector(x, eps)
    _check_quantized(x, q)
    assert q.truncated == 0


def test_quantizer_constant_and_fixed_point():
    x = np.full(10, 0.37)
    q = quantize_vector(x, 0.1)
    assert len(set(q.values)) == 1
    grid = quantize_vector(np.array([1.0, 0.01]), 0.1).grid
    x = np.array([grid[3], -grid[7], grid[0], 0.0, grid[12]])
    assert np.array_equal(quantize_vector(x, 0.1).values, x)


def test_quantizer_with_graph_cost():
    g, _ = generate_planted_bipartite_sse(400, 8, 0.02, seed=0)
    x = np.random.default_rng(0).standard_normal(400)
    q = quantize_vector(x, 0.1, g)
    _check_quantized(x, q)
    assert q.cost_ratio is not None and q.cost_ratio <= 100
    lam, v = second_eigenpair(g)
    q2 = quantize_vector(v, 0.1, g)
    _check_quantized(v, q2)
    assert q2.cost_ratio <= 100


def test_quantized_pair_inequality():
    for eps in (0.05, 0.1, 0.5):
        lev = eps / (1 + eps)
        grid = (1 + eps) ** -np.arange(60.0)
        a, b = np.meshgrid(grid, grid)
        off = a != b
        lhs = np.abs(a - b) * np.abs(b)
        rhs = np.abs(a - b) ** 2 / lev
        assert np.all(lhs[off] <= rhs[off] * (1 + 1e-12))


def test_quantizer_rejects_eps():
    with pytest.raises(ParameterError):
        quantize_vector([1.0], 0.0)


# -- sweeps --------------------------------------------------------------------------


def test_two_cliques_sweep():
    k = 7
    g = two_cliques_matching(k)
    res = cheeger_partition(g, SseParams(0.2, 0.5))
    assert set(res.set.members) in (set(range(k)), set(range(k, 2 * k)))
    assert math.isclose(res.phi, 1 / k)


def test_indicator_sweep():
    g, side = generate_two_expanders(40, 3, 2, seed=0)
    x = np.where(side.mask(), 1.0, 0.0)
    res = sweep_cut(x, g)
    assert set(res.set.members) in (set(side.members), set(side.complement().members))


def test_sweep_phi_recomputed():
    g = generate_random_regular(50, 4, seed=3)
    res = sweep_cut(np.random.default_rng(1).standard_normal(50), g)
    assert len(res.set) <= 25
    assert res.phi == float(edge_expansion(g, res.set))


def test_sweep_degenerate():
    with pytest.raises(SpectralError):
        sweep_cut(np.ones(6), cycle_graph(6))


def test_median_shift_clamp():
    y = np.array([1, 1, 1, 1, 1, 1, 1, 1, -1e-9, 1.0])
    z = normalize_for_sweep(np.array([0.0, 1, 2, 3]))
    assert math.isclose(np.hypot(z.min(), z.max()), 1.0)
    with pytest.raises(SpectralError):
        normalize_for_sweep(y, max_shift=0.5)


@pytest.mark.parametrize("seed", range(5))
def test_two_expanders_beats_classical_ceiling(seed):
    g, _ = generate_two_expanders(400, 6, 1, seed=seed)
    res = cheeger_partition(g, SseParams(0.5, 0.3))
    assert res.phi <= res.ceilings["classical"]
    assert res.phi <= res.baseline_phi + 1e-12 or res.phi <= math.sqrt(2 * res.delta)


def test_complete_graph_negative_control():
    res = cheeger_partition(complete_graph(10), SseParams(0.5, 0.5))
    assert res.phi >= 0.5


@pytest.mark.parametrize("seed", range(6))
def test_sweep_upper_bounds_oracle(seed):
    g = generate_random_regular(12 + 2 * (seed % 3), 3, seed=seed)
    res = cheeger_partition(g, SseParams(0.2, 0.5))
    _, phi = oracle.min_conductance(g)
    assert res.phi >= phi - 1e-12 and res.baseline_phi >= phi - 1e-12


# -- dense cut -------------------------------------------------------------------------


def test_dense_cut_bipartite():
    g, side = generate_planted_bipartite_sse(60, 4, 0.0, seed=1)
    res = dense_cut(g, SseParams(0.1, 0.5))
    assert res.ratio == 0.0
    assert np.all(np.abs(res.y) == 1)
    pos = set(np.flatnonzero(res.y > 0).tolist())
    assert pos in (set(side.members), set(side.complement().members))
    assert "analogy" in res.rounding


def test_dense_cut_single_edge():
    g = RegularGraph(2, 1, np.array([(0, 1)]))
    assert dense_cut(g, SseParams(0.5, 0.5)).ratio == 0.0


@pytest.mark.parametrize("seed", range(6))
def test_dense_cut_vs_oracle(seed):
    g = generate_random_regular(8 + seed % 3 * 2, 3, seed=seed)
    res = dense_cut(g, SseParams(0.1, 0.5))
    _, best = oracle.brute_force_dense_cut(g)
    assert res.ratio >= best - 1e-12
    assert math.isclose(res.ratio, bipartiteness_ratio(g, res.y))


def test_bipartiteness_ratio_k3():
    g = complete_graph(3)
    assert bipartiteness_ratio(g, [1, -1, 0]) == 0.5
    with pytest.raises(SpectralError):
        bipartiteness_ratio(g, [0, 0, 0])
