import math

import numpy as np
import pytest

from ssetk.dist import (
    Distribution,
    PseudoDistribution,
    SharedStream,
    correlated_sample,
    correlated_trials,
    format_distributions,
    hellinger,
    hellinger2,
    kl_divergence,
    kl_nats,
    mismatch_ceiling,
    parse_distributions,
    protocol_report,
    quantize_collection,
    search_hellinger_sd,
    search_kl_hellinger,
    search_transfer,
    statistical_distance,
)
from ssetk.errors import DistributionError, InputError, SamplingError
from ssetk.graph import cycle_graph, generate_random_regular

P = [0.5, 0.5]
Q = [0.25, 0.75]


def test_divergence_values():
    assert kl_divergence(P, P) == 0.0
    assert math.isclose(kl_divergence(P, Q), 0.5 * math.log2(2) + 0.5 * math.log2(2 / 3))
    assert math.isclose(kl_divergence(P, Q), 0.2075, abs_tol=5e-5)
    assert math.isclose(kl_nats(P, Q), kl_divergence(P, Q) * math.log(2))
    assert kl_divergence(P, [1.0, 0.0]) == math.inf
    assert kl_divergence([1.0, 0.0], P) == 1.0
    assert math.isclose(hellinger(P, Q), math.sqrt(1 - (math.sqrt(1 / 8) + math.sqrt(3 / 8))))
    assert math.isclose(hellinger(P, Q), 0.1846, abs_tol=5e-5)
    assert math.isclose(hellinger2(P, Q), hellinger(P, Q) ** 2)
    assert statistical_distance(P, Q) == 0.25
    disj = ([1.0, 0.0], [0.0, 1.0])
    assert hellinger(*disj) == 1.0 and statistical_distance(*disj) == 1.0
    assert hellinger(Q, P) == hellinger(P, Q) and hellinger(P, P) == 0.0


def test_distribution_types():
    with pytest.raises(DistributionError):
        PseudoDistribution(np.array([-0.1, 1.0]))
    with pytest.raises(DistributionError):
        PseudoDistribution(np.array([np.inf, 1.0]))
    with pytest.raises(DistributionError):
        Distribution(np.array([0.3, 0.3]))
    pd = PseudoDistribution(np.array([0.2, 0.6]))
    assert math.isclose(pd.mass, 0.8)
    assert np.allclose(pd.normalized().weights, [0.25, 0.75])


def test_triangle_inequality_sd():
    rng = np.random.default_rng(0)
    for _ in range(200):
        x, y, z = rng.dirichlet(np.ones(5), size=3)
        assert statistical_distance(x, z) <= statistical_distance(x, y) + statistical_distance(y, z) + 1e-15


# -- collection quantization ---------------------------------------------------


def test_identical_collection():
    g = cycle_graph(10)
    D = np.tile([0.1, 0.3, 0.6], (10, 1))
    qc = quantize_collection(g, D, 0.3)
    assert np.all(qc.weights == qc.weights[0])
    assert qc.cost_ratio == 0.0


def test_squared_grid_fixed_point():
    g = cycle_graph(6)
    eps = 0.3
    r = (1 + eps / 3) ** -np.arange(6.0)
    col = r[[0, 1, 2, 3, 4, 5]] ** 2
    D = np.stack([col, col[::-1]], axis=1)
    qc = quantize_collection(g, D, eps)
    assert np.allclose(qc.weights, D, rtol=1e-14)


def test_smooth_collection_on_expander():
    g = generate_random_regular(300, 6, seed=2)
    rng = np.random.default_rng(3)
    base = rng.dirichlet(np.ones(5))
    D = base * np.exp(rng.normal(0, 0.2, (300, 5)))
    D /= D.sum(axis=1, keepdims=True)
    for eps in (0.1, 0.5, 1.0):
        qc = quantize_collection(g, D, eps)
        assert qc.envelope_ok() and qc.separation_ok()
        assert qc.cost_ratio <= 100
        assert np.all((1 - eps) * D <= qc.weights) and np.all(qc.weights <= (1 + eps) * D)


def test_collection_errors():
    g = cycle_graph(4)
    with pytest.raises(DistributionError):
        quantize_collection(g, np.full((3, 2), 0.5), 0.2)
    with pytest.raises(DistributionError):
        quantize_collection(g, [Distribution([0.5, 0.5])] * 3 + [Distribution([1.0, 0, 0])], 0.2)


def test_quantized_pairs_sd_vs_hellinger():
    checked, bad = search_hellinger_sd(generate_random_regular(40, 4, seed=0), 3000, seed=1, eps=0.2)
    assert checked == 3000 and bad == 0


# -- correlated sampling ---------------------------------------------------------


def test_identical_always_agree():
    p = np.array([0.2, 0.5, 0.3])
    a, b = correlated_trials(p, p, 0.1, 5000, seed=0)
    assert np.array_equal(a, b)
    s = SharedStream(0, 3, 0.1)
    for _ in range(50):
        x, y = correlated_sample(p, p, 0.1, s)
        assert x == y


def test_disjoint_always_mismatch():
    a, b = correlated_trials([1.0, 0.0], [0.0, 1.0], 0.0, 2000, seed=0)
    assert np.all(a == 0) and np.all(b == 1)
    assert mismatch_ceiling([1.0, 0.0], [0.0, 1.0]) == 1.0


def test_marginals_within_4_sigma():
    p = np.array([0.05, 0.15, 0.3, 0.5]) * 0.95
    q = np.array([0.1, 0.1, 0.4, 0.4])
    N = 100_000
    a, b = correlated_trials(p, q, 0.1, N, seed=11)
    for out, w in ((a, p), (b, q)):
        w = w / w.sum()
        freq = np.bincount(out, minlength=4) / N
        sigma = np.sqrt(w * (1 - w) / N)
        assert np.all(np.abs(freq - w) <= 4 * sigma)


def test_sd_001_family():
    eta = 0.01
    p = np.array([0.4, 0.3, 0.2, 0.1])
    q = p + np.array([eta, -eta, 0, 0])
    N = 100_000
    rep = protocol_report(p, q, 0.05, N, seed=5)
    assert math.isclose(rep["sd"], eta)
    sigma = math.sqrt(4 * eta * (1 - 4 * eta) / N)
    assert rep["mismatch_rate"] <= 4 * eta + 3 * sigma
    assert rep["mismatch_rate"] <= rep["mismatch_ceiling"] + 4 * math.sqrt(rep["mismatch_ceiling"] / N)


def test_scalar_and_vector_protocols_agree_in_law():
    p = np.array([0.6, 0.4])
    q = np.array([0.5, 0.5])
    s = SharedStream(3, 2, 0.0)
    pairs = [correlated_sample(p, q, 0.0, s) for _ in range(4000)]
    rate = np.mean([x != y for x, y in pairs])
    a, b = correlated_trials(p, q, 0.0, 4000, seed=3)
    assert abs(rate - np.mean(a != b)) < 0.03
    assert rate <= mismatch_ceiling(p, q) + 0.02


def test_envelope_and_exhaustion():
    with pytest.raises(DistributionError):
        correlated_trials([1.5, 0.0], [0.5, 0.5], 0.1, 10, seed=0)
    with pytest.raises(DistributionError):
        correlated_trials([0.2, 0.2], [0.5, 0.5], 0.1, 10, seed=0)
    with pytest.raises(SamplingError):
        correlated_trials([1e-6, 0.0], [1e-6, 0.0], 1.0, 1, seed=0, cap=1000)
    s = SharedStream(0, 2, 0.0, cap=100)
    s.take(64)
    with pytest.raises(SamplingError):
        s.take(64)


def test_protocol_deterministic():
    p, q = np.array([0.3, 0.7]), np.array([0.35, 0.65])
    assert protocol_report(p, q, 0.1, 1000, 4) == protocol_report(p, q, 0.1, 1000, 4)


# -- inequality searches (small budgets; the acceptance suite runs the full ones) --


def test_kl_hellinger_search():
    assert search_kl_hellinger(5000, seed=3) == 0


def test_transfer_search():
    res = search_transfer(300, seed=3)
    assert res == {"event": 0, "unit": 0, "double": 0}


# -- text format -------------------------------------------------------------------------


def test_parse_round_trip():
    text = "2\na 1\nb 3\n# comment\n2\na 0.5\nb 0.5\n"
    ds = parse_distributions(text)
    assert len(ds) == 2 and ds[0].outcomes == ("a", "b")
    assert np.allclose(ds[0].weights, [0.25, 0.75])
    again = parse_distributions(format_distributions(ds))
    assert all(np.array_equal(x.weights, y.weights) for x, y in zip(ds, again))


@pytest.mark.parametrize("text", ["", "3\na 1\nb 2\n", "2\na x\nb 1\n"])
def test_parse_malformed(text):
    with pytest.raises(InputError):
        parse_distributions(text)


def test_parse_mismatched_outcomes():
    with pytest.raises(DistributionError):
        parse_distributions("2\na 1\nb 1\n2\na 1\nc 1\n")
