import math
from dataclasses import replace

import numpy as np
import pytest

from ssetk import oracle
from ssetk.errors import ConditioningError
from ssetk.graph import SseParams, VertexSet, cut_value, cycle_graph, generate_planted_bipartite_sse, generate_random_regular
from ssetk.hyperplane import (
    Hyperplane,
    PipelineConfig,
    extract_cut,
    gw_baseline,
    measure_acceptance,
    run_maxcut_pipeline,
    sample_conditioned_hyperplane,
    skeleton_hit,
)
from ssetk.projection import project_to_r3
from ssetk.sdp import SdpConfig, VectorSolution, solve_maxcut_sdp
from ssetk.sphere import compute_profile, triangulation_at_level


def _n(x):
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def test_empty_skeleton_accepts_first():
    tri = triangulation_at_level(2)
    Z = _n(np.random.default_rng(0).standard_normal((1000, 3)))
    prof = compute_profile(VectorSolution(Z), tri, 1.0)  # eps*n/2 = 500: nothing heavy
    assert prof.skeleton.size == 0
    h = sample_conditioned_hyperplane(prof, tri, seed=3)
    assert h.attempts == 1 and abs(np.linalg.norm(h.normal) - 1) < 1e-12


def test_full_skeleton_raises():
    tri = triangulation_at_level(3)
    Z = _n(np.random.default_rng(0).standard_normal((5, 3)))
    prof = compute_profile(VectorSolution(Z), tri, 0.1)
    everything = np.arange(tri.t)
    full = replace(prof, light=np.zeros(tri.t, dtype=bool), heavy=everything, heavy_prime=everything[:0],
                   skeleton=np.arange(len(tri.arcs)), outline=everything[:0])
    assert skeleton_hit(full, tri, _n(np.array([0.3, -0.2, 0.9])))
    with pytest.raises(ConditioningError) as ei:
        sample_conditioned_hyperplane(full, tri, seed=0, max_attempts=16)
    assert ei.value.rejection_rate == 1.0


def test_conditioned_plane_misses_skeleton():
    tri = triangulation_at_level(5)
    rng = np.random.default_rng(4)
    Z = _n(np.repeat(rng.standard_normal((4, 3)), 250, axis=0) + 0.01 * rng.standard_normal((1000, 3)))
    prof = compute_profile(VectorSolution(Z), tri, 0.1)
    for i in range(10):
        h = sample_conditioned_hyperplane(prof, tri, seed=1, index=i)
        assert not skeleton_hit(prof, tri, h.normal)
    acc = measure_acceptance(prof, tri, seed=0, trials=1000)
    assert 0.0 < acc <= 1.0


def test_extract_cut_examples():
    X = np.zeros((6, 3))
    X[:3, 0], X[3:, 0] = 1, -1
    sol = VectorSolution(X)
    e = np.array([1.0, 0, 0])
    assert extract_cut(sol, Hyperplane(e, 0, 1)).members == (0, 1, 2)
    Z = _n(np.random.default_rng(1).standard_normal((50, 3)))
    x = _n(np.random.default_rng(2).standard_normal(3))
    s, t = extract_cut(VectorSolution(Z), x), extract_cut(VectorSolution(Z), -x)
    assert s.complement().members == t.members
    g = generate_random_regular(50, 3, seed=0)
    assert cut_value(g, s) == cut_value(g, s.complement())


def test_cut_value_examples():
    g = cycle_graph(4)
    assert cut_value(g, VertexSet((0, 2), 4)) == 1.0
    assert cut_value(g, VertexSet((), 4)) == 0.0
    assert math.isclose(oracle.brute_force_maxcut(cycle_graph(5))[1], 0.8)


def _cfg(seed=0, **kw):
    return PipelineConfig(sdp=SdpConfig(seed=seed), seed=seed, **kw)


def test_pipeline_c4():
    rep = run_maxcut_pipeline(cycle_graph(4), SseParams(0.1, 0.5), _cfg())
    assert rep.value == 1.0
    d = rep.to_dict()
    for k in ("value", "baseline_value", "delta_trace", "acceptance_rate", "seed"):
        assert k in d
    assert len(d["delta_trace"]) == 4


@pytest.mark.parametrize("seed", range(8))
def test_pipeline_dominated_by_oracle(seed):
    g = generate_random_regular(12, 3, seed=seed)
    rep = run_maxcut_pipeline(g, SseParams(0.1, 0.5), _cfg(seed))
    assert rep.value <= oracle.brute_force_maxcut(g)[1]


def test_pipeline_deterministic():
    g = generate_random_regular(14, 3, seed=1)
    a = run_maxcut_pipeline(g, SseParams(0.1, 0.5), _cfg(3)).to_dict()
    b = run_maxcut_pipeline(g, SseParams(0.1, 0.5), _cfg(3)).to_dict()
    assert a == b


def test_pipeline_fallback_warns(monkeypatch):
    import ssetk.hyperplane as hp

    def boom(*a, **k):
        raise ConditioningError("forced", rejection_rate=1.0)

    monkeypatch.setattr(hp, "sample_conditioned_hyperplane", boom)
    with pytest.warns(RuntimeWarning):
        rep = hp.run_maxcut_pipeline(cycle_graph(6), SseParams(0.1, 0.5), _cfg())
    assert not rep.conditioned and rep.value == 1.0


def test_planted_pipeline_vs_3d_gw():
    """Conditioned rounding of the preprocessed solution vs plain planes on the raw 3-D projection."""
    wins = []
    for seed in range(50):
        g, _ = generate_planted_bipartite_sse(200, 6, 0.02, seed)
        sol = solve_maxcut_sdp(g, SdpConfig(seed=seed))
        z, _ = project_to_r3(sol, g, seed=seed)
        _, _, mean3 = gw_baseline(g, z, seed, trials=32)
        rep = run_maxcut_pipeline(g, SseParams(0.1, 0.5), _cfg(seed, trials=32))
        wins.append(rep.mean_conditioned_value - mean3)
    assert np.mean(wins) >= -1e-12


def test_deficit_accounting():
    g, _ = generate_planted_bipartite_sse(400, 8, 0.02, seed=2)
    rep = run_maxcut_pipeline(g, SseParams(0.1, 0.5), _cfg(2))
    d4 = rep.delta_trace[3]
    assert rep.deficit_constant is not None
    assert math.isclose(1 - rep.mean_conditioned_value, rep.deficit_constant * d4 / 0.1)
    assert 1 - rep.value <= 100 * 0.02
