import numpy as np
import pytest

from ssetk.errors import ParameterError, ProjectionError
from ssetk.graph import generate_planted_bipartite_sse, generate_random_regular
from ssetk.projection import apply_projection, project_to_r3
from ssetk.sdp import SdpConfig, VectorSolution, sdp_objective, solve_maxcut_sdp


def _unit(rng, shape):
    x = rng.standard_normal(shape)
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def test_identical_and_antipodal_images():
    rng = np.random.default_rng(0)
    x = _unit(rng, 8)
    X = np.stack([x, x, -x, _unit(rng, 8)])
    G = rng.standard_normal((8, 3))
    Z = apply_projection(VectorSolution(X), G)
    assert np.array_equal(Z[0], Z[1])
    assert np.array_equal(Z[2], -Z[0])


def test_output_contract():
    g = generate_random_regular(30, 3, seed=0)
    sol = solve_maxcut_sdp(g, SdpConfig(seed=0))
    z, proj = project_to_r3(sol, g, seed=4, retries=5)
    assert z.dim == 3 and z.max_norm_error() <= 1e-9
    assert proj.directions.shape == (sol.dim, 3)
    assert len(proj.objectives) == 5
    assert sdp_objective(z, g) == min(proj.objectives)
    z2, _ = project_to_r3(sol, g, seed=4, retries=5)
    assert np.array_equal(z.vectors, z2.vectors)


def test_zero_image_resampled():
    X = np.zeros((3, 4))
    X[:, 0] = 1
    sol = VectorSolution(X)
    g = generate_random_regular(4, 3, seed=0)
    with pytest.raises(ParameterError):
        project_to_r3(sol, g, retries=0)
    assert apply_projection(sol, np.zeros((4, 3))) is None
    sol0 = VectorSolution(np.zeros((4, 2)))
    with pytest.raises(ProjectionError):
        project_to_r3(sol0, g, retries=3)


def test_planted_best_of_20_ratio():
    ok = 0
    g, _ = generate_planted_bipartite_sse(300, 8, 0.02, seed=1)
    sol = solve_maxcut_sdp(g, SdpConfig(rank=12, seed=1))
    # spread the solution: mix in noise so the projection has real work to do
    X = sol.vectors + 0.3 * np.random.default_rng(0).standard_normal(sol.vectors.shape)
    sol = VectorSolution(X / np.linalg.norm(X, axis=1, keepdims=True))
    d1 = sdp_objective(sol, g)
    for seed in range(100):
        z, _ = project_to_r3(sol, g, seed=seed, retries=20)
        ok += sdp_objective(z, g) <= 10 * d1
    assert ok >= 95


def test_per_edge_expectation_constant():
    """E |z_u - z_v|^2 <= C |x_u - x_v|^2 with C <= 10, over 10^4 random unit pairs.

    The expectation depends only on |x_u - x_v|, so draws are pooled over pairs
    in the same distance bucket; per-pair sample means are too heavy-tailed.
    """
    rng = np.random.default_rng(3)
    dim, pairs, draws = 16, 10_000, 64
    xu = _unit(rng, (pairs, dim))
    logd = rng.uniform(-4, 0, pairs)  # log10 |x_u - x_v|^2
    t = np.sqrt(10 ** logd)
    w = _unit(rng, (pairs, dim))
    w -= np.sum(w * xu, axis=1, keepdims=True) * xu
    w /= np.linalg.norm(w, axis=1, keepdims=True)
    ang = 2 * np.arcsin(t / 2)
    xv = np.cos(ang)[:, None] * xu + np.sin(ang)[:, None] * w
    base = np.sum((xu - xv) ** 2, axis=1)
    acc = np.zeros(pairs)
    for _ in range(draws):
        G = rng.standard_normal((dim, 3))
        zu, zv = xu @ G, xv @ G
        zu /= np.linalg.norm(zu, axis=1, keepdims=True)
        zv /= np.linalg.norm(zv, axis=1, keepdims=True)
        acc += np.sum((zu - zv) ** 2, axis=1)
    bucket = np.minimum(((logd + 4) * 2).astype(int), 7)
    C = max(acc[bucket == b].sum() / (draws * base[bucket == b].sum()) for b in range(8))
    assert C <= 10
