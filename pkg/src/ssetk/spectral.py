"""Eigenvectors of the normalized adjacency, grid quantization, sweep rounding and dense cuts."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .errors import ParameterError, SpectralError
from .graph import RegularGraph, SseParams, VertexSet, edge_expansion


def _matvec(g: RegularGraph):
    A = g.sparse_adjacency
    d = float(g.d) if g.d else 1.0
    return lambda x: (A @ x) / d


def _power(g: RegularGraph, shift: float, deflate: bool, tol: float, max_iter: int, seed: int = 0):
    """Power iteration on (I + shift*A/d)/2; returns (rayleigh quotient of A/d, unit vector)."""
    mv = _matvec(g)
    n = g.n
    x = np.random.default_rng(seed).standard_normal(n)
    if deflate:
        x -= x.mean()
    x /= np.linalg.norm(x)
    for it in range(max_iter):
        y = mv(x)
        lam = float(x @ y)
        if np.linalg.norm(y - lam * x) <= tol:
            return lam, x
        nxt = 0.5 * (x + shift * y)
        if deflate:
            nxt -= nxt.mean()
        nrm = np.linalg.norm(nxt)
        if nrm < 1e-300:
            # x sits in the kernel of the iteration matrix: an exact eigenvector
            return lam, x
        x = nxt / nrm
        if deflate and it % 64 == 63:
            x -= x.mean()
            x /= np.linalg.norm(x)
    raise SpectralError(f"power iteration did not reach residual {tol} within {max_iter} iterations")


def second_eigenpair(g: RegularGraph, tol: float = 1e-8, max_iter: int = 200_000):
    """Second largest eigenvalue of A/d and its eigenvector, scaled to mean square 1.

    A disconnected graph yields lambda2 = 1 and a centred component indicator.
    """
    n = g.n
    if n < 2:
        raise SpectralError("need at least two vertices")
    from scipy.sparse.csgraph import connected_components

    ncomp, labels = connected_components(g.sparse_adjacency, directed=False)
    if ncomp > 1:
        x = (labels == labels[0]).astype(float)
        x -= x.mean()
        x *= math.sqrt(n) / np.linalg.norm(x)
        return 1.0, x
    lam, x = _power(g, 1.0, True, tol, max_iter)
    x = x - x.mean()
    x *= math.sqrt(n) / np.linalg.norm(x)
    return lam, x


def smallest_eigenpair(g: RegularGraph, tol: float = 1e-8, max_iter: int = 200_000):
    """Smallest eigenvalue of A/d and its eigenvector (mean square 1)."""
    if g.n < 1:
        raise SpectralError("empty graph")
    lam, x = _power(g, -1.0, False, tol, max_iter)
    return lam, x * math.sqrt(g.n)


# --------------------------------------------------------------------------
# Quantization


@dataclass(frozen=True)
class QuantizedVector:
    values: np.ndarray
    eps: float
    level: float  # eps' = eps/(1+eps), the separation the output is guaranteed to have
    M: float
    index: np.ndarray  # grid index j per vertex, -1 for zeros
    sign: np.ndarray
    grid: np.ndarray
    cost_ratio: Optional[float] = None
    truncated: int = 0

    def is_quantized(self, rtol: float = 1e-12) -> bool:
        """Pairwise separation check; consecutive distinct magnitudes suffice."""
        mags = np.unique(np.abs(self.values[self.values != 0]))
        if mags.size < 2:
            return True
        ratios = mags[:-1] / mags[1:]
        return bool(np.all(ratios <= (1 - self.level) * (1 + rtol)))


def _edge_cost(y: np.ndarray, edges: np.ndarray) -> float:
    diff = y[edges[:, 0]] - y[edges[:, 1]]
    return float(diff @ diff)


def quantize_vector(x, eps: float, g: Optional[RegularGraph] = None, cap_factor: int = 64) -> QuantizedVector:
    """Round x onto the geometric grid M(1+eps)^-j, preserving zeros, signs and order.

    Each interval [M(1+eps)^-(j+1), M(1+eps)^-j) of magnitudes (split by sign)
    gets a cutoff p; entries above p go to the top endpoint and the rest to
    the bottom.  Sparse intervals cut at the midpoint; dense ones try r+2
    equally spaced cutoffs in the middle third and keep the cheapest under
    the edge cost of ``g`` (the middle one if no graph is given).
    """
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    absx = np.abs(x)
    nz = absx > 0
    if not np.any(nz):
        return QuantizedVector(x.copy(), eps, eps / (1 + eps), 0.0, np.full(n, -1), np.zeros(n, dtype=np.int8), np.zeros(0))
    M = float(math.ceil(absx.max()))
    base = 1.0 + eps
    mn = float(absx[nz].min())
    J = math.ceil(math.log(M * n * n / mn) / math.log(base))
    J = int(min(max(J, 1), cap_factor * math.ceil(1 / eps)))
    grid = np.empty(J + 1)
    grid[0] = M
    for j in range(1, J + 1):
        grid[j] = grid[j - 1] / base

    sign = np.sign(x).astype(np.int8)
    idx = np.full(n, -1, dtype=np.int64)
    # grid is decreasing; interval j holds grid[j+1] <= |x| < grid[j], with |x| = M put in j = 0
    pos = np.searchsorted(-grid, -absx[nz], side="left") - 1  # largest j with grid[j] > |x|
    pos = np.clip(pos, 0, J)
    idx[nz] = pos
    truncated = int(np.count_nonzero(idx == J))  # below the grid floor

    y = np.zeros(n)
    edges = g.edges if g is not None else None
    light_cap = eps * n
    for s in (1, -1):
        for j in np.unique(idx[(sign == s) & nz]):
            members = np.flatnonzero((idx == j) & (sign == s))
            if j == J:
                y[members] = s * grid[J]
                continue
            hi, lo = grid[j], grid[j + 1]
            mag = absx[members]
            count = members.size
            if count < light_cap:
                p = 0.5 * (lo + hi)
            else:
                r = int(count // light_cap)
                L = hi - lo
                cands = lo + L * (r + 1 + np.arange(1, r + 3)) / (3 * r + 5)
                p = _best_cutoff(cands, members, mag, s, lo, hi, x, edges, n)
            y[members] = s * np.where(mag > p, hi, lo)

    cost_ratio = None
    if g is not None:
        cx, cy = _edge_cost(x, g.edges), _edge_cost(y, g.edges)
        cost_ratio = cy / cx if cx > 0 else (0.0 if cy == 0 else math.inf)
    return QuantizedVector(y, eps, eps / (1 + eps), M, idx, sign, grid, cost_ratio, truncated)


def _best_cutoff(cands, members, mag, s, lo, hi, x, edges, n):
    if edges is None:
        return float(cands[len(cands) // 2])
    inside = np.zeros(n, dtype=bool)
    inside[members] = True
    sub = edges[inside[edges[:, 0]] | inside[edges[:, 1]]]
    best_p, best_c = None, math.inf
    base = x.copy()
    for p in cands:
        base[members] = s * np.where(mag > p, hi, lo)
        c = _edge_cost(base, sub)
        if c < best_c:
            best_p, best_c = float(p), c
    return best_p


# --------------------------------------------------------------------------
# Sweep rounding


@dataclass(frozen=True)
class SweepResult:
    set: VertexSet
    phi: float
    threshold: float
    baseline_phi: Optional[float] = None
    lambda2: Optional[float] = None
    delta: Optional[float] = None
    ceilings: dict = field(default_factory=dict)
    cost_ratio: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "lambda2": self.lambda2,
            "delta": self.delta,
            "phi": self.phi,
            "threshold": self.threshold,
            "baseline_phi": self.baseline_phi,
            "ceilings": dict(self.ceilings),
            "set_size": len(self.set),
            "set": list(self.set.members),
            "quantization_cost_ratio": self.cost_ratio,
        }


def normalize_for_sweep(y, max_shift: float = 3.0) -> np.ndarray:
    """Scale so min^2 + max^2 = 1, shift the lower median to 0, rescale again."""
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    s = math.hypot(y.min(), y.max())
    if s == 0 or y.min() == y.max():
        raise SpectralError("cannot sweep a constant vector")
    z = y / s
    c = float(np.sort(z)[(n - 1) // 2])
    if abs(c) > max_shift:
        raise SpectralError(f"median shift {c} exceeds {max_shift}")
    z = z - c
    return z / math.hypot(z.min(), z.max())


def sweep_cut(y, g: RegularGraph, normalize: bool = True) -> SweepResult:
    """Best threshold set {v: y(v) <= t} over midpoints between consecutive distinct values.

    The score is cut / (d * min(|S|, n - |S|)); the smaller side is returned.
    """
    vals = y.values if isinstance(y, QuantizedVector) else np.asarray(y, dtype=float)
    if vals.shape[0] != g.n:
        raise ParameterError("vector length does not match the graph")
    z = normalize_for_sweep(vals) if normalize else vals
    order = np.argsort(z, kind="stable").astype(np.int64)
    zs = z[order]
    indptr, indices = g.csr
    cuts = _kernels.prefix_cuts(order, indptr, indices)
    ks = np.flatnonzero(zs[1:] > zs[:-1]) + 1  # prefix sizes at distinct-value boundaries
    if ks.size == 0:
        raise SpectralError("cannot sweep a constant vector")
    small = np.minimum(ks, g.n - ks)
    phis = cuts[ks] / (g.d * small)
    i = int(np.argmin(phis))
    k = int(ks[i])
    t = 0.5 * (zs[k - 1] + zs[k])
    prefix = order[:k]
    if k > g.n - k:
        chosen = VertexSet(tuple(order[k:].tolist()), g.n)
    else:
        chosen = VertexSet(tuple(prefix.tolist()), g.n)
    return SweepResult(chosen, float(edge_expansion(g, chosen)), float(t))


def cheeger_partition(g: RegularGraph, params: SseParams, C: float = 1.0, tol: float = 1e-8) -> SweepResult:
    """Eigenvector, median shift, quantization, then sweep; reports the raw sweep as baseline."""
    lam2, x = second_eigenpair(g, tol=tol)
    delta = max(0.0, 1.0 - lam2)
    z = normalize_for_sweep(x)
    q = quantize_vector(z, params.eps, g)
    res = sweep_cut(q, g, normalize=False)
    base = sweep_cut(x, g)
    ceilings = {
        "classical": math.sqrt(2 * delta),
        "sse": C * delta / (params.gamma ** 3 * params.eps ** 3),
    }
    return SweepResult(res.set, res.phi, res.threshold, base.phi, lam2, delta, ceilings, q.cost_ratio)


# --------------------------------------------------------------------------
# Dense cut


def bipartiteness_ratio(g: RegularGraph, y) -> float:
    y = np.asarray(y, dtype=np.int64)
    den = g.d * int(np.abs(y).sum())
    if den == 0:
        raise SpectralError("all-zero assignment")
    e = g.edges
    return float(np.abs(y[e[:, 0]] + y[e[:, 1]]).sum()) / den


@dataclass(frozen=True)
class DenseCutResult:
    y: np.ndarray
    ratio: float
    lambda_n: float
    threshold: float
    rounding: str = "two-sided magnitude sweep (by analogy with the one-sided sweep)"

    def to_dict(self) -> dict:
        return {
            "ratio": self.ratio,
            "lambda_n": self.lambda_n,
            "threshold": self.threshold,
            "support": int(np.count_nonzero(self.y)),
            "y": self.y.astype(int).tolist(),
            "rounding": self.rounding,
        }


def dense_cut(g: RegularGraph, params: SseParams, tol: float = 1e-8) -> DenseCutResult:
    """Sign pattern {-1,0,1}^n with small bipartiteness ratio, from the bottom eigenvector."""
    lam, x = smallest_eigenpair(g, tol=tol)
    q = quantize_vector(x / np.abs(x).max(), params.eps, g)
    mags = np.abs(q.values)
    signs = np.sign(q.values).astype(np.int8)
    order = np.argsort(-mags, kind="stable").astype(np.int64)
    ms = mags[order]
    indptr, indices = g.csr
    num = _kernels.two_sided_prefix(order, signs, indptr, indices)
    nzc = int(np.count_nonzero(ms > 0))
    ks = np.flatnonzero(ms[1:nzc] < ms[: nzc - 1]) + 1 if nzc > 1 else np.zeros(0, dtype=np.int64)
    ks = np.concatenate([ks, [nzc]]) if nzc else ks
    if ks.size == 0:
        raise SpectralError("every threshold gives the all-zero assignment")
    ratios = num[ks] / (g.d * ks)
    i = int(np.argmin(ratios))
    k = int(ks[i])
    yhat = np.zeros(g.n, dtype=np.int8)
    yhat[order[:k]] = signs[order[:k]]
    return DenseCutResult(yhat, bipartiteness_ratio(g, yhat), lam, float(ms[k - 1]))
