"""Regular graphs, expansion functionals, SSE certification and instance generators."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from . import _kernels
from .errors import BudgetError, GenerationError, GraphError, InputError, ParameterError
from .rng import derive_rng


@dataclass(frozen=True, eq=False)
class RegularGraph:
    """Undirected d-regular multigraph on vertices ``0..n-1`` (no self-loops).

    ``edges`` is an ``(m, 2)`` integer array; a repeated row is a multi-edge.
    """

    n: int
    d: int
    edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        edges = np.ascontiguousarray(edges)
        edges.setflags(write=False)
        object.__setattr__(self, "edges", edges)
        n, d = int(self.n), int(self.d)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "d", d)
        if n < 0 or d < 0:
            raise GraphError("n and d must be nonnegative")
        if edges.shape[0] * 2 != n * d:
            raise GraphError(f"edge count {edges.shape[0]} != n*d/2 = {n * d / 2}")
        if edges.size:
            if edges.min() < 0 or edges.max() >= n:
                raise GraphError("vertex id out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise GraphError("self-loops are not allowed")
        deg = np.bincount(edges.ravel(), minlength=n)
        if n and np.any(deg != d):
            bad = int(np.flatnonzero(deg != d)[0])
            raise GraphError(f"vertex {bad} has degree {deg[bad]}, expected {d}")

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """``(indptr, indices)`` with one entry per edge endpoint (multiplicity kept)."""
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=self.n), out=indptr[1:])
        return indptr, np.ascontiguousarray(dst[order])

    @cached_property
    def sparse_adjacency(self):
        from scipy.sparse import csr_matrix

        indptr, indices = self.csr
        data = np.ones(indices.shape[0])
        return csr_matrix((data, indices, indptr), shape=(self.n, self.n))

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric edge-multiplicity matrix (int32)."""
        W = np.zeros((self.n, self.n), dtype=np.int32)
        np.add.at(W, (self.edges[:, 0], self.edges[:, 1]), 1)
        np.add.at(W, (self.edges[:, 1], self.edges[:, 0]), 1)
        return W

    @cached_property
    def key(self) -> str:
        """Content hash of (n, d, sorted edge list); used for memoisation."""
        e = np.sort(self.edges, axis=1)
        e = e[np.lexsort((e[:, 1], e[:, 0]))]
        h = hashlib.sha256(f"{self.n} {self.d}\n".encode())
        h.update(np.ascontiguousarray(e).tobytes())
        return h.hexdigest()

    def __repr__(self):
        return f"RegularGraph(n={self.n}, d={self.d}, m={self.m})"


@dataclass(frozen=True)
class VertexSet:
    members: tuple
    n: int

    def __post_init__(self):
        mem = tuple(sorted({int(v) for v in self.members}))
        if mem and (mem[0] < 0 or mem[-1] >= self.n):
            raise ParameterError("vertex set member out of range")
        object.__setattr__(self, "members", mem)

    @classmethod
    def from_mask(cls, mask, n: int) -> "VertexSet":
        if isinstance(mask, (int, np.integer)):
            return cls(tuple(v for v in range(n) if (int(mask) >> v) & 1), n)
        return cls(tuple(np.flatnonzero(np.asarray(mask, dtype=bool)).tolist()), n)

    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[list(self.members)] = True
        return out

    def complement(self) -> "VertexSet":
        return VertexSet.from_mask(~self.mask(), self.n)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, v):
        return int(v) in set(self.members)


@dataclass(frozen=True)
class SseParams:
    eps: float
    gamma: float

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ParameterError(f"eps must lie in (0, 1], got {self.eps}")
        if not 0 < self.gamma <= 1:
            raise ParameterError(f"gamma must lie in (0, 1], got {self.gamma}")

    def max_set_size(self, n: int) -> int:
        # admissible sizes are 1..floor(eps*n); the tiny slack absorbs eps*n like 0.3*10
        return int(math.floor(self.eps * n + 1e-9))


@dataclass(frozen=True)
class SseReport:
    mode: str
    certified: bool
    worst_set: Optional[VertexSet]
    worst_phi: float
    lambda2: float

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "certified": self.certified,
            "worst_set": None if self.worst_set is None else list(self.worst_set.members),
            "worst_phi": None if math.isinf(self.worst_phi) else self.worst_phi,
            "lambda2": self.lambda2,
        }


def _as_mask(g: RegularGraph, s) -> np.ndarray:
    if isinstance(s, VertexSet):
        return s.mask()
    arr = np.asarray(s)
    if arr.dtype == bool and arr.shape == (g.n,):
        return arr
    out = np.zeros(g.n, dtype=bool)
    out[arr.astype(np.int64)] = True
    return out


def boundary_size(g: RegularGraph, s) -> int:
    mask = _as_mask(g, s)
    e = g.edges
    return int(np.count_nonzero(mask[e[:, 0]] != mask[e[:, 1]]))


def edge_expansion(g: RegularGraph, s, exact: bool = False):
    """Fraction of the d*|S| edge endpoints in S whose edge leaves S."""
    mask = _as_mask(g, s)
    size = int(mask.sum())
    if size == 0:
        raise ParameterError("edge expansion of the empty set is undefined")
    b = boundary_size(g, mask)
    if exact:
        return Fraction(b, g.d * size)
    return b / (g.d * size)


def cut_value(g: RegularGraph, s) -> float:
    """Fraction of edges with exactly one endpoint in S."""
    if g.m == 0:
        return 0.0
    return boundary_size(g, s) / g.m


# --------------------------------------------------------------------------
# SSE certification


def certify_sse(
    g: RegularGraph,
    p: SseParams,
    mode: str = "exact",
    *,
    max_n: int = 22,
    max_subsets: int = 5_000_000,
    seed: int = 0,
    starts: int = 32,
) -> SseReport:
    """Check whether every set of size at most eps*n has expansion at least gamma.

    ``mode="exact"`` enumerates all admissible sets, ``mode="heuristic"``
    searches eigenvector sweeps and greedily grown local sets.  A heuristic
    ``certified=False`` always carries a genuine counterexample.
    """
    from .spectral import second_eigenpair

    k = p.max_set_size(g.n)
    try:
        lam2 = float(second_eigenpair(g)[0]) if g.n > 1 else 1.0
    except Exception:  # informational only
        lam2 = float("nan")
    if k < 1:
        return SseReport(mode, True, None, math.inf, lam2)

    if mode == "exact":
        count = sum(math.comb(g.n, j) for j in range(1, k + 1))
        if g.n > max_n or count > max_subsets:
            raise BudgetError(f"exact SSE check needs {count} subsets on n={g.n}; budget is n<={max_n}, {max_subsets} subsets")
        b, size, mask = _kernels.small_set_search(g.adjacency_matrix(), g.d, k)
        worst = VertexSet.from_mask(mask, g.n)
        phi = b / (g.d * size)
    elif mode == "heuristic":
        worst, phi = _heuristic_small_set(g, k, seed=seed, starts=starts)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    certified = phi >= p.gamma
    return SseReport(mode, certified, worst, phi, lam2)


def _heuristic_small_set(g: RegularGraph, k: int, seed: int, starts: int):
    from .spectral import second_eigenpair

    indptr, indices = g.csr
    best = [math.inf, None]

    def consider(order: np.ndarray):
        if len(order) < g.n:  # kernels expect a full permutation
            rest = np.setdiff1d(np.arange(g.n), order, assume_unique=True)
            full = np.concatenate([order, rest])
        else:
            full = order
        cuts = _kernels.prefix_cuts(np.ascontiguousarray(full, dtype=np.int64), indptr, indices)
        sizes = np.arange(1, min(k, len(order)) + 1)
        phis = cuts[sizes] / (g.d * sizes)
        j = int(np.argmin(phis))
        if phis[j] < best[0]:
            best[0] = float(phis[j])
            best[1] = np.asarray(order[: sizes[j]])

    if g.n > 2:
        try:
            _, x = second_eigenpair(g)
            o = np.argsort(x, kind="stable")
            consider(o)
            consider(o[::-1])
        except Exception:
            pass

    rng = derive_rng(seed, "sse-heuristic")
    seeds = rng.choice(g.n, size=min(starts, g.n), replace=False)
    for s in seeds:
        consider(_greedy_grow(g, int(s), k, rng))
        consider(_walk_order(g, int(s), k, rng))

    members = _greedy_trim(g, np.asarray(best[1]))
    worst = VertexSet(tuple(members.tolist()), g.n)
    return worst, edge_expansion(g, worst)


def _greedy_grow(g: RegularGraph, start: int, k: int, rng) -> np.ndarray:
    """Grow a set one vertex at a time, always adding the frontier vertex with most edges into it."""
    indptr, indices = g.csr
    inner = np.zeros(g.n, dtype=np.float64)
    inside = np.zeros(g.n, dtype=bool)
    order = [start]
    inside[start] = True
    np.add.at(inner, indices[indptr[start]:indptr[start + 1]], 1)
    jitter = rng.random(g.n) * 1e-3
    for _ in range(k - 1):
        score = np.where(inside | (inner == 0), -np.inf, inner + jitter)
        v = int(np.argmax(score))
        if not np.isfinite(score[v]):
            break
        inside[v] = True
        order.append(v)
        np.add.at(inner, indices[indptr[v]:indptr[v + 1]], 1)
    return np.array(order, dtype=np.int64)


def _walk_order(g: RegularGraph, start: int, k: int, rng) -> np.ndarray:
    """Vertices in order of first visit by a lazy random walk from ``start``."""
    indptr, indices = g.csr
    seen = {start: None}
    v = start
    for _ in range(8 * k):
        if len(seen) >= k:
            break
        if rng.random() < 0.5:
            v = int(indices[indptr[v] + rng.integers(g.d)])
            seen.setdefault(v, None)
    return np.fromiter(seen, dtype=np.int64)


def _greedy_trim(g: RegularGraph, members: np.ndarray) -> np.ndarray:
    """Drop vertices one at a time while doing so lowers the expansion."""
    mask = np.zeros(g.n, dtype=bool)
    mask[members] = True
    indptr, indices = g.csr
    while mask.sum() > 1:
        cur = boundary_size(g, mask) / (g.d * mask.sum())
        best_v, best_phi = None, cur
        size = mask.sum() - 1
        base = boundary_size(g, mask)
        for v in np.flatnonzero(mask):
            nb = indices[indptr[v]:indptr[v + 1]]
            into = int(np.count_nonzero(mask[nb]) )
            # removing v: its edges into S become boundary, its boundary edges vanish
            b = base - (g.d - into) + into
            phi = b / (g.d * size)
            if phi < best_phi - 1e-15:
                best_v, best_phi = v, phi
        if best_v is None:
            break
        mask[best_v] = False
    return np.flatnonzero(mask)


# --------------------------------------------------------------------------
# Generators


def generate_random_regular(n: int, d: int, seed: int, simple: bool = True, max_restarts: int = 200) -> RegularGraph:
    """Configuration-model sample: random stub pairing, re-pairing rejected stubs.

    Self-loops are always rejected; with ``simple=True`` repeated edges are too.
    """
    if n < 0 or d < 0:
        raise ParameterError("n and d must be nonnegative")
    if (n * d) % 2:
        raise ParameterError(f"n*d must be even (n={n}, d={d})")
    if simple and d >= n and n > 0:
        raise ParameterError(f"no simple {d}-regular graph on {n} vertices")
    if n > 0 and d > 0 and n == 1:
        raise ParameterError("a single vertex cannot carry edges without self-loops")
    rng = derive_rng(seed, "random-regular")
    for _ in range(max_restarts):
        edges = _pair_stubs(n, d, rng, simple)
        if edges is not None:
            return RegularGraph(n, d, edges)
    raise GenerationError(f"failed to sample a {d}-regular graph on {n} vertices after {max_restarts} restarts")


def _pair_stubs(n, d, rng, simple):
    stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    accepted = []
    present = set()
    stall = 0
    while stubs.size:
        stubs = rng.permutation(stubs)
        pairs = np.sort(stubs.reshape(-1, 2), axis=1)
        leftover = []
        progress = False
        for a, b in pairs.tolist():
            if a == b or (simple and (a, b) in present):
                leftover.extend((a, b))
                continue
            accepted.append((a, b))
            if simple:
                present.add((a, b))
            progress = True
        stubs = np.array(leftover, dtype=np.int64)
        if not progress:
            stall += 1
            if stall > 20 or not _pairable(stubs, present, simple):
                return None
        else:
            stall = 0
    return np.array(accepted, dtype=np.int64).reshape(-1, 2)


def _pairable(stubs, present, simple):
    vals = np.unique(stubs)
    for i, a in enumerate(vals):
        for b in vals[i + 1:]:
            if not simple or (int(a), int(b)) not in present:
                return True
    return False


def generate_planted_bipartite_sse(n: int, d: int, noise: float, seed: int, max_retries: int = 1000):
    """Bipartite union of d random perfect matchings, then noise-driven swaps.

    Each of the ``ceil(noise*m)`` swaps turns cross edges (a1,b1), (a2,b2) into
    monochromatic edges (a1,a2), (b1,b2), so the planted side cuts exactly
    ``m - 2*ceil(noise*m)`` edges.  Returns ``(graph, planted_side)``.
    """
    if n <= 0 or n % 2:
        raise ParameterError("n must be a positive even number")
    if d < 3:
        raise ParameterError("d must be at least 3")
    if not 0 <= noise < 0.5:
        raise ParameterError("noise must lie in [0, 1/2)")
    rng = derive_rng(seed, "planted")
    half = n // 2
    perm = rng.permutation(n)
    left, right = perm[:half], perm[half:]
    edges = np.concatenate([np.stack([left, right[rng.permutation(half)]], axis=1) for _ in range(d)])
    m = edges.shape[0]
    swaps = int(math.ceil(noise * m - 1e-9))
    if 2 * swaps > m:
        raise GenerationError("too many swaps requested")
    cross = list(range(m))  # indices of edges still crossing the bipartition
    for _ in range(swaps):
        for _attempt in range(max_retries):
            i, j = rng.choice(len(cross), size=2, replace=False)
            e1, e2 = edges[cross[i]], edges[cross[j]]
            if e1[0] != e2[0] and e1[1] != e2[1]:
                break
        else:
            raise GenerationError("no feasible double-edge swap found within the retry budget")
        a1, b1 = e1
        a2, b2 = e2
        ci, cj = cross[i], cross[j]
        edges[ci] = (a1, a2)
        edges[cj] = (b1, b2)
        for idx in sorted((i, j), reverse=True):
            cross[idx] = cross[-1]
            cross.pop()
    return RegularGraph(n, d, edges), VertexSet(tuple(left.tolist()), n)


def generate_two_expanders(n: int, d: int, bridges: int, seed: int):
    """Two random d-regular graphs on n/2 vertices joined by ``bridges`` double-edge swaps.

    Each swap replaces one edge inside each half by two edges across, so the
    planted half ``0..n/2-1`` has exactly ``2*bridges`` boundary edges.
    """
    if n % 2:
        raise ParameterError("n must be even")
    half = n // 2
    g1 = generate_random_regular(half, d, seed=seed * 2 + 0)
    g2 = generate_random_regular(half, d, seed=seed * 2 + 1)
    e1 = np.array(g1.edges)
    e2 = np.array(g2.edges) + half
    rng = derive_rng(seed, "two-expanders")
    if bridges > min(len(e1), len(e2)):
        raise ParameterError("too many bridges")
    i1 = rng.choice(len(e1), size=bridges, replace=False)
    i2 = rng.choice(len(e2), size=bridges, replace=False)
    extra = []
    for a, b in zip(i1, i2):
        (a1, b1), (a2, b2) = e1[a], e2[b]
        extra.append((a1, a2))
        extra.append((b1, b2))
    keep1 = np.delete(e1, i1, axis=0)
    keep2 = np.delete(e2, i2, axis=0)
    edges = np.concatenate([keep1, keep2, np.array(extra, dtype=np.int64).reshape(-1, 2)])
    return RegularGraph(n, d, edges), VertexSet(tuple(range(half)), n)


def complete_graph(n: int) -> RegularGraph:
    iu, ju = np.triu_indices(n, 1)
    return RegularGraph(n, n - 1, np.stack([iu, ju], axis=1))


def cycle_graph(n: int) -> RegularGraph:
    v = np.arange(n)
    return RegularGraph(n, 2, np.stack([v, (v + 1) % n], axis=1))


def double_graph(g: RegularGraph) -> RegularGraph:
    """Signed double cover: vertex (v, +1) is ``v``, (v, -1) is ``v + n``.

    Each edge {u, v} yields ((u,+1),(v,-1)) and ((u,-1),(v,+1)).
    """
    e = g.edges
    n = g.n
    top = np.stack([e[:, 0], e[:, 1] + n], axis=1)
    bottom = np.stack([e[:, 0] + n, e[:, 1]], axis=1)
    return RegularGraph(2 * n, g.d, np.concatenate([top, bottom]))


def lift_cut(s: VertexSet) -> VertexSet:
    """Both copies of every vertex of S; cuts the doubled graph exactly as S cuts the base graph."""
    mask = s.mask()
    return VertexSet.from_mask(np.concatenate([mask, mask]), 2 * s.n)


# --------------------------------------------------------------------------
# Text format: "n m d" header, then m lines "u v"; '#' starts a comment.


def format_graph(g: RegularGraph) -> str:
    lines = [f"{g.n} {g.m} {g.d}"]
    lines.extend(f"{u} {v}" for u, v in g.edges.tolist())
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> RegularGraph:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line.split())
    if not rows:
        raise InputError("empty graph file")
    try:
        n, m, d = (int(t) for t in rows[0])
        edges = np.array([[int(a), int(b)] for a, b in rows[1:]], dtype=np.int64).reshape(-1, 2)
    except ValueError as exc:
        raise InputError(f"malformed graph file: {exc}") from exc
    if edges.shape[0] != m:
        raise InputError(f"header announces {m} edges, found {edges.shape[0]}")
    if 2 * m != n * d:
        raise InputError(f"m={m} is not n*d/2 for n={n}, d={d}")
    try:
        return RegularGraph(n, d, edges)
    except GraphError as exc:
        raise InputError(str(exc)) from exc


def load_graph(path) -> RegularGraph:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"graph file not found: {p}")
    return parse_graph(p.read_text())


def save_graph(g: RegularGraph, path) -> None:
    Path(path).write_text(format_graph(g))


def from_edge_list(n: int, edges: Iterable) -> RegularGraph:
    e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    deg = np.bincount(e.ravel(), minlength=n)
    d = int(deg[0]) if n else 0
    return RegularGraph(n, d, e)
