"""Max-Cut vector program on the doubled graph, solved by low-rank block-coordinate descent.

Only the vectors of the +1 copies are stored; the copy (v, -1) is always the
negation of (v, +1), so the antipodal constraint holds by representation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from . import _kernels
from .errors import InputError, ParameterError
from .graph import RegularGraph, VertexSet
from .rng import derive_rng


@dataclass(frozen=True)
class SdpConfig:
    rank: Optional[int] = None  # default min(n, ceil(sqrt(2n)) + 1)
    tol: float = 1e-7
    max_sweeps: int = 5000
    seed: int = 0

    def __post_init__(self):
        if self.rank is not None and self.rank < 2:
            raise ParameterError("rank must be at least 2")
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        if self.max_sweeps < 1:
            raise ParameterError("max_sweeps must be positive")

    def rank_for(self, n: int) -> int:
        if self.rank is not None:
            return self.rank
        return max(2, min(n, math.ceil(math.sqrt(2 * n)) + 1))


@dataclass(frozen=True, eq=False)
class VectorSolution:
    vectors: np.ndarray  # (n, dim), rows are x_{v,+1}
    converged: bool = True
    history: tuple = ()

    def __post_init__(self):
        X = np.ascontiguousarray(np.asarray(self.vectors, dtype=float))
        if X.ndim != 2:
            raise ParameterError("vectors must be a 2-d array")
        X.setflags(write=False)
        object.__setattr__(self, "vectors", X)

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def vector(self, v: int, b: int = 1) -> np.ndarray:
        return self.vectors[v] if b > 0 else -self.vectors[v]

    def signed(self) -> np.ndarray:
        """All 2n vectors, indexed like the doubled graph: (v,+1) -> v, (v,-1) -> v + n."""
        return np.concatenate([self.vectors, -self.vectors])

    def max_norm_error(self) -> float:
        if self.n == 0:
            return 0.0
        return float(np.abs(np.linalg.norm(self.vectors, axis=1) - 1).max())


def _base_objective(X: np.ndarray, edges: np.ndarray) -> float:
    if edges.shape[0] == 0:
        return 0.0
    s = X[edges[:, 0]] + X[edges[:, 1]]
    return float(np.einsum("ij,ij->", s, s) / edges.shape[0])


def sdp_objective(sol: VectorSolution, g: RegularGraph) -> float:
    """Mean squared distance across edges of the doubled graph.

    Accepts either the doubled graph itself (2n vertices) or the base graph,
    where the value is the mean of |x_u + x_v|^2 over edges.
    """
    if g.n == sol.n:
        return _base_objective(sol.vectors, g.edges)
    if g.n == 2 * sol.n:
        if g.m == 0:
            return 0.0
        F = sol.signed()
        diff = F[g.edges[:, 0]] - F[g.edges[:, 1]]
        return float(np.einsum("ij,ij->", diff, diff) / g.m)
    raise ParameterError(f"solution has {sol.n} vertices, graph has {g.n}")


def solve_maxcut_sdp(g: RegularGraph, cfg: SdpConfig = SdpConfig()) -> VectorSolution:
    """Rank-r Gauss-Seidel descent on the vector program from a seeded random start.

    Each sweep sets x_v to -normalize(sum of neighbour vectors), which exactly
    minimises the objective in x_v, so the recorded history never increases.
    """
    n = g.n
    r = cfg.rank_for(n)
    rng = derive_rng(cfg.seed, "sdp-init")
    X = rng.standard_normal((n, r))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    X = np.ascontiguousarray(X)
    if g.m == 0:
        return VectorSolution(X, True, (0.0,))
    indptr, indices = g.csr
    obj = _base_objective(X, g.edges)
    history = [obj]
    converged = False
    for _ in range(cfg.max_sweeps):
        _kernels.bcd_sweep(X, indptr, indices)
        new = _base_objective(X, g.edges)
        history.append(new)
        if obj - new < cfg.tol:
            converged = True
            obj = new
            break
        obj = new
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    if not converged:
        warnings.warn(f"SDP descent did not converge in {cfg.max_sweeps} sweeps", RuntimeWarning, stacklevel=2)
    return VectorSolution(X, converged, tuple(history))


def solution_from_cut(cut: VertexSet, g: RegularGraph, dim: int = 1) -> VectorSolution:
    """Integral witness: +e_1 on the cut side, -e_1 elsewhere."""
    X = np.zeros((g.n, max(dim, 1)))
    X[:, 0] = np.where(cut.mask(), 1.0, -1.0)
    return VectorSolution(X)


def save_solution(sol: VectorSolution, path) -> None:
    with open(path, "wb") as fh:
        fh.write(f"{sol.n} {sol.dim}\n".encode("ascii"))
        fh.write(sol.vectors.astype("<f8").tobytes())


def load_solution(path) -> VectorSolution:
    data = Path(path).read_bytes()
    try:
        head, body = data.split(b"\n", 1)
        n, dim = (int(t) for t in head.decode("ascii").split())
    except ValueError as exc:
        raise InputError(f"malformed solution header in {path}") from exc
    if len(body) != 8 * n * dim:
        raise InputError(f"expected {n * dim} doubles in {path}, found {len(body) / 8}")
    return VectorSolution(np.frombuffer(body, dtype="<f8").reshape(n, dim).copy())
