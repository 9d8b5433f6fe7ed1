"""Exhaustive ground truth for small graphs.

Every oracle is a pure function of the graph and is memoised on the graph's
content hash.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .errors import BudgetError, ParameterError
from .graph import RegularGraph, VertexSet


@dataclass(frozen=True)
class OracleBudget:
    max_n: dict = field(default_factory=lambda: {"maxcut": 24, "conductance": 20, "sse": 20, "densecut": 14})
    time_cap: float = 120.0  # seconds, checked against a rough operation-count estimate
    ops_per_second: float = 2e8

    def __post_init__(self):
        if any(v <= 0 for v in self.max_n.values()) or self.time_cap <= 0:
            raise ParameterError("oracle budgets must be positive")

    def check(self, problem: str, n: int, ops: float):
        cap = self.max_n[problem]
        if n > cap:
            raise BudgetError(f"{problem} oracle limited to n <= {cap}, got n = {n}")
        if ops / self.ops_per_second > self.time_cap:
            raise BudgetError(f"{problem} oracle estimated to exceed {self.time_cap}s")


DEFAULT_BUDGET = OracleBudget()
_CACHE: OrderedDict = OrderedDict()
_CACHE_SIZE = 4096


def _memo(name, g: RegularGraph, compute):
    key = (name, g.key)
    if key in _CACHE:
        _CACHE.move_to_end(key)
        return _CACHE[key]
    val = compute()
    _CACHE[key] = val
    if len(_CACHE) > _CACHE_SIZE:
        _CACHE.popitem(last=False)
    return val


def clear_cache():
    _CACHE.clear()


def maxcut_edges(g: RegularGraph, budget: OracleBudget = DEFAULT_BUDGET) -> tuple[int, int]:
    """(maximum number of cut edges, bitmask of one optimal side)."""
    budget.check("maxcut", g.n, 2.0 ** max(g.n - 1, 0) * g.n)
    return _memo("maxcut", g, lambda: _kernels.gray_maxcut(g.adjacency_matrix()))


def brute_force_maxcut(g: RegularGraph, budget: OracleBudget = DEFAULT_BUDGET):
    """Exact maximum cut fraction over all bipartitions; returns ``(side, value)``."""
    best, mask = maxcut_edges(g, budget)
    value = best / g.m if g.m else 0.0
    return VertexSet.from_mask(mask, g.n), value


def _profile(g: RegularGraph, problem: str, budget: OracleBudget):
    budget.check(problem, g.n, 2.0 ** g.n * g.n)
    return _memo("profile", g, lambda: _kernels.expansion_profile(g.adjacency_matrix()))


def _best_over_sizes(g: RegularGraph, sizes, problem, budget):
    b, masks = _profile(g, problem, budget)
    best = None
    for k in sizes:
        frac = Fraction(int(b[k]), g.d * k) if g.d else Fraction(0)
        if best is None or frac < best[0]:
            best = (frac, int(masks[k]))
    return best


def min_conductance(g: RegularGraph, budget: OracleBudget = DEFAULT_BUDGET, exact: bool = False):
    """Exact minimum edge expansion over 1 <= |S| <= n/2; returns ``(set, phi)``."""
    if g.n < 2:
        raise ParameterError("need at least two vertices")
    frac, mask = _best_over_sizes(g, range(1, g.n // 2 + 1), "conductance", budget)
    return VertexSet.from_mask(mask, g.n), (frac if exact else float(frac))


def sse_profile(g: RegularGraph, eps: float, budget: OracleBudget = DEFAULT_BUDGET, exact: bool = False):
    """Exact minimum edge expansion over 1 <= |S| <= eps*n.

    Returns ``(set, phi)``; with no admissible size the result is ``(None, inf)``.
    """
    k = int(math.floor(eps * g.n + 1e-9))
    if k < 1:
        return None, math.inf
    frac, mask = _best_over_sizes(g, range(1, min(k, g.n) + 1), "sse", budget)
    return VertexSet.from_mask(mask, g.n), (frac if exact else float(frac))


def brute_force_dense_cut(g: RegularGraph, budget: OracleBudget = DEFAULT_BUDGET, exact: bool = False):
    """Exact minimum of sum|y_u + y_v| / (d sum|y_u|) over nonzero y in {-1,0,1}^n."""
    budget.check("densecut", g.n, 3.0 ** g.n * g.n)
    if g.n == 0:
        raise ParameterError("empty graph")

    def run():
        return _kernels.ternary_dense_cut(g.adjacency_matrix())

    num, den, y = _memo("densecut", g, run)
    frac = Fraction(num, g.d * den) if g.d else Fraction(0)
    return np.asarray(y, dtype=np.int8).copy(), (frac if exact else float(frac))
