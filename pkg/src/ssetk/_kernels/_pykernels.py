"""Pure-Python/numpy versions of the hot loops.

Each function here has a compiled counterpart in ``_ckernels.pyx`` with the
same signature, return values and tie-breaking.  The enumeration kernels here
use chunked vectorised enumeration rather than Gray codes, which also gives an
independent route for cross-checking the compiled versions.
"""

import itertools

import numpy as np

_CHUNK = 1 << 18


def bcd_sweep(X, indptr, indices):
    """One Gauss-Seidel sweep of ``x_v <- -normalize(sum of neighbour vectors)``, in place."""
    for v in range(X.shape[0]):
        g = X[indices[indptr[v]:indptr[v + 1]]].sum(axis=0)
        norm = np.sqrt(g @ g)
        if norm * norm < 1e-300:
            continue
        X[v] = -g / norm


def _weighted_edges(W):
    iu, ju = np.nonzero(np.triu(W, 1))
    return iu.astype(np.int64), ju.astype(np.int64), W[iu, ju].astype(np.int64)


def gray_maxcut(W):
    """Maximum cut size over all bipartitions with vertex n-1 on side 0.

    Returns ``(cut, mask)``; ties go to the smallest mask.
    """
    n = W.shape[0]
    if n <= 1:
        return 0, 0
    iu, ju, w = _weighted_edges(W)
    best, best_mask = -1, 0
    total = 1 << (n - 1)
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        cut = np.zeros(masks.shape[0], dtype=np.int64)
        for a, b, c in zip(iu, ju, w):
            cut += c * (((masks >> a) ^ (masks >> b)) & 1)
        idx = int(np.argmax(cut))
        if cut[idx] > best:
            best, best_mask = int(cut[idx]), int(masks[idx])
    return best, best_mask


def expansion_profile(W):
    """Per subset size k, the minimum boundary edge count and the smallest mask attaining it."""
    n = W.shape[0]
    iu, ju, w = _weighted_edges(W)
    total = 1 << n
    best_key = np.full(n + 1, np.iinfo(np.int64).max, dtype=np.int64)
    for start in range(0, total, _CHUNK):
        masks = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        boundary = np.zeros(masks.shape[0], dtype=np.int64)
        size = np.zeros(masks.shape[0], dtype=np.int64)
        for a, b, c in zip(iu, ju, w):
            boundary += c * (((masks >> a) ^ (masks >> b)) & 1)
        for i in range(n):
            size += (masks >> i) & 1
        np.minimum.at(best_key, size, boundary * total + masks)
    return best_key // total, best_key % total


def ternary_gray(n):
    """Reflected ternary Gray code over {-1,0,1}^n, as stepped by the compiled dense-cut scan.

    Yields (digit changed, new tuple); the first item has digit -1.
    """
    y = [-1] * n
    dirs = [1] * n
    yield -1, tuple(y)
    for k in range(1, 3 ** n):
        t, i = k, 0
        while t % 3 == 0:
            t //= 3
            i += 1
        y[i] += dirs[i]
        if y[i] != 0:
            dirs[i] = -dirs[i]
        yield i, tuple(y)


def ternary_dense_cut(W):
    """Minimise sum |y_u+y_v| / (d sum |y_u|) over nonzero y in {-1,0,1}^n.

    Returns ``(numerator, sum |y|, y)``; the caller multiplies the denominator by d.
    """
    n = W.shape[0]
    iu, ju, w = _weighted_edges(W)
    total = 3 ** n
    powers = 3 ** np.arange(n, dtype=np.int64)
    best = (None, None, None)
    for start in range(0, total, _CHUNK):
        codes = np.arange(start, min(total, start + _CHUNK), dtype=np.int64)
        y = ((codes[:, None] // powers) % 3 - 1).astype(np.int8)
        den = np.abs(y).sum(axis=1).astype(np.int64)
        num = np.zeros(codes.shape[0], dtype=np.int64)
        for a, b, c in zip(iu, ju, w):
            num += c * np.abs(y[:, a].astype(np.int64) + y[:, b])
        ok = den > 0
        if not ok.any():
            continue
        ratio = np.where(ok, num / np.maximum(den, 1), np.inf)
        idx = int(np.argmin(ratio))
        if best[0] is None or num[idx] * best[1] < best[0] * den[idx]:
            best = (int(num[idx]), int(den[idx]), y[idx].copy())
    return best


def small_set_search(W, deg, kmax):
    """Minimum of boundary/(deg*|S|) over 1 <= |S| <= kmax.

    Returns ``(boundary, size, mask)``.  Ties prefer the smaller set, then the
    lexicographically first vertex combination.
    """
    n = W.shape[0]
    if kmax < 1 or n == 0:
        return -1, 0, 0
    best = None
    for k in range(1, min(kmax, n) + 1):
        combos = itertools.combinations(range(n), k)
        while True:
            block = np.array(list(itertools.islice(combos, 1 << 15)), dtype=np.int64)
            if block.size == 0:
                break
            block = block.reshape(-1, k)
            inner = W[block[:, :, None], block[:, None, :]].sum(axis=(1, 2))
            boundary = deg * k - inner
            idx = int(np.argmin(boundary))
            b = int(boundary[idx])
            if best is None or b * best[1] < best[0] * k:
                mask = int(sum(1 << int(v) for v in block[idx]))
                best = (b, k, mask)
    return best


def prefix_cuts(order, indptr, indices):
    """Cut size of every prefix ``order[:k]``, k = 0..n."""
    n = order.shape[0]
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    src = np.repeat(np.arange(n), np.diff(indptr))
    keep = src < indices
    lo = np.minimum(rank[src[keep]], rank[indices[keep]])
    hi = np.maximum(rank[src[keep]], rank[indices[keep]])
    diff = np.zeros(n + 2, dtype=np.int64)
    np.add.at(diff, lo + 1, 1)
    np.add.at(diff, hi + 1, -1)
    return np.cumsum(diff)[: n + 1]


def two_sided_prefix(order, signs, indptr, indices):
    """Numerator sum |y_u + y_v| when the first k vertices of ``order`` carry their signs."""
    n = order.shape[0]
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    src = np.repeat(np.arange(n), np.diff(indptr))
    keep = src < indices
    a, b = src[keep], indices[keep]
    lo = np.minimum(rank[a], rank[b])
    hi = np.maximum(rank[a], rank[b])
    both = np.abs(signs[a].astype(np.int64) + signs[b])
    diff = np.zeros(n + 2, dtype=np.int64)
    np.add.at(diff, lo + 1, 1)
    np.add.at(diff, hi + 1, both - 1)
    return np.cumsum(diff)[: n + 1]
