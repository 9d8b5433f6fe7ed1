# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops.  Contracts are documented in ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32


def bcd_sweep(double[:, ::1] X, i64[::1] indptr, i64[::1] indices):
    cdef Py_ssize_t n = X.shape[0], r = X.shape[1]
    cdef Py_ssize_t v, k, p
    cdef i64 u
    cdef double norm
    cdef double[::1] g = np.empty(r, dtype=np.float64)
    for v in range(n):
        for k in range(r):
            g[k] = 0.0
        for p in range(indptr[v], indptr[v + 1]):
            u = indices[p]
            for k in range(r):
                g[k] += X[u, k]
        norm = 0.0
        for k in range(r):
            norm += g[k] * g[k]
        if norm < 1e-300:
            continue
        norm = sqrt(norm)
        for k in range(r):
            X[v, k] = -g[k] / norm


def gray_maxcut(i32[:, ::1] W):
    cdef Py_ssize_t n = W.shape[0]
    cdef Py_ssize_t i, u
    cdef i64 steps, k, cut = 0, best = 0, mask = 0, best_mask = 0, delta
    cdef i32[::1] side = np.zeros(n, dtype=np.int32)
    if n <= 1:
        return 0, 0
    steps = (<i64>1) << (n - 1)
    for k in range(1, steps):
        i = 0
        while not ((k >> i) & 1):
            i += 1
        delta = 0
        for u in range(n):
            if W[i, u]:
                if side[u] == side[i]:
                    delta += W[i, u]
                else:
                    delta -= W[i, u]
        side[i] ^= 1
        mask ^= (<i64>1) << i
        cut += delta
        if cut > best or (cut == best and mask < best_mask):
            best = cut
            best_mask = mask
    return int(best), int(best_mask)


def expansion_profile(i32[:, ::1] W):
    cdef Py_ssize_t n = W.shape[0]
    cdef Py_ssize_t i, u, size = 0
    cdef i64 steps, k, mask = 0, boundary = 0, delta
    cdef i32[::1] inside = np.zeros(n, dtype=np.int32)
    out_b = np.full(n + 1, -1, dtype=np.int64)
    out_m = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] best_b = out_b
    cdef i64[::1] best_m = out_m
    best_b[0] = 0
    steps = (<i64>1) << n
    for k in range(1, steps):
        i = 0
        while not ((k >> i) & 1):
            i += 1
        delta = 0
        for u in range(n):
            if W[i, u]:
                if inside[u] == inside[i]:
                    delta += W[i, u]
                else:
                    delta -= W[i, u]
        if inside[i]:
            size -= 1
        else:
            size += 1
        inside[i] ^= 1
        mask ^= (<i64>1) << i
        boundary += delta
        if best_b[size] < 0 or boundary < best_b[size] or (boundary == best_b[size] and mask < best_m[size]):
            best_b[size] = boundary
            best_m[size] = mask
    return out_b, out_m


def ternary_dense_cut(i32[:, ::1] W):
    cdef Py_ssize_t n = W.shape[0]
    cdef Py_ssize_t i, u
    cdef i64 total = 1, k, t, num = 0, den, best_num = -1, best_den = 1
    cdef int a, b
    cdef cnp.int8_t[::1] y = np.full(n, -1, dtype=np.int8)
    cdef cnp.int8_t[::1] dirs = np.ones(n, dtype=np.int8)
    best_y = np.full(n, -1, dtype=np.int8)
    cdef cnp.int8_t[::1] by = best_y
    for i in range(n):
        total *= 3
    for i in range(n):
        for u in range(i + 1, n):
            num += W[i, u] * 2
    den = n
    best_num = num
    best_den = den
    for k in range(1, total):
        t = k
        i = 0
        while t % 3 == 0:
            t //= 3
            i += 1
        a = y[i]
        b = a + dirs[i]
        y[i] = b
        if b != 0:
            dirs[i] = -dirs[i]
        for u in range(n):
            if u != i and W[i, u]:
                num += W[i, u] * (abs(b + y[u]) - abs(a + y[u]))
        den += abs(b) - abs(a)
        if den > 0 and num * best_den < best_num * den:
            best_num = num
            best_den = den
            for u in range(n):
                by[u] = y[u]
    return int(best_num), int(best_den), best_y


cdef void _dfs(i32[:, ::1] W, i64 deg, i64 kmax, Py_ssize_t start, i64 size,
               i64 boundary, i64 mask, i64[::1] inner, i64[::1] best) nogil:
    # best = [boundary, size, mask]
    cdef Py_ssize_t n = W.shape[0]
    cdef Py_ssize_t v, u
    cdef i64 nb, lhs, rhs
    for v in range(start, n):
        nb = boundary + deg - 2 * inner[v]
        lhs = nb * best[1]
        rhs = best[0] * (size + 1)
        if best[1] == 0 or lhs < rhs or (lhs == rhs and size + 1 < best[1]):
            best[0] = nb
            best[1] = size + 1
            best[2] = mask | ((<i64>1) << v)
        if size + 1 < kmax:
            for u in range(n):
                inner[u] += W[v, u]
            _dfs(W, deg, kmax, v + 1, size + 1, nb, mask | ((<i64>1) << v), inner, best)
            for u in range(n):
                inner[u] -= W[v, u]


def small_set_search(i32[:, ::1] W, i64 deg, i64 kmax):
    cdef Py_ssize_t n = W.shape[0]
    inner_arr = np.zeros(n, dtype=np.int64)
    best_arr = np.zeros(3, dtype=np.int64)
    cdef i64[::1] inner = inner_arr
    cdef i64[::1] best = best_arr
    if kmax < 1 or n == 0:
        return -1, 0, 0
    with nogil:
        _dfs(W, deg, kmax, 0, 0, 0, 0, inner, best)
    return int(best_arr[0]), int(best_arr[1]), int(best_arr[2])


def prefix_cuts(i64[::1] order, i64[::1] indptr, i64[::1] indices):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t k, p
    cdef i64 v, cut = 0, into
    cdef cnp.uint8_t[::1] inside = np.zeros(n, dtype=np.uint8)
    out = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] res = out
    for k in range(n):
        v = order[k]
        into = 0
        for p in range(indptr[v], indptr[v + 1]):
            if inside[indices[p]]:
                into += 1
        cut += (indptr[v + 1] - indptr[v]) - 2 * into
        inside[v] = 1
        res[k + 1] = cut
    return out


def two_sided_prefix(i64[::1] order, cnp.int8_t[::1] signs, i64[::1] indptr, i64[::1] indices):
    cdef Py_ssize_t n = order.shape[0]
    cdef Py_ssize_t k, p
    cdef i64 v, u, num = 0
    cdef int s
    cdef cnp.uint8_t[::1] active = np.zeros(n, dtype=np.uint8)
    out = np.zeros(n + 1, dtype=np.int64)
    cdef i64[::1] res = out
    for k in range(n):
        v = order[k]
        s = signs[v]
        for p in range(indptr[v], indptr[v + 1]):
            u = indices[p]
            if active[u]:
                num += abs(s + signs[u]) - 1
            else:
                num += 1
        active[v] = 1
        res[k + 1] = num
    return out
