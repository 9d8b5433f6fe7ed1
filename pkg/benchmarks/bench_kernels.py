"""Time the compiled kernels against the numpy fallback on identical inputs.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--csv out.csv]

Both backends are imported directly, so the environment switch is not needed.
Each row also records whether the two backends agreed.
"""

import argparse
import csv
import sys
import time

import numpy as np

from ssetk._kernels import compiled_backend, python_backend
from ssetk.graph import generate_random_regular


def _best(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def cases():
    g22 = generate_random_regular(22, 3, seed=1)
    g18 = generate_random_regular(18, 4, seed=2)
    g12 = generate_random_regular(12, 3, seed=3)
    big = generate_random_regular(20000, 8, seed=4)
    mid = generate_random_regular(2000, 12, seed=5)
    W22 = g22.adjacency_matrix()
    W18 = g18.adjacency_matrix()
    W12 = g12.adjacency_matrix()
    order = np.argsort(np.random.default_rng(0).random(big.n)).astype(np.int64)
    signs = np.where(np.random.default_rng(1).random(big.n) < 0.5, -1, 1).astype(np.int8)
    ip, ix = big.csr
    mip, mix = mid.csr
    X0 = np.random.default_rng(2).standard_normal((mid.n, 64))
    X0 /= np.linalg.norm(X0, axis=1, keepdims=True)

    def sweep(k):
        X = X0.copy()
        k.bcd_sweep(X, mip, mix)
        return X

    yield "gray_maxcut n=22", lambda k: k.gray_maxcut(W22)[0]
    yield "expansion_profile n=18", lambda k: k.expansion_profile(W18)[0].tolist()
    yield "small_set_search n=22 k<=7", lambda k: k.small_set_search(W22, 3, 7)[:2]
    yield "ternary_dense_cut n=12", lambda k: k.ternary_dense_cut(W12)[:2]
    yield "prefix_cuts n=20000", lambda k: k.prefix_cuts(order, ip, ix).tolist()
    yield "two_sided_prefix n=20000", lambda k: k.two_sided_prefix(order, signs, ip, ix).tolist()
    yield "bcd_sweep n=2000 rank=64", lambda k: np.round(sweep(k), 10).tolist()


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    if compiled_backend is None:
        print("compiled extension not built; only the fallback can be timed", file=sys.stderr)
    rows = []
    for name, fn in cases():
        tp, outp = _best(lambda: fn(python_backend), args.repeat)
        if compiled_backend is not None:
            tc, outc = _best(lambda: fn(compiled_backend), args.repeat)
            agree = outc == outp
        else:
            tc, agree = float("nan"), None
        rows.append((name, tc, tp, tp / tc if tc == tc and tc > 0 else float("nan"), agree))
    w = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{w}}  {'compiled s':>11}  {'python s':>10}  {'speedup':>8}  agree")
    for name, tc, tp, sp, agree in rows:
        print(f"{name:<{w}}  {tc:11.4f}  {tp:10.4f}  {sp:8.1f}  {agree}")
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            cw = csv.writer(fh)
            cw.writerow(["kernel", "compiled_s", "python_s", "speedup", "agree"])
            cw.writerows(rows)


if __name__ == "__main__":
    main()
