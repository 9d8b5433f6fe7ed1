"""Command-line interface: generators, the three partitioning pipelines, the sampling demo and a bench harness.

Every report carries ``schema_version``, a hash of the resolved config and a
hash of the inputs.  Reports are written with sorted keys and no timing
fields, so identical configs give byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import InputError, ParameterError, SsetkError
from .graph import (
    SseParams,
    boundary_size,
    complete_graph,
    cycle_graph,
    format_graph,
    generate_planted_bipartite_sse,
    generate_random_regular,
    generate_two_expanders,
    load_graph,
)

SCHEMA_VERSION = "1.0"
log = logging.getLogger("ssetk")


def worker_count() -> int:
    """Worker cap from SSETK_THREADS; defaults to the core count."""
    raw = os.environ.get("SSETK_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        k = int(raw)
    except ValueError as exc:
        raise ParameterError(f"SSETK_THREADS must be an integer, got {raw!r}") from exc
    if k < 1:
        raise ParameterError("SSETK_THREADS must be at least 1")
    return k


def _sha(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _canonical(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(obj):
    """JSON-safe copy: numpy scalars become Python ones, non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    return obj


def _emit(report: dict, output) -> None:
    text = _canonical(report)
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


_SKIP_IN_HASH = {"output", "trace", "func", "config", "command"}


def _config_of(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in _SKIP_IN_HASH}


def _envelope(args, kind: str, inputs: dict, body: dict) -> dict:
    cfg = _config_of(args)
    return {
        "schema_version": SCHEMA_VERSION,
        "command": kind,
        "config": cfg,
        "config_hash": _sha(json.dumps(_clean(cfg), sort_keys=True).encode())[:16],
        "input_hash": _sha(json.dumps(inputs, sort_keys=True).encode())[:16],
        "inputs": inputs,
        **body,
    }


# --------------------------------------------------------------------------
# Graph acquisition


def generate(kind: str, n: int, d: int, seed: int, noise: float = 0.0, bridges: int = 1):
    """Returns (graph, metadata dict)."""
    meta = {"kind": kind, "n": n, "d": d, "seed": seed}
    if kind == "regular":
        g = generate_random_regular(n, d, seed)
    elif kind == "planted":
        g, side = generate_planted_bipartite_sse(n, d, noise, seed)
        meta.update(noise=noise, planted_side=list(side.members), planted_cut=boundary_size(g, side))
    elif kind == "two-expanders":
        g, side = generate_two_expanders(n, d, bridges, seed)
        meta.update(bridges=bridges, planted_side=list(side.members), planted_cut=boundary_size(g, side))
    elif kind == "complete":
        g = complete_graph(n)
        meta["d"] = n - 1
    elif kind == "cycle":
        g = cycle_graph(n)
        meta["d"] = 2
    else:
        raise ParameterError(f"unknown generator kind {kind!r}")
    meta["m"] = g.m
    meta["graph_hash"] = g.key[:16]
    return g, meta


def _graph_from(args):
    if getattr(args, "graph", None):
        g = load_graph(args.graph)
        return g, {"graph": g.key[:16]}
    if getattr(args, "gen", None):
        spec = _parse_gen(args.gen)
        g, meta = generate(**spec)
        return g, {"graph": g.key[:16], "generator": spec}
    raise InputError("pass --graph FILE or --gen SPEC")


def _parse_gen(text: str) -> dict:
    """'planted,n=200,d=8,noise=0.02,seed=7' -> generator kwargs."""
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ParameterError("empty generator spec")
    out = {"kind": parts[0], "n": 0, "d": 0, "seed": 0}
    casts = {"n": int, "d": int, "seed": int, "bridges": int, "noise": float}
    for p in parts[1:]:
        key, _, val = p.partition("=")
        if key not in casts:
            raise ParameterError(f"unknown generator field {key!r}")
        try:
            out[key] = casts[key](val)
        except ValueError as exc:
            raise ParameterError(f"bad value for {key}: {val!r}") from exc
    return out


# --------------------------------------------------------------------------
# Commands


def cmd_gen(args) -> int:
    g, meta = generate(args.kind, args.n, args.d, args.seed, args.noise, args.bridges)
    text = format_graph(g)
    if not args.output:
        sys.stdout.write(text)
        return 0
    out = Path(args.output)
    out.write_text(text)
    meta["schema_version"] = SCHEMA_VERSION
    meta["graph_file"] = out.name
    out.with_suffix(".meta.json").write_text(_canonical(meta))
    return 0


def cmd_maxcut(args) -> int:
    from .hyperplane import PipelineConfig, run_maxcut_pipeline
    from .sdp import SdpConfig
    from .softround import write_trace_csv

    g, inputs = _graph_from(args)
    params = SseParams(args.eps, args.gamma)
    cfg = PipelineConfig(
        sdp=SdpConfig(args.rank, args.tol, args.max_sweeps, args.seed),
        K=args.K, retries=args.projections, trials=args.trials,
        max_attempts=args.max_attempts, seed=args.seed, acceptance_trials=args.acceptance_trials,
    )
    rep = run_maxcut_pipeline(g, params, cfg, check_separation=not args.no_separation)
    body = rep.to_dict()
    if args.oracle:
        from .oracle import brute_force_maxcut

        _, opt = brute_force_maxcut(g)
        body["oracle_value"] = opt
        body["oracle_dominates"] = bool(rep.value <= opt)
    if args.trace:
        with open(args.trace, "w", newline="") as fh:
            write_trace_csv(rep.traces, fh)
    _emit(_envelope(args, "maxcut", inputs, body), args.output)
    return 0


def _components(g) -> int:
    from scipy.sparse.csgraph import connected_components

    return int(connected_components(g.sparse_adjacency, directed=False)[0])


def cmd_cheeger(args) -> int:
    from .spectral import cheeger_partition

    g, inputs = _graph_from(args)
    res = cheeger_partition(g, SseParams(args.eps, args.gamma), C=args.C, tol=args.tol)
    body = res.to_dict()
    ncomp = _components(g)
    body["components"] = ncomp
    if ncomp > 1:
        body["notice"] = f"graph is disconnected ({ncomp} components); the sweep returns a component"
    if args.oracle:
        from .oracle import min_conductance

        _, phi = min_conductance(g)
        body["oracle_phi"] = phi
    _emit(_envelope(args, "cheeger", inputs, body), args.output)
    return 0


def cmd_densecut(args) -> int:
    from .spectral import dense_cut

    g, inputs = _graph_from(args)
    res = dense_cut(g, SseParams(args.eps, args.gamma), tol=args.tol)
    body = res.to_dict()
    ncomp = _components(g)
    body["components"] = ncomp
    if ncomp > 1:
        body["notice"] = f"graph is disconnected ({ncomp} components)"
    if args.oracle:
        from .oracle import brute_force_dense_cut

        _, best = brute_force_dense_cut(g)
        body["oracle_ratio"] = best
    _emit(_envelope(args, "densecut", inputs, body), args.output)
    return 0


def cmd_distq(args) -> int:
    from .dist import load_distributions, protocol_report, quantize_collection

    g, inputs = _graph_from(args)
    dists = load_distributions(args.dists)
    inputs["dists"] = _sha(Path(args.dists).read_bytes())[:16]
    if len(dists) == 1:
        dists = dists * g.n
    qc = quantize_collection(g, dists, args.eps)
    if args.pair:
        try:
            u, v = (int(t) for t in args.pair.split(","))
        except ValueError as exc:
            raise ParameterError(f"--pair expects 'u,v', got {args.pair!r}") from exc
    elif g.m:
        u, v = (int(t) for t in g.edges[0])
    else:
        u, v = 0, 0
    if not (0 <= u < g.n and 0 <= v < g.n):
        raise ParameterError("pair vertices out of range")
    prot = protocol_report(qc.weights[u], qc.weights[v], args.eps, args.trials, args.seed)
    body = {
        "pair": [u, v],
        "outcomes": list(dists[0].outcomes or range(qc.weights.shape[1])),
        "cost_ratio": qc.cost_ratio,
        "level": qc.level,
        "envelope_ok": qc.envelope_ok(),
        "separation_ok": qc.separation_ok(),
        **prot,
    }
    _emit(_envelope(args, "distq", inputs, body), args.output)
    return 0


# --------------------------------------------------------------------------
# Bench harness

BENCH_HEADER = ["suite", "n", "d", "delta", "eps", "seed", "method", "value", "oracle", "status", "detail"]
METHODS = {"maxcut": ("pipeline", "gw"), "cheeger": ("quantized", "classical")}


def _bench_instance(job):
    """All method rows for one (suite, n, d, delta, eps, seed) instance."""
    suite, n, d, delta, eps, seed = job
    rows = []
    try:
        if suite == "maxcut":
            from .hyperplane import PipelineConfig, run_maxcut_pipeline
            from .sdp import SdpConfig

            g, _ = generate_planted_bipartite_sse(n, d, delta, seed)
            rep = run_maxcut_pipeline(g, SseParams(eps, 0.5), PipelineConfig(sdp=SdpConfig(seed=seed), seed=seed))
            vals = {"pipeline": rep.value, "gw": rep.baseline_value}
            oracle = None
            if n <= 24:
                from .oracle import brute_force_maxcut

                oracle = brute_force_maxcut(g)[1]
        else:
            from .spectral import cheeger_partition

            bridges = max(1, int(round(delta * n * d / 4)))
            g, _ = generate_two_expanders(n, d, bridges, seed)
            res = cheeger_partition(g, SseParams(eps, 0.5))
            vals = {"quantized": res.phi, "classical": res.baseline_phi}
            oracle = None
            if n <= 20:
                from .oracle import min_conductance

                oracle = min_conductance(g)[1]
        for method in METHODS[suite]:
            rows.append([suite, n, d, delta, eps, seed, method, repr(float(vals[method])),
                         "" if oracle is None else repr(float(oracle)), "ok", ""])
    except SsetkError as exc:
        for method in METHODS[suite]:
            rows.append([suite, n, d, delta, eps, seed, method, "", "", "error",
                         f"{type(exc).__name__}: {exc}"])
    return rows


def _csv_line(row) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerow(row)
    return buf.getvalue()


def _floats(text: str, cast=float):
    try:
        return [cast(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise ParameterError(f"bad grid list {text!r}") from exc


def cmd_bench(args) -> int:
    grid = [
        (args.suite, n, d, delta, eps, seed)
        for n in _floats(args.n, int)
        for d in _floats(args.d, int)
        for delta in _floats(args.delta)
        for eps in _floats(args.eps_grid)
        for seed in range(args.seeds)
    ]
    done: dict = {}
    out = Path(args.output) if args.output else None
    if args.resume and out is not None and out.exists():
        lines = out.read_text().splitlines(keepends=True)
        for line in lines[1:]:
            row = next(csv.reader([line]))
            if len(row) == len(BENCH_HEADER) and row[9] == "ok":
                key = (row[0], int(row[1]), int(row[2]), float(row[3]), float(row[4]), int(row[5]), row[6])
                done[key] = line
    todo = [job for job in grid if any((*job, m) not in done for m in METHODS[args.suite])]
    workers = min(worker_count(), max(1, len(todo)))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = dict(zip(todo, ex.map(_bench_instance, todo)))
    else:
        results = {job: _bench_instance(job) for job in todo}
    text = [_csv_line(BENCH_HEADER)]
    for job in grid:
        if job in results:
            for row in results[job]:
                if row[9] != "ok":
                    log.warning("bench row failed: %s", row[10])
                text.append(_csv_line(row))
        else:
            text.extend(done[(*job, m)] for m in METHODS[args.suite])
    payload = "".join(text)
    if out is not None:
        out.write_text(payload)
    else:
        sys.stdout.write(payload)
    return 0


# --------------------------------------------------------------------------
# Parser


def _common(p, eps_default=0.1):
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", help="graph file (text edge list)")
    src.add_argument("--gen", help="generator spec, e.g. 'planted,n=200,d=8,noise=0.02,seed=7'")
    p.add_argument("--eps", type=float, default=eps_default)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("-o", "--output", help="report path (default: stdout)")
    p.add_argument("--config", help="JSON file whose keys set defaults for this command")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ssetk", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"ssetk {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a generated graph")
    p.add_argument("--kind", required=True, choices=["regular", "planted", "two-expanders", "complete", "cycle"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--bridges", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("maxcut", help="SDP + sphere rounding Max-Cut pipeline")
    _common(p)
    p.add_argument("--K", type=float, default=4.0, help="triangulation fineness: perimeter <= eps/K")
    p.add_argument("--projections", type=int, default=20)
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--max-attempts", type=int, default=64)
    p.add_argument("--acceptance-trials", type=int, default=1000)
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--max-sweeps", type=int, default=5000)
    p.add_argument("--no-separation", action="store_true")
    p.add_argument("--oracle", action="store_true", help="cross-check against brute force")
    p.add_argument("--trace", help="CSV path for the soft-rounding trace")
    p.set_defaults(func=cmd_maxcut, tol=1e-7)

    p = sub.add_parser("cheeger", help="quantized spectral sweep")
    _common(p)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_cheeger)

    p = sub.add_parser("densecut", help="signed dense-cut sweep")
    _common(p)
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_densecut)

    p = sub.add_parser("distq", help="quantize per-vertex distributions and run correlated sampling")
    _common(p)
    p.add_argument("--dists", required=True)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--pair", help="'u,v' vertex pair (default: first edge)")
    p.set_defaults(func=cmd_distq)

    p = sub.add_parser("bench", help="grid benchmark to CSV")
    p.add_argument("--suite", choices=sorted(METHODS), default="maxcut")
    p.add_argument("--n", default="200")
    p.add_argument("--d", default="8")
    p.add_argument("--delta", default="0.01")
    p.add_argument("--eps-grid", default="0.1")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--resume", action="store_true")
    p.add_argument("-o", "--output")
    p.add_argument("--config")
    p.set_defaults(func=cmd_bench)
    return parser


def _parse(parser, argv):
    """Parse argv; keys of a --config JSON file become subcommand defaults (flags still win)."""
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, rest = pre.parse_known_args(argv)
    choices = parser._subparsers._group_actions[0].choices
    command = next((a for a in rest if not a.startswith("-")), None)
    if known.config and command in choices:
        path = Path(known.config)
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        try:
            conf = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise InputError(f"malformed config: {exc}") from exc
        if not isinstance(conf, dict):
            raise InputError("config must be a JSON object")
        sp = choices[command]
        known_keys = {a.dest for a in sp._actions} - {"help", "config"}
        unknown = set(conf) - known_keys
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        sp.set_defaults(**conf)
        for a in sp._actions:
            if a.dest in conf:
                a.required = False
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _parse(parser, argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
        return args.func(args)
    except SsetkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except SystemExit as exc:
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
