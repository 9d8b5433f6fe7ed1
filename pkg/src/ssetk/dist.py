"""Finite distributions, divergences, collection quantization and correlated sampling."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import DistributionError, InputError, ParameterError, SamplingError
from .graph import RegularGraph
from .rng import derive_rng
from .spectral import quantize_vector

NORM_TOL = 1e-12
STREAM_CAP = 1_000_000


@dataclass(frozen=True, eq=False)
class PseudoDistribution:
    weights: np.ndarray
    outcomes: Optional[tuple] = None

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).ravel()
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise DistributionError("weights must be finite and nonnegative")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        if self.outcomes is not None and len(self.outcomes) != w.size:
            raise DistributionError("outcome labels do not match the weights")

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> "Distribution":
        if self.mass <= 0:
            raise DistributionError("cannot normalize zero mass")
        return Distribution(self.weights / self.mass, self.outcomes)


class Distribution(PseudoDistribution):
    def __post_init__(self):
        super().__post_init__()
        if abs(self.weights.sum() - 1.0) > NORM_TOL * max(1, self.weights.size):
            raise DistributionError(f"weights sum to {self.weights.sum()!r}, not 1")


def _w(p) -> np.ndarray:
    return p.weights if isinstance(p, PseudoDistribution) else np.asarray(p, dtype=float)


def _same_shape(p, q):
    a, b = _w(p), _w(q)
    if a.shape != b.shape:
        raise DistributionError("distributions live on different outcome sets")
    return a, b


def kl_divergence(p, q, base: float = 2.0) -> float:
    """KL(p || q); +inf when p puts mass where q has none.  Bits by default."""
    a, b = _same_shape(p, q)
    s = a > 0
    if np.any(b[s] == 0):
        return math.inf
    with np.errstate(over="ignore", divide="ignore"):
        return float(np.sum(a[s] * np.log(a[s] / b[s])) / math.log(base))


def kl_nats(p, q) -> float:
    return kl_divergence(p, q, base=math.e)


def hellinger(p, q) -> float:
    a, b = _same_shape(p, q)
    return math.sqrt(0.5 * float(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2)))


def hellinger2(p, q) -> float:
    a, b = _same_shape(p, q)
    return 0.5 * float(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2))


def statistical_distance(p, q) -> float:
    a, b = _same_shape(p, q)
    return 0.5 * float(np.abs(a - b).sum())


# --------------------------------------------------------------------------
# Collection quantization


@dataclass(frozen=True, eq=False)
class QuantizedCollection:
    weights: np.ndarray  # (n, |Omega|) pseudo-distribution per vertex
    source: np.ndarray  # (n, |Omega|) the input distributions
    eps: float
    level: float  # separation of distinct values per outcome (eps/2)
    cost_ratio: Optional[float]

    def __getitem__(self, v) -> PseudoDistribution:
        return PseudoDistribution(self.weights[v])

    def envelope_ok(self) -> bool:
        D, T = self.source, self.weights
        return bool(np.all((1 - self.eps) * D <= T) and np.all(T <= (1 + self.eps) * D))

    def separation_ok(self) -> bool:
        """Per outcome, distinct nonzero values differ by a factor of at least 1 + level."""
        for col in self.weights.T:
            vals = np.unique(col[col > 0])
            if vals.size > 1 and np.any(vals[1:] < (1 + self.level) * vals[:-1]):
                return False
        return True


def _edge_hell2(D: np.ndarray, edges: np.ndarray) -> np.ndarray:
    s = np.sqrt(D)
    return 0.5 * np.sum((s[edges[:, 0]] - s[edges[:, 1]]) ** 2, axis=1)


def quantize_collection(g: RegularGraph, dists, eps: float) -> QuantizedCollection:
    """Quantize the square roots of every outcome's weight vector and square back.

    Running the vector quantizer at eps/3 keeps each weight within a (1 +- eps)
    factor and separates distinct values by at least 1 + eps/2.
    """
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    D = _stack(dists)
    if D.shape[0] != g.n:
        raise DistributionError(f"{D.shape[0]} distributions for {g.n} vertices")
    T = np.zeros_like(D)
    for w in range(D.shape[1]):
        q = quantize_vector(np.sqrt(D[:, w]), eps / 3, g)
        T[:, w] = q.values ** 2
    cost = None
    if g.m:
        before = _edge_hell2(D, g.edges).mean()
        after = _edge_hell2(T, g.edges).mean()
        cost = float(after / before) if before > 0 else (0.0 if after == 0 else math.inf)
    qc = QuantizedCollection(T, D, eps, eps / 2, cost)
    if not qc.envelope_ok():
        raise DistributionError("quantized weights left the (1 +- eps) envelope")
    if not qc.separation_ok():
        raise DistributionError("quantized weights are not separated")
    return qc


def _stack(dists) -> np.ndarray:
    if isinstance(dists, np.ndarray):
        D = np.asarray(dists, dtype=float)
    else:
        rows = [_w(d) for d in dists]
        if len({r.shape for r in rows}) > 1:
            raise DistributionError("distributions have different outcome sets")
        D = np.stack(rows).astype(float)
    if D.ndim != 2 or np.any(D < 0):
        raise DistributionError("expected a nonnegative (vertices x outcomes) array")
    return D


# --------------------------------------------------------------------------
# Correlated sampling


class SharedStream:
    """Deterministic public randomness: pairs (w, r) uniform on Omega x [0, 1 + eps]."""

    def __init__(self, seed: int, size: int, eps: float, cap: int = STREAM_CAP, index: int = 0):
        self.rng = derive_rng(seed, "shared-stream", index)
        self.size = size
        self.top = 1.0 + eps
        self.cap = cap
        self.used = 0

    def take(self, k: int):
        if self.used + k > self.cap:
            raise SamplingError(f"shared stream exhausted after {self.cap} pairs")
        self.used += k
        w = self.rng.integers(self.size, size=k)
        r = self.rng.random(k) * self.top
        return w, r


def _check_envelope(pt, qt, eps):
    for x in (pt, qt):
        if np.any(x > 1 + eps) or not (1 - eps <= x.sum() <= 1 + eps):
            raise DistributionError("pseudo-distribution outside the (1 +- eps) envelope")


def correlated_sample(pt, qt, eps: float, stream: SharedStream, block: int = 64):
    """One protocol run: each party outputs the first stream element accepted by its weights."""
    a, b = _same_shape(pt, qt)
    _check_envelope(a, b, eps)
    pa = pb = None
    while pa is None or pb is None:
        w, r = stream.take(block)
        if pa is None:
            hit = np.flatnonzero(r <= a[w])
            if hit.size:
                pa = int(w[hit[0]])
        if pb is None:
            hit = np.flatnonzero(r <= b[w])
            if hit.size:
                pb = int(w[hit[0]])
    return pa, pb


def correlated_trials(pt, qt, eps: float, trials: int, seed: int, block: int = 64, cap: int = STREAM_CAP):
    """Many independent protocol runs at once; returns arrays of Alice's and Bob's outcomes."""
    a, b = _same_shape(pt, qt)
    _check_envelope(a, b, eps)
    rng = derive_rng(seed, "correlated-trials")
    k = a.size
    out_a = np.full(trials, -1, dtype=np.int64)
    out_b = np.full(trials, -1, dtype=np.int64)
    todo = np.arange(trials)
    used = 0
    while todo.size:
        if used + block > cap:
            raise SamplingError(f"shared stream exhausted after {cap} pairs")
        used += block
        w = rng.integers(k, size=(todo.size, block))
        r = rng.random((todo.size, block)) * (1 + eps)
        for out, wt in ((out_a, a), (out_b, b)):
            need = out[todo] < 0
            acc = r <= wt[w]
            first = np.argmax(acc, axis=1)
            got = need & acc[np.arange(todo.size), first]
            out[todo[got]] = w[got, first[got]]
        todo = todo[(out_a[todo] < 0) | (out_b[todo] < 0)]
    return out_a, out_b


def mismatch_ceiling(pt, qt) -> float:
    """Probability that the first stream element accepted by either party is accepted by only one.

    This bounds the mismatch rate from above; a later coincidental agreement
    can still occur.
    """
    a, b = _same_shape(pt, qt)
    return float(np.abs(a - b).sum() / np.maximum(a, b).sum())


def protocol_report(pt, qt, eps: float, trials: int, seed: int) -> dict:
    a, b = correlated_trials(pt, qt, eps, trials, seed)
    sd = statistical_distance(pt, qt)
    rate = float(np.mean(a != b))
    return {
        "sd": sd,
        "hellinger2": hellinger2(pt, qt),
        "mismatch_rate": rate,
        "mismatch_ceiling": mismatch_ceiling(pt, qt),
        "bound": 4 * sd,
        "trials": trials,
    }


# --------------------------------------------------------------------------
# Randomized searches for the transfer inequalities


def random_distribution(rng, k: int, concentration: float = 1.0) -> np.ndarray:
    p = rng.dirichlet(np.full(k, concentration))
    return np.maximum(p, 0)


def tilt_to_kl(p: np.ndarray, f: np.ndarray, eta: float, direction: float) -> np.ndarray:
    """Exponential tilt q ~ p * exp(direction * t * f) with the largest t keeping KL(p||q) <= eta (nats)."""
    def tilted(t):
        z = direction * t * f
        q = p * np.exp(z - z.max())
        return q / q.sum()

    lo, hi = 0.0, 1.0
    while kl_nats(p, tilted(hi)) <= eta and hi < 1e6:
        lo, hi = hi, hi * 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if kl_nats(p, tilted(mid)) <= eta:
            lo = mid
        else:
            hi = mid
    return tilted(lo)


def search_kl_hellinger(trials: int, seed: int, max_outcomes: int = 8) -> int:
    """Count triples violating 2 H(X,Y)^2 <= KL(Z||X) + KL(Z||Y) (nats)."""
    rng = derive_rng(seed, "search-b3")
    bad = 0
    for _ in range(trials):
        k = int(rng.integers(2, max_outcomes + 1))
        X, Y, Z = (random_distribution(rng, k, rng.choice([0.3, 1.0, 5.0])) for _ in range(3))
        if rng.random() < 0.3:  # near-optimal Z from the Lagrangian, sqrt(XY) normalized
            s = np.sqrt(X * Y)
            if s.sum() > 0:
                Z = s / s.sum()
        lhs = 2 * hellinger2(X, Y)
        rhs = kl_nats(Z, X) + kl_nats(Z, Y)
        if lhs > rhs + 1e-12:
            bad += 1
    return bad


def _push_mean(f: np.ndarray, p: np.ndarray, target: float, up: bool) -> np.ndarray:
    """Affinely shrink f toward its extreme value so that E_p f equals target."""
    m = float(p @ f)
    top = 1.0 if up else 0.0
    if (up and m >= target) or (not up and m <= target):
        return f
    lam = (top - target) / (top - m)
    return top - lam * (top - f)


def search_transfer(trials: int, seed: int, max_outcomes: int = 8):
    """Adversarial search for counterexamples to the event/expectation transfer bounds.

    For random P, functional f and eta <= 1/100, Q is the worst exponential
    tilt of P with KL(P||Q) <= eta (in both argument orders).  Returns the
    violation counts for the event, [0,1]-expectation and [0,2]-expectation
    statements.
    """
    rng = derive_rng(seed, "search-b4")
    viol = {"event": 0, "unit": 0, "double": 0}
    for _ in range(trials):
        k = int(rng.integers(2, max_outcomes + 1))
        eta = float(10 ** rng.uniform(-4, -2))
        P = random_distribution(rng, k, rng.choice([0.3, 1.0, 5.0]))
        # events: E is a subset, f its indicator; [0,1] and [0,2] functionals are random
        E = (rng.random(k) < 0.7).astype(float)
        E[int(rng.integers(k))] = 1.0
        f1 = rng.random(k)
        f2 = 2 * rng.random(k)
        for swap in (False, True):
            # event: force P(E) >= 1 - eta by moving mass onto E
            PE = P.copy()
            if PE @ E < 1 - eta:
                inE = E > 0
                PE[inE] *= (1 - eta) / PE[inE].sum()
                PE[~inE] *= eta / max(PE[~inE].sum(), 1e-300) if np.any(~inE) else 0
            Q = _tilted_pair(PE, E, eta, -1.0, swap)
            if Q @ E < 1 - 10 * eta - 1e-12:
                viol["event"] += 1
            g = _push_mean(f1, P, 1 - eta, up=True)
            Q = _tilted_pair(P, g, eta, -1.0, swap)
            if Q @ g < 1 - 10 * eta - 1e-12:
                viol["unit"] += 1
            h = _push_mean(f2, P, eta, up=False)
            Q = _tilted_pair(P, h, eta, 1.0, swap)
            if Q @ h > 20 * eta + 1e-12:
                viol["double"] += 1
    return viol


def _tilted_pair(P, f, eta, direction, swap):
    """With swap=False: Q with KL(P||Q) <= eta.  With swap=True: Q with KL(Q||P) <= eta."""
    if not swap:
        return tilt_to_kl(P, f, eta, direction)
    # tilt Q from P, but measure KL(Q || P)
    def tilted(t):
        z = direction * t * f
        q = P * np.exp(z - z.max())
        return q / q.sum()

    lo, hi = 0.0, 1.0
    while kl_nats(tilted(hi), P) <= eta and hi < 1e6:
        lo, hi = hi, hi * 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if kl_nats(tilted(mid), P) <= eta:
            lo = mid
        else:
            hi = mid
    return tilted(lo)


def search_hellinger_sd(g: RegularGraph, trials: int, seed: int, eps: float, outcomes: int = 6) -> tuple[int, int]:
    """Quantize random smooth collections and test SD <= (10/level) H^2 on all edge pairs.

    Returns (pairs checked, violations).
    """
    rng = derive_rng(seed, "search-45")
    checked = bad = 0
    while checked < trials:
        base = random_distribution(rng, outcomes)
        noise = rng.random((g.n, outcomes)) ** 3
        D = base[None, :] * np.exp(rng.normal(0, 0.3, (g.n, outcomes))) + 1e-3 * noise
        D /= D.sum(axis=1, keepdims=True)
        qc = quantize_collection(g, D, eps)
        T = qc.weights
        for u, v in g.edges:
            sd = statistical_distance(T[u], T[v])
            h2 = hellinger2(T[u], T[v])
            if sd > (10 / qc.level) * h2 + 1e-15:
                bad += 1
            checked += 1
            if checked >= trials:
                break
    return checked, bad


# --------------------------------------------------------------------------
# Text format: line 1 |Omega|, then "outcome weight" lines; a file may hold several blocks.


def parse_distributions(text: str) -> list[Distribution]:
    rows = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    rows = [r for r in rows if r]
    out = []
    i = 0
    try:
        while i < len(rows):
            k = int(rows[i])
            block = [rows[i + 1 + j].split() for j in range(k)]
            labels = tuple(b[0] for b in block)
            weights = np.array([float(b[1]) for b in block])
            out.append(Distribution(weights / weights.sum() if weights.sum() > 0 else weights, labels))
            i += k + 1
    except (ValueError, IndexError) as exc:
        raise InputError(f"malformed distribution file: {exc}") from exc
    if not out:
        raise InputError("no distributions found")
    labels = out[0].outcomes
    for d in out[1:]:
        if d.outcomes != labels:
            raise DistributionError("distributions are over different outcome sets")
    return out


def load_distributions(path) -> list[Distribution]:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"distribution file not found: {p}")
    return parse_distributions(p.read_text())


def format_distributions(dists: Sequence[PseudoDistribution]) -> str:
    lines = []
    for d in dists:
        labels = d.outcomes or tuple(str(i) for i in range(d.weights.size))
        lines.append(str(d.weights.size))
        lines.extend(f"{lab} {w!r}" for lab, w in zip(labels, d.weights.tolist()))
    return "\n".join(lines) + "\n"
