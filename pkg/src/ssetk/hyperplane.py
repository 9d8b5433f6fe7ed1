"""Hyperplane rounding conditioned on avoiding the heavy skeleton, and the full Max-Cut pipeline."""

from __future__ import annotations

import hashlib
import json
import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .errors import ConditioningError
from .graph import RegularGraph, SseParams, VertexSet, cut_value, boundary_size
from .projection import project_to_r3
from .rng import derive_rng
from .sdp import SdpConfig, VectorSolution, sdp_objective, solve_maxcut_sdp
from .softround import SeparationReport, round_to_boundary, round_to_corners, separation_check
from .sphere import (
    PartitionProfile,
    SphereTriangulation,
    arc_hits_plane,
    build_triangulation,
    compute_profile,
    planes_hit_skeleton,
)


@dataclass(frozen=True)
class Hyperplane:
    normal: np.ndarray
    seed: int
    attempts: int

    @property
    def acceptance_rate(self) -> float:
        return 1.0 / self.attempts


def random_unit(rng, dim: int = 3) -> np.ndarray:
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def skeleton_hit(profile: PartitionProfile, tri: SphereTriangulation, normal: np.ndarray) -> bool:
    """Direct test of the plane against every skeleton arc."""
    if profile.skeleton.size == 0:
        return False
    ends = tri.arc_endpoints(profile.skeleton)
    return bool(np.any(arc_hits_plane(ends[:, 0], ends[:, 1], normal)))


def sample_conditioned_hyperplane(profile, tri, seed: int, max_attempts: int = 64, index: int = 0,
                                  batch: int = 8) -> Hyperplane:
    """Rejection-sample a uniform plane through the origin that misses every skeleton arc."""
    rng = derive_rng(seed, "hyperplane", index)
    tried = 0
    while tried < max_attempts:
        k = min(batch, max_attempts - tried)
        X = rng.standard_normal((k, 3))
        X /= np.linalg.norm(X, axis=1, keepdims=True)
        hit = planes_hit_skeleton(profile, tri, X)
        ok = np.flatnonzero(~hit)
        if ok.size:
            return Hyperplane(X[ok[0]], seed, tried + int(ok[0]) + 1)
        tried += k
    raise ConditioningError(f"no admissible hyperplane in {max_attempts} attempts", rejection_rate=1.0)


def extract_cut(sol: VectorSolution, h) -> VertexSet:
    normal = h.normal if isinstance(h, Hyperplane) else np.asarray(h, dtype=float)
    s = sol.vectors @ normal
    return VertexSet.from_mask(s >= 0, sol.n)


def measure_acceptance(profile, tri, seed: int, trials: int = 1000) -> float:
    """Fraction of uniform planes that miss the skeleton."""
    rng = derive_rng(seed, "acceptance")
    X = rng.standard_normal((trials, 3))
    X /= np.linalg.norm(X, axis=1, keepdims=True)
    return float(1.0 - planes_hit_skeleton(profile, tri, X).mean())


def gw_baseline(g: RegularGraph, sol: VectorSolution, seed: int, trials: int = 32):
    """Random-hyperplane rounding of a (high-dimensional) solution: (best cut, best value, mean value)."""
    rng = derive_rng(seed, "gw-baseline")
    best, best_val, vals = None, -1.0, []
    for _ in range(trials):
        x = rng.standard_normal(sol.dim)
        s = VertexSet.from_mask(sol.vectors @ x >= 0, g.n)
        v = cut_value(g, s)
        vals.append(v)
        if v > best_val:
            best, best_val = s, v
    return best, best_val, float(np.mean(vals))


@dataclass(frozen=True)
class PipelineConfig:
    sdp: SdpConfig = field(default_factory=SdpConfig)
    K: float = 4.0
    retries: int = 20
    trials: int = 32
    max_attempts: int = 64
    seed: int = 0
    acceptance_trials: int = 1000

    def to_dict(self) -> dict:
        d = asdict(self)
        return d

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class PipelineReport:
    cut: VertexSet
    value: float
    cut_edges: int
    baseline_value: float
    baseline_mean: float
    delta_trace: tuple  # objective after SDP, projection, boundary pass, corner pass
    acceptance_rate: float
    conditioned: bool
    mean_conditioned_value: float
    deficit_constant: Optional[float]
    separation: Optional[SeparationReport]
    level: int
    heavy: int
    heavy_prime: int
    skeleton_arcs: int
    c_point: int
    projection_objectives: tuple
    sdp_converged: bool
    traces: tuple
    seed: int

    @property
    def stage_ratios(self) -> dict:
        d1, d2, d3, d4 = self.delta_trace

        def r(a, b):
            return b / a if a > 0 else (1.0 if b == 0 else math.inf)

        return {"projection": r(d1, d2), "boundary": r(d2, d3), "corners": r(d3, d4)}

    def to_dict(self) -> dict:
        sep = self.separation
        return {
            "value": self.value,
            "cut_edges": self.cut_edges,
            "baseline_value": self.baseline_value,
            "baseline_mean": self.baseline_mean,
            "delta_trace": list(self.delta_trace),
            "stage_ratios": self.stage_ratios,
            "acceptance_rate": self.acceptance_rate,
            "conditioned": self.conditioned,
            "mean_conditioned_value": self.mean_conditioned_value,
            "deficit_constant": self.deficit_constant,
            "separation": None if sep is None else {
                "checked": sep.checked, "zero": sep.zero, "protected": sep.protected,
                "c": None if math.isinf(sep.c) else sep.c,
            },
            "partition": {
                "level": self.level, "heavy": self.heavy, "heavy_prime": self.heavy_prime,
                "skeleton_arcs": self.skeleton_arcs, "max_cells_near_point": self.c_point,
            },
            "sdp_converged": self.sdp_converged,
            "seed": self.seed,
            "cut": list(self.cut.members),
        }


def run_maxcut_pipeline(g: RegularGraph, params: SseParams, config: PipelineConfig = PipelineConfig(),
                        check_separation: bool = True) -> PipelineReport:
    """SDP, projection to R^3, the two soft-rounding passes, then the best conditioned hyperplane."""
    seed = config.seed
    sdp_cfg = SdpConfig(config.sdp.rank, config.sdp.tol, config.sdp.max_sweeps, seed)
    sol = solve_maxcut_sdp(g, sdp_cfg)
    d1 = sdp_objective(sol, g)
    _, base_val, base_mean = gw_baseline(g, sol, seed, config.trials)

    z, proj = project_to_r3(sol, g, seed, config.retries)
    d2 = sdp_objective(z, g)
    tri = build_triangulation(params.eps, config.K)
    prof = compute_profile(z, tri, params.eps)
    z1, tr1 = round_to_boundary(z, prof, tri, g)
    d3 = sdp_objective(z1, g)
    z2, tr2 = round_to_corners(z1, prof, tri, g)
    d4 = sdp_objective(z2, g)
    sep = separation_check(z2, prof, tri, g) if check_separation else None

    best, best_val, vals = None, -1.0, []
    conditioned = True
    for t in range(config.trials):
        try:
            h = sample_conditioned_hyperplane(prof, tri, seed, config.max_attempts, index=t)
        except ConditioningError:
            if conditioned:
                warnings.warn("conditioned hyperplane sampling failed; using unconditioned planes", RuntimeWarning, stacklevel=2)
            conditioned = False
            h = Hyperplane(random_unit(derive_rng(seed, "hyperplane-fallback", t)), seed, config.max_attempts)
        s = extract_cut(z2, h)
        v = cut_value(g, s)
        vals.append(v)
        if v > best_val:
            best, best_val = s, v
    acc = measure_acceptance(prof, tri, seed, config.acceptance_trials)
    mean_val = float(np.mean(vals))
    deficit_c = (1 - mean_val) * params.eps / d4 if d4 > 0 else None
    return PipelineReport(
        best, best_val, boundary_size(g, best), base_val, base_mean, (d1, d2, d3, d4), acc, conditioned,
        mean_val, deficit_c, sep, tri.level, int(prof.heavy.size), int(prof.heavy_prime.size),
        int(prof.skeleton.size), prof.max_point_cells, proj.objectives, sol.converged, (tr1, tr2), seed,
    )
