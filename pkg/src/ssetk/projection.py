"""Random Gaussian projection of a vector solution to three dimensions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, ProjectionError
from .graph import RegularGraph
from .rng import derive_rng
from .sdp import VectorSolution, sdp_objective


@dataclass(frozen=True, eq=False)
class Projection3:
    directions: np.ndarray  # (dim, 3): columns g1, g2, g3
    seed: int
    index: int  # which of the candidate draws was kept
    objectives: tuple = ()  # objective of every usable candidate, in draw order
    resampled: int = 0  # draws discarded because some image was (numerically) zero

    @property
    def g1(self):
        return self.directions[:, 0]

    @property
    def g2(self):
        return self.directions[:, 1]

    @property
    def g3(self):
        return self.directions[:, 2]


def apply_projection(sol: VectorSolution, G: np.ndarray, min_norm: float = 1e-12):
    """Images normalized to the unit sphere, or None if some image is too short."""
    Y = sol.vectors @ G
    norms = np.linalg.norm(Y, axis=1)
    if norms.size and norms.min() < min_norm:
        return None
    return Y / norms[:, None]


def project_to_r3(sol: VectorSolution, g: RegularGraph, seed: int = 0, retries: int = 20):
    """Best of ``retries`` Gaussian projections to R^3 by objective on ``g``.

    Returns ``(solution, projection)``.  Normalization is odd, so the
    antipodal structure carries over automatically.
    """
    if retries < 1:
        raise ParameterError("retries must be positive")
    best = None
    objectives = []
    resampled = 0
    for i in range(retries):
        G = derive_rng(seed, "project-r3", i).standard_normal((sol.dim, 3))
        Z = apply_projection(sol, G)
        if Z is None:
            resampled += 1
            continue
        cand = VectorSolution(Z)
        obj = sdp_objective(cand, g)
        objectives.append(obj)
        if best is None or obj < best[0]:
            best = (obj, cand, G, i)
    if best is None:
        raise ProjectionError(f"all {retries} projections produced a zero image")
    _, cand, G, i = best
    return cand, Projection3(G, seed, i, tuple(objectives), resampled)
