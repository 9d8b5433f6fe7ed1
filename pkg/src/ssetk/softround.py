"""The two preprocessing passes applied to light-cell vectors before hyperplane rounding.

Pass 1 slides each light-cell vector away from its cell center onto the
cell boundary.  Pass 2 snaps vectors lying on an arc between two light
cells to the nearer arc endpoint.  Heavy-cell vectors never move.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .graph import RegularGraph
from .sdp import VectorSolution, sdp_objective
from .sphere import PartitionProfile, SphereTriangulation, _normalize


@dataclass(frozen=True, eq=False)
class SoftRoundTrace:
    pass_name: str
    objective_before: float
    objective_after: float
    cells: np.ndarray
    cost_before: np.ndarray
    cost_after: np.ndarray
    moved: int

    @property
    def ratio(self) -> float:
        if self.objective_before > 0:
            return self.objective_after / self.objective_before
        return 1.0 if self.objective_after == 0 else math.inf

    def rows(self):
        for c, b, a in zip(self.cells.tolist(), self.cost_before.tolist(), self.cost_after.tolist()):
            yield (self.pass_name, c, b, a)


def write_trace_csv(traces, fh=None) -> str:
    buf = fh if fh is not None else io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["pass", "cell", "cost_before", "cost_after"])
    for tr in traces:
        for p, c, b, a in tr.rows():
            w.writerow([p, c, repr(float(b)), repr(float(a))])
    return buf.getvalue() if fh is None else ""


def _vertex_costs(Z: np.ndarray, g: RegularGraph) -> np.ndarray:
    """Per vertex u: sum over incident edges of |z_u + z_v|^2."""
    e = g.edges
    s = Z[e[:, 0]] + Z[e[:, 1]]
    w = np.einsum("ij,ij->i", s, s)
    return np.bincount(e[:, 0], weights=w, minlength=g.n) + np.bincount(e[:, 1], weights=w, minlength=g.n)


def _cell_costs(profile: PartitionProfile, cells: np.ndarray, vcost: np.ndarray, t: int) -> np.ndarray:
    ic, iv = profile.incidence
    tot = np.bincount(ic, weights=vcost[iv], minlength=t)
    return tot[cells]


def _trace(name, g, profile, tri, before, after, moved_mask):
    cells = np.unique(profile.cell_of[moved_mask]) if np.any(moved_mask) else np.zeros(0, dtype=np.int64)
    cb = _cell_costs(profile, cells, _vertex_costs(before, g), tri.t)
    ca = _cell_costs(profile, cells, _vertex_costs(after, g), tri.t)
    return SoftRoundTrace(
        name,
        sdp_objective(VectorSolution(before), g),
        sdp_objective(VectorSolution(after), g),
        cells, cb, ca, int(np.count_nonzero(moved_mask)),
    )


def _lex_pick(P: np.ndarray, mirror: np.ndarray) -> np.ndarray:
    """Index of the lexicographically smallest row of each (k,3) block; mirrored blocks compare negated rows."""
    Q = np.where(mirror[:, None, None], -P, P)
    out = np.empty(P.shape[0], dtype=np.int64)
    for r in range(P.shape[0]):
        out[r] = int(np.lexsort(Q[r].T[::-1])[0])
    return out


def _quad_2d(tri: SphereTriangulation, cells: np.ndarray):
    base = tri.base_of[cells]
    C = tri.corners[cells]
    Q = np.stack([tri.gnomonic(base, C[:, i]) for i in range(4)], axis=1)
    c = tri.gnomonic(base, tri.centers[cells])
    return base, Q, c


def round_to_boundary(sol3: VectorSolution, profile: PartitionProfile, tri: SphereTriangulation, g: RegularGraph):
    """Move every light-cell vector along the ray from its cell center to the nearer boundary crossing."""
    Z = np.array(sol3.vectors)
    move = profile.light_vertices()
    idx = np.flatnonzero(move)
    if idx.size:
        cells = profile.cell_of[idx]
        base, Q, c = _quad_2d(tri, cells)
        z = tri.gnomonic(base, Z[idx])
        d = z - c
        t_hi = np.full(idx.size, np.inf)
        t_lo = np.full(idx.size, -np.inf)
        orient = np.sign(_cross2(Q[:, 1] - Q[:, 0], Q[:, 2] - Q[:, 1]))
        for i in range(4):
            a, b = Q[:, i], Q[:, (i + 1) % 4]
            e = b - a
            nu = orient[:, None] * np.stack([-e[:, 1], e[:, 0]], axis=1)  # inward normal
            off = np.einsum("ij,ij->i", nu, c - a)
            nd = np.einsum("ij,ij->i", nu, d)
            with np.errstate(divide="ignore", invalid="ignore"):
                tt = off / -nd
            t_hi = np.where(nd < 0, np.minimum(t_hi, tt), t_hi)
            t_lo = np.where(nd > 0, np.maximum(t_lo, tt), t_lo)
        at_center = np.einsum("ij,ij->i", d, d) == 0
        pick = np.where(np.abs(t_hi - 1) <= np.abs(t_lo - 1), t_hi, t_lo)
        pick = np.where(at_center, 0.0, pick)
        w = c + pick[:, None] * d
        newz = tri.from_gnomonic(base, w)
        if np.any(at_center):
            k = np.flatnonzero(at_center)
            Ck = tri.corners[cells[k]]
            j = _lex_pick(Ck, base[k] % 2 == 1)
            newz[k] = Ck[np.arange(k.size), j]
        Z[idx] = _normalize(newz)
    out = VectorSolution(Z)
    return out, _trace("boundary", g, profile, tri, sol3.vectors, Z, move)


def _cross2(a, b):
    return a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]


def boundary_side(tri: SphereTriangulation, cells: np.ndarray, Z: np.ndarray) -> np.ndarray:
    """Index (0..3) of the cell side nearest to each point, measured in the gnomonic plane."""
    base, Q, _ = _quad_2d(tri, cells)
    z = tri.gnomonic(base, Z)
    dist = np.empty((cells.size, 4))
    for i in range(4):
        a, b = Q[:, i], Q[:, (i + 1) % 4]
        e = b - a
        dist[:, i] = np.abs(_cross2(e, z - a)) / np.linalg.norm(e, axis=1)
    return np.argmin(dist, axis=1)


def round_to_corners(sol3: VectorSolution, profile: PartitionProfile, tri: SphereTriangulation, g: RegularGraph):
    """Snap vectors on arcs between two light cells to the arc endpoint on their side of the midpoint."""
    Z = np.array(sol3.vectors)
    cand = np.flatnonzero(profile.light_vertices())
    moved = np.zeros(Z.shape[0], dtype=bool)
    if cand.size:
        cells = profile.cell_of[cand]
        side = boundary_side(tri, cells, Z[cand])
        arc = tri.face_arcs[cells, side]
        both_light = profile.light[tri.arc_faces[arc]].all(axis=1)
        k = np.flatnonzero(both_light)
        if k.size:
            u = cand[k]
            a = tri.corners[cells[k], side[k]]
            b = tri.corners[cells[k], (side[k] + 1) % 4]
            da = np.linalg.norm(Z[u] - a, axis=1)
            db = np.linalg.norm(Z[u] - b, axis=1)
            target = np.where((da < db)[:, None], a, b)
            tie = np.flatnonzero(da == db)
            if tie.size:
                pair = np.stack([a[tie], b[tie]], axis=1)
                j = _lex_pick(pair, tri.base_of[cells[k[tie]]] % 2 == 1)
                target[tie] = pair[np.arange(tie.size), j]
            moved[u] = np.any(target != Z[u], axis=1)
            Z[u] = target
    out = VectorSolution(Z)
    return out, _trace("corners", g, profile, tri, sol3.vectors, Z, moved)


def _closed_cells(tri: SphereTriangulation, p: np.ndarray, allowed: np.ndarray, tol: float = 1e-9) -> set:
    f = tri.locate_one(p)
    near = tri.vertex_neighbours(f)
    near = near[tri.contains(near, np.broadcast_to(p, (near.size, 3)), tol)]
    return {int(c) for c in near if allowed[c]}


@dataclass(frozen=True)
class SeparationReport:
    checked: int  # Z1-incident edges
    zero: int  # pairs at distance 0
    protected: int  # pairs excused because both points sit on adjacent heavy-side cells
    c: float  # min distance / eps over the remaining pairs (inf when there are none)

    @property
    def ok(self) -> bool:
        return self.c > 0


def separation_check(sol: VectorSolution, profile: PartitionProfile, tri: SphereTriangulation, g: RegularGraph) -> SeparationReport:
    """Distances |z_u + z_v| over edges touching a light-cell vertex: zero or bounded below.

    Pairs where both z_u and -z_v lie in closed heavy/heavy' cells (or their
    antipodes) that coincide or share a mesh vertex are reported as protected.
    """
    Z = sol.vectors
    z1 = profile.light_vertices()
    e = g.edges
    sel = z1[e[:, 0]] | z1[e[:, 1]]
    E = e[sel]
    dist = np.linalg.norm(Z[E[:, 0]] + Z[E[:, 1]], axis=1)
    region = profile.region
    allowed = np.zeros(tri.t, dtype=bool)
    allowed[region] = True
    allowed[tri.antipode(region)] = True
    zero = int(np.count_nonzero(dist == 0))
    pos = np.flatnonzero(dist > 0)
    protected = 0
    c = math.inf
    cache: dict = {}

    def cells_of(p):
        key = p.tobytes()
        if key not in cache:
            cache[key] = _closed_cells(tri, p, allowed)
        return cache[key]

    for i in pos[np.argsort(dist[pos], kind="stable")]:
        u, v = E[i]
        A = cells_of(Z[u])
        B = cells_of(-Z[v]) if A else set()
        if A and B and _adjacent(tri, A, B):
            protected += 1
            continue
        c = min(c, float(dist[i]) / profile.eps)
    return SeparationReport(int(E.shape[0]), zero, protected, c)


def _adjacent(tri, A: set, B: set) -> bool:
    if A & B:
        return True
    vb = {int(v) for f in B for v in tri.faces[f]}
    return any(int(v) in vb for f in A for v in tri.faces[f])
