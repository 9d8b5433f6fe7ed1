"""Refined-cube partition of the unit sphere.

The six faces of the cube are projected to the sphere and refined
recursively: each spherical quad is split into four by joining the
midpoints of opposite sides with great-circle arcs.  All cells are convex
spherical quads whose sides are great-circle arcs, so inside one base face
the partition is a straight-edged quad mesh in that face's gnomonic plane.

Face ids are ``base * 4**m + path`` where ``path`` holds one base-4 digit
per level (most significant first).  Base faces are ordered
(+x, -x, +y, -y, +z, -z) and the corners of ``-F`` are the negated corners of
``F``, so the antipodal face of ``f`` is ``f ^ 4**m``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from .errors import ParameterError, ResolutionError

TIE_TOL = 1e-12
MAX_LEVEL = 12


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _other_axes(k: int) -> tuple[int, int]:
    return tuple(a for a in range(3) if a != k)


def _base_corners() -> np.ndarray:
    out = np.empty((6, 4, 3))
    square = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
    for k in range(3):
        i, j = _other_axes(k)
        for c, (a, b) in enumerate(square):
            p = np.zeros(3)
            p[k], p[i], p[j] = 1.0, a, b
            out[2 * k, c] = p
            out[2 * k + 1, c] = -p
    return out / math.sqrt(3.0)


def _subdivide(C: np.ndarray):
    """Split quads ``C`` (N,4,3); returns children (4N,4,3) and the two oriented split normals."""
    c0, c1, c2, c3 = C[:, 0], C[:, 1], C[:, 2], C[:, 3]
    m01 = _normalize(c0 + c1)
    m12 = _normalize(c1 + c2)
    m23 = _normalize(c2 + c3)
    m30 = _normalize(c3 + c0)
    nA = np.cross(m01, m23)
    nB = np.cross(m12, m30)
    ctr = _normalize(np.cross(nA, nB))
    flip = np.einsum("ij,ij->i", ctr, C.sum(axis=1)) < 0
    ctr[flip] = -ctr[flip]
    # orient both split normals toward corner 0
    nA = _normalize(nA)
    nB = _normalize(nB)
    nA[np.einsum("ij,ij->i", nA, c0) < 0] *= -1
    nB[np.einsum("ij,ij->i", nB, c0) < 0] *= -1
    # child index = 2b + a; a = side of the A split (0 = corner-0 side), b likewise for B
    kids = np.stack(
        [
            np.stack([c0, m01, ctr, m30], axis=1),
            np.stack([m01, c1, m12, ctr], axis=1),
            np.stack([m30, ctr, m23, c3], axis=1),
            np.stack([ctr, m12, c2, m23], axis=1),
        ],
        axis=1,
    )
    return kids.reshape(-1, 4, 3), nA, nB


def _arc_lengths(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    # atan2 form stays accurate for short arcs
    cr = np.linalg.norm(np.cross(a, b), axis=-1)
    dt = np.einsum("...i,...i->...", a, b)
    return np.arctan2(cr, dt)


def _perimeters(C: np.ndarray) -> np.ndarray:
    return sum(_arc_lengths(C[:, i], C[:, (i + 1) % 4]) for i in range(4))


_PERIMETERS: list = []  # measured max perimeter per level, filled on demand


def level_max_perimeter(m: int) -> float:
    """Largest cell perimeter (radians) at refinement level m."""
    if not _PERIMETERS:
        _PERIMETERS.append(float(_perimeters(_base_corners()).max()))
    if m >= len(_PERIMETERS):
        if m in _TRI_CACHE:
            return _TRI_CACHE[m].perimeter_history[m]
        C = _base_corners()
        for k in range(1, m + 1):
            C, _, _ = _subdivide(C)
            if k >= len(_PERIMETERS):
                _PERIMETERS.append(float(_perimeters(C).max()))
    return _PERIMETERS[m]


@dataclass(frozen=True, eq=False)
class SphereTriangulation:
    level: int
    vertices: np.ndarray  # (V, 3)
    faces: np.ndarray  # (t, 4) vertex ids in cyclic order
    centers: np.ndarray  # (t, 3) normalized corner centroids
    split_normals: tuple = field(repr=False, default=())  # per level < m: (nA, nB) arrays
    perimeter_history: tuple = ()

    @property
    def t(self) -> int:
        return self.faces.shape[0]

    @property
    def stride(self) -> int:
        return 4 ** self.level

    @cached_property
    def corners(self) -> np.ndarray:
        return self.vertices[self.faces]

    @cached_property
    def perimeters(self) -> np.ndarray:
        return _perimeters(self.corners)

    @property
    def max_perimeter(self) -> float:
        return float(self.perimeters.max())

    @cached_property
    def base_of(self) -> np.ndarray:
        return np.arange(self.t) // self.stride

    def antipode(self, f):
        return np.bitwise_xor(f, self.stride)

    # -- arcs and adjacency -------------------------------------------------

    @cached_property
    def _arc_data(self):
        a = self.faces
        pairs = np.stack([a, np.roll(a, -1, axis=1)], axis=2).reshape(-1, 2)
        pairs = np.sort(pairs, axis=1)
        arcs, inv = np.unique(pairs, axis=0, return_inverse=True)
        inv = inv.reshape(self.t, 4)
        order = np.argsort(inv.ravel(), kind="stable")
        counts = np.bincount(inv.ravel(), minlength=arcs.shape[0])
        if np.any(counts != 2):
            raise ResolutionError("mesh is not closed: some arc does not border exactly two cells")
        arc_faces = (order // 4).reshape(-1, 2)
        return arcs, inv, arc_faces

    @property
    def arcs(self) -> np.ndarray:
        """(A, 2) vertex ids of every cell side."""
        return self._arc_data[0]

    @property
    def face_arcs(self) -> np.ndarray:
        """(t, 4) arc id of side i (corner i to corner i+1) of each cell."""
        return self._arc_data[1]

    @property
    def arc_faces(self) -> np.ndarray:
        """(A, 2) the two cells bordering each arc."""
        return self._arc_data[2]

    def arc_endpoints(self, arc_ids) -> np.ndarray:
        return self.vertices[self.arcs[np.asarray(arc_ids, dtype=np.int64)]]

    @cached_property
    def vertex_faces(self) -> tuple[np.ndarray, np.ndarray]:
        """CSR (indptr, face ids) of the cells around each mesh vertex."""
        flat = self.faces.ravel()
        order = np.argsort(flat, kind="stable")
        indptr = np.zeros(self.vertices.shape[0] + 1, dtype=np.int64)
        np.cumsum(np.bincount(flat, minlength=self.vertices.shape[0]), out=indptr[1:])
        return indptr, order // 4

    def vertex_neighbours(self, f: int) -> np.ndarray:
        """Cells sharing at least one mesh vertex with cell ``f`` (including ``f``)."""
        indptr, fids = self.vertex_faces
        vs = self.faces[f]
        return np.unique(np.concatenate([fids[indptr[v]:indptr[v + 1]] for v in vs]))

    def arc_neighbours(self, f: int) -> np.ndarray:
        af = self.arc_faces[self.face_arcs[f]]
        return np.where(af[:, 0] == f, af[:, 1], af[:, 0])

    # -- geometry -----------------------------------------------------------

    @cached_property
    def side_normals(self) -> np.ndarray:
        """(t, 4, 3) unit normals of the side great circles, pointing into the cell."""
        C = self.corners
        N = _normalize(np.cross(C, np.roll(C, -1, axis=1)))
        s = np.einsum("tij,tj->ti", N, self.centers)
        return N * np.where(s < 0, -1.0, 1.0)[:, :, None]

    @cached_property
    def circumradius(self) -> float:
        """Largest chord distance from a cell center to its corners."""
        d = np.linalg.norm(self.corners - self.centers[:, None, :], axis=2)
        return float(d.max())

    @cached_property
    def kdtree(self):
        from scipy.spatial import cKDTree

        return cKDTree(self.centers)

    def contains(self, f, p, tol: float = TIE_TOL) -> np.ndarray:
        """Closed point-in-cell predicate (vectorised over matching f, p)."""
        f = np.asarray(f)
        p = np.asarray(p, dtype=float)
        s = np.einsum("...ij,...j->...i", self.side_normals[f], p)
        return np.all(s >= -tol, axis=-1)

    def locate(self, points, tol: float = TIE_TOL) -> np.ndarray:
        """Cell id of each point; boundary ties go to the smallest containing id.

        Points whose first nonzero coordinate is negative are located through
        their antipode, so ``locate(-p) == antipode(locate(p))`` holds exactly.
        """
        P = np.atleast_2d(np.asarray(points, dtype=float)).copy()
        nzfirst = np.where(P[:, 0] != 0, P[:, 0], np.where(P[:, 1] != 0, P[:, 1], P[:, 2]))
        neg = nzfirst < 0
        P[neg] = -P[neg]
        A = np.abs(P)
        mx = A.max(axis=1)
        node = np.full(P.shape[0], 6, dtype=np.int64)
        for k in range(3):
            cand = np.where(P[:, k] >= 0, 2 * k, 2 * k + 1)
            ok = A[:, k] >= mx - tol
            node = np.where(ok & (cand < node), cand, node)
        for nA, nB in self.split_normals:
            a = (np.einsum("ij,ij->i", nA[node], P) < -tol).astype(np.int64)
            b = (np.einsum("ij,ij->i", nB[node], P) < -tol).astype(np.int64)
            node = node * 4 + 2 * b + a
        node[neg] ^= self.stride
        return node

    def locate_one(self, p) -> int:
        return int(self.locate(np.asarray(p, dtype=float)[None, :])[0])

    # -- gnomonic coordinates -----------------------------------------------

    def gnomonic(self, base, P) -> np.ndarray:
        """Coordinates of points P (N,3) in the tangent plane of their base cube faces."""
        base = np.asarray(base)
        P = np.asarray(P, dtype=float)
        k = base // 2
        s = np.where(base % 2 == 0, 1.0, -1.0)
        i = np.where(k == 0, 1, 0)
        j = np.where(k == 2, 1, 2)
        r = np.arange(P.shape[0])
        den = s * P[r, k]
        return np.stack([P[r, i] / den, P[r, j] / den], axis=1)

    def from_gnomonic(self, base, W) -> np.ndarray:
        base = np.asarray(base)
        W = np.asarray(W, dtype=float)
        k = base // 2
        s = np.where(base % 2 == 0, 1.0, -1.0)
        i = np.where(k == 0, 1, 0)
        j = np.where(k == 2, 1, 2)
        out = np.zeros((W.shape[0], 3))
        r = np.arange(W.shape[0])
        out[r, k] = s
        out[r, i] = W[:, 0]
        out[r, j] = W[:, 1]
        return _normalize(out)

    def export_mesh(self) -> str:
        lines = [f"v {x:.17g} {y:.17g} {z:.17g}" for x, y, z in self.vertices.tolist()]
        lines += [f"f {a} {b} {c} {d}" for a, b, c, d in self.faces.tolist()]
        return "\n".join(lines) + "\n"

    # -- neighbourhood constants ----------------------------------------------

    def cell_distance(self, f, h) -> np.ndarray:
        """Chord distance between closed cells (0 when they touch), vectorised over pairs."""
        f = np.asarray(f)
        h = np.asarray(h)
        Cf, Ch = self.corners[f], self.corners[h]
        touch = np.zeros(f.shape, dtype=bool)
        best = np.full(f.shape, np.inf)
        for c in range(4):
            touch |= self.contains(h, Cf[..., c, :], 1e-12) | self.contains(f, Ch[..., c, :], 1e-12)
            best = np.minimum(best, point_cell_distance(Cf[..., c, :], Ch))
            best = np.minimum(best, point_cell_distance(Ch[..., c, :], Cf))
        return np.where(touch, 0.0, best)

    def c_adj(self, eps: float, cells: Optional[np.ndarray] = None, chunk: int = 4096) -> int:
        """Largest number of cells within chord distance eps of a single cell.

        By the cube symmetry of the construction, scanning the cells of one
        base face is enough; ``cells`` overrides the scanned set.
        """
        if cells is None:
            cells = np.arange(self.stride)
        r = eps + 2 * self.circumradius
        best = 0
        for start in range(0, len(cells), chunk):
            blk = cells[start:start + chunk]
            cand = self.kdtree.query_ball_point(self.centers[blk], r)
            lens = np.fromiter((len(c) for c in cand), dtype=np.int64, count=len(blk))
            src = np.repeat(blk, lens)
            dst = np.concatenate([np.asarray(c, dtype=np.int64) for c in cand])
            within = self.cell_distance(src, dst) <= eps
            counts = np.bincount(np.repeat(np.arange(len(blk)), lens)[within], minlength=len(blk))
            best = max(best, int(counts.max()))
        return best


def point_cell_distance(q: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Chord distance from points q (...,3) to the boundary arcs of quads C (...,4,3)."""
    best = np.full(q.shape[:-1], np.inf)
    for i in range(4):
        a, b = C[..., i, :], C[..., (i + 1) % 4, :]
        best = np.minimum(best, point_arc_distance(q, a, b))
    return best


def point_arc_distance(q, a, b) -> np.ndarray:
    """Chord distance from unit points q to the minor great-circle arcs ab."""
    nrm = _normalize(np.cross(a, b))
    s = np.einsum("...i,...i->...", q, nrm)
    qp = q - s[..., None] * nrm
    in_arc = (np.einsum("...i,...i->...", np.cross(a, qp), nrm) >= 0) & (
        np.einsum("...i,...i->...", np.cross(qp, b), nrm) >= 0
    )
    in_arc &= np.linalg.norm(qp, axis=-1) > 0
    geo = np.arcsin(np.clip(np.abs(s), 0.0, 1.0))
    chord_in = 2 * np.sin(geo / 2)
    chord_end = np.minimum(np.linalg.norm(q - a, axis=-1), np.linalg.norm(q - b, axis=-1))
    return np.where(in_arc, np.minimum(chord_in, chord_end), chord_end)


_TRI_CACHE: dict = {}


def triangulation_at_level(m: int) -> SphereTriangulation:
    """The level-m refinement (6 * 4**m cells); cached."""
    if m < 0 or m > MAX_LEVEL:
        raise ResolutionError(f"level {m} outside 0..{MAX_LEVEL}")
    if m in _TRI_CACHE:
        return _TRI_CACHE[m]
    C = _base_corners()
    splits = []
    history = [float(_perimeters(C).max())]
    for _ in range(m):
        C, nA, nB = _subdivide(C)
        splits.append((nA, nB))
        history.append(float(_perimeters(C).max()))
    flat = C.reshape(-1, 3)
    verts, inv = np.unique(flat, axis=0, return_inverse=True)
    faces = inv.reshape(-1, 4).astype(np.int64)
    centers = _normalize(C.sum(axis=1))
    tri = SphereTriangulation(m, verts, faces, centers, tuple(splits), tuple(history))
    _TRI_CACHE[m] = tri
    while len(_PERIMETERS) < len(history):
        _PERIMETERS.append(history[len(_PERIMETERS)])
    return tri


def level_for_perimeter(target: float, max_level: int = MAX_LEVEL) -> int:
    """Smallest level whose measured max perimeter is at most ``target``."""
    if target <= 0:
        raise ParameterError("perimeter target must be positive")
    for m in range(max_level + 1):
        if level_max_perimeter(m) <= target:
            return m
    raise ResolutionError(f"perimeter {target} needs more than {max_level} levels")


def build_triangulation(eps: float, K: float = 4.0, max_level: int = MAX_LEVEL) -> SphereTriangulation:
    """Coarsest refinement whose every cell has geodesic perimeter at most eps/K."""
    if not 0 < eps <= 1:
        raise ParameterError("eps must lie in (0, 1]")
    if K < 1:
        raise ParameterError("K must be at least 1")
    return triangulation_at_level(level_for_perimeter(eps / K, max_level))


def arc_hits_plane(a, b, normal, tol: float = TIE_TOL) -> np.ndarray:
    """Whether the plane through the origin with this normal meets the closed arc ab.

    Works on arrays of arcs; an endpoint within ``tol`` of the plane counts as a hit.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(np.linalg.norm(a + b, axis=-1) < 1e-12):
        raise ParameterError("antipodal arc endpoints do not determine an arc")
    sa = a @ normal
    sb = b @ normal
    return (sa * sb < 0) | (np.abs(sa) <= tol) | (np.abs(sb) <= tol)


# --------------------------------------------------------------------------
# Mass profile


@dataclass(frozen=True, eq=False)
class PartitionProfile:
    eps: float
    n: int
    cell_of: np.ndarray  # (n,) cell of each +1 vector
    mass: np.ndarray  # (t,) vectors per cell
    up_mass: np.ndarray  # (t,) vectors within chord distance eps of the closed cell
    light: np.ndarray  # (t,) bool
    heavy: np.ndarray  # cell ids
    heavy_prime: np.ndarray  # cell ids arc-adjacent to heavy cells, not heavy themselves
    skeleton: np.ndarray  # arc ids bordering heavy or heavy' cells
    outline: np.ndarray  # skeleton arcs with exactly one side in the heavy/heavy' region
    incidence: tuple  # (cells, vertices) pairs with vertex inside the cell's eps-neighbourhood
    max_point_cells: int  # most cells within eps of one vector

    @property
    def threshold(self) -> float:
        return self.eps * self.n / 2

    @property
    def region(self) -> np.ndarray:
        """Heavy and heavy' cells together."""
        return np.union1d(self.heavy, self.heavy_prime)

    def light_vertices(self) -> np.ndarray:
        return self.light[self.cell_of]

    @cached_property
    def region_mask(self) -> np.ndarray:
        m = np.zeros(self.light.shape[0], dtype=bool)
        m[self.region] = True
        return m


def _circle_point(normal: np.ndarray) -> np.ndarray:
    k = int(np.argmin(np.abs(normal)))
    e = np.zeros(3)
    e[k] = 1.0
    p = np.cross(normal, e)
    return p / np.linalg.norm(p)


def planes_hit_skeleton(profile: "PartitionProfile", tri: SphereTriangulation, normals: np.ndarray) -> np.ndarray:
    """For each plane normal, whether its great circle meets some skeleton arc.

    A great circle that touches the heavy region either crosses the region's
    outline or lies wholly inside the region, so the outline plus one probe
    point decide the question exactly.
    """
    normals = np.atleast_2d(normals)
    if profile.skeleton.size == 0:
        return np.zeros(normals.shape[0], dtype=bool)
    ends = tri.arc_endpoints(profile.outline)
    sa = ends[:, 0] @ normals.T
    sb = ends[:, 1] @ normals.T
    hit = ((sa * sb < 0) | (np.abs(sa) <= TIE_TOL) | (np.abs(sb) <= TIE_TOL)).any(axis=0)
    for r in np.flatnonzero(~hit):
        probe = _circle_point(normals[r])
        hit[r] = profile.region_mask[tri.locate_one(probe)]
    return hit


def neighbourhood_pairs(tri: SphereTriangulation, points: np.ndarray, eps: float):
    """(point index, cell id) for every cell whose closed eps-neighbourhood contains the point."""
    r = eps + tri.circumradius
    cand = tri.kdtree.query_ball_point(points, r)
    lens = np.fromiter((len(c) for c in cand), dtype=np.int64, count=len(points))
    pi = np.repeat(np.arange(len(points)), lens)
    if pi.size == 0:
        return pi, pi.copy()
    ci = np.concatenate([np.asarray(c, dtype=np.int64) for c in cand if len(c)])
    q = points[pi]
    # a cell whose center is within eps qualifies outright; the rest need the exact test
    near = np.linalg.norm(q - tri.centers[ci], axis=1) <= eps
    rest = np.flatnonzero(~near)
    if rest.size:
        qr, cr = q[rest], ci[rest]
        near[rest] = tri.contains(cr, qr) | (point_cell_distance(qr, tri.corners[cr]) <= eps)
    return pi[near], ci[near]


def compute_profile(sol3, tri: SphereTriangulation, eps: float) -> PartitionProfile:
    """Cell masses, eps-neighbourhood masses and light/heavy labels of the +1 vectors."""
    Z = np.asarray(sol3.vectors if hasattr(sol3, "vectors") else sol3, dtype=float)
    if Z.ndim != 2 or Z.shape[1] != 3:
        raise ParameterError("profile needs a 3-dimensional solution")
    n = Z.shape[0]
    cell_of = tri.locate(Z)
    mass = np.bincount(cell_of, minlength=tri.t)
    uniq, inv, counts = np.unique(Z, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    pi, ci = neighbourhood_pairs(tri, uniq, eps)
    up = np.bincount(ci, weights=counts[pi], minlength=tri.t)
    per_point = np.bincount(pi, minlength=len(uniq))
    light = up <= eps * n / 2
    heavy = np.flatnonzero(~light)
    if heavy.size:
        nb = tri.arc_faces[tri.face_arcs[heavy]].ravel()
        heavy_prime = np.setdiff1d(np.unique(nb), heavy)
    else:
        heavy_prime = np.zeros(0, dtype=np.int64)
    region = np.union1d(heavy, heavy_prime)
    skeleton = np.unique(tri.face_arcs[region].ravel()) if region.size else np.zeros(0, dtype=np.int64)
    in_region = np.zeros(tri.t, dtype=bool)
    in_region[region] = True
    outline = skeleton[in_region[tri.arc_faces[skeleton]].sum(axis=1) == 1]
    # expand unique-point incidences back to vertices
    order = np.argsort(inv, kind="stable")
    starts = np.zeros(len(uniq) + 1, dtype=np.int64)
    np.cumsum(counts, out=starts[1:])
    inc_cells, inc_verts = [], []
    by_point = np.argsort(pi, kind="stable")
    pstarts = np.zeros(len(uniq) + 1, dtype=np.int64)
    np.cumsum(per_point, out=pstarts[1:])
    for u in range(len(uniq)):
        cs = ci[by_point[pstarts[u]:pstarts[u + 1]]]
        vs = order[starts[u]:starts[u + 1]]
        inc_cells.append(np.repeat(cs, len(vs)))
        inc_verts.append(np.tile(vs, len(cs)))
    incidence = (
        np.concatenate(inc_cells) if inc_cells else np.zeros(0, dtype=np.int64),
        np.concatenate(inc_verts) if inc_verts else np.zeros(0, dtype=np.int64),
    )
    return PartitionProfile(
        eps, n, cell_of, mass, up, light, heavy, heavy_prime, skeleton, outline, incidence,
        int(per_point.max()) if per_point.size else 0,
    )
