"""Zero-locus geometry: marching squares in 2D, edge point clouds in 3D."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import root
from scipy.spatial import cKDTree

from .core_model import FunctionFamily, SubsetMask, _check_stratum, dedup_for_loci, enumerate_subsets, masks_matrix
from .errors import DimensionUnsupported, NotLabeled
from .evaluator import DEFAULT_TOL, gap_matrix, log_gaps
from .grid import GridSpec
from .regions import CellClass, RegionMap

VERTEX_TOL = 1e-6
TOUCH_TOL = 1e-6
CERTIFY_TOL = 1e-9
TRANSVERSAL_MIN = 1e-8
MAX_BISECT = 80


@dataclass
class ContourSet:
    subset: SubsetMask
    polylines: list[np.ndarray] = field(default_factory=list)
    closed: list[bool] = field(default_factory=list)
    touch_points: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))

    @property
    def empty(self) -> bool:
        return not self.polylines

    @property
    def vertices(self) -> np.ndarray:
        if not self.polylines:
            return np.empty((0, 2))
        return np.concatenate(self.polylines)

    def to_dict(self) -> dict:
        return {
            "subset": list(self.subset.elements),
            "empty": self.empty,
            "polylines": [[[float(x), float(y)] for x, y in p] for p in self.polylines],
            "closed": list(self.closed),
            "touch_points": [[float(x), float(y)] for x, y in self.touch_points],
        }


def _gap_fn(family: FunctionFamily, mask: np.ndarray):
    m = mask[None, :]
    return lambda pts: log_gaps(family.evaluate(pts), m)[:, 0]


def refine_on_edges(gap, p0: np.ndarray, p1: np.ndarray, g0: np.ndarray, g1: np.ndarray, tol: float = VERTEX_TOL) -> np.ndarray:
    """Roots of ``gap`` on segments p0-p1 where g0 and g1 differ in sign.

    Starts from linear interpolation and keeps a sign bracket (Illinois
    false position), so each root ends with |gap| <= tol or a collapsed
    bracket.
    """
    a, b = p0.copy(), p1.copy()
    ga, gb = g0.astype(float).copy(), g1.astype(float).copy()
    out = np.empty_like(a)
    active = np.arange(len(a))
    side = np.zeros(len(a), dtype=np.int8)
    for _ in range(MAX_BISECT):
        if active.size == 0:
            break
        A, B, GA, GB = a[active], b[active], ga[active], gb[active]
        denom = GA - GB
        t = np.where(denom != 0, GA / np.where(denom != 0, denom, 1.0), 0.5)
        t = np.clip(t, 0.0, 1.0)
        mid = A + t[:, None] * (B - A)
        gm = gap(mid)
        width = np.linalg.norm(B - A, axis=1)
        done = (np.abs(gm) <= tol) | (width <= 1e-15 * (1 + np.linalg.norm(A, axis=1)))
        out[active[done]] = mid[done]
        keep = ~done
        idx, mid, gm, GA, GB = active[keep], mid[keep], gm[keep], GA[keep], GB[keep]
        left = np.sign(gm) == np.sign(GA)
        # Illinois step: halve the stale endpoint value when the same side moves twice
        sl = side[idx]
        a[idx[left]] = mid[left]
        ga[idx[left]] = gm[left]
        stale_b = left & (sl == 1)
        gb[idx[stale_b]] *= 0.5
        b[idx[~left]] = mid[~left]
        gb[idx[~left]] = gm[~left]
        stale_a = ~left & (sl == -1)
        ga[idx[stale_a]] *= 0.5
        side[idx] = np.where(left, 1, -1)
        active = idx
    if active.size:
        A, B, GA, GB = a[active], b[active], ga[active], gb[active]
        denom = GA - GB
        t = np.clip(np.where(denom != 0, GA / np.where(denom != 0, denom, 1.0), 0.5), 0, 1)
        out[active] = A + t[:, None] * (B - A)
    return out


# cell corners: 0=(i,j) 1=(i+1,j) 2=(i+1,j+1) 3=(i,j+1)
# cell edges: 0 bottom (c0-c1), 1 right (c1-c2), 2 top (c3-c2), 3 left (c0-c3)


def _marching_squares(
    G: np.ndarray, grid: GridSpec, gap, center_gap
) -> tuple[list[np.ndarray], list[bool]]:
    rx, ry = G.shape
    xs, ys = grid.axes()
    pos = G >= -DEFAULT_TOL

    # edge ids: x-edges (i,j)-(i+1,j) -> i*ry + j ; y-edges (i,j)-(i,j+1) -> nx + i*(ry-1) + j
    nx_edges = (rx - 1) * ry
    xe = pos[:-1, :] != pos[1:, :]
    ye = pos[:, :-1] != pos[:, 1:]
    xi, xj = np.nonzero(xe)
    yi, yj = np.nonzero(ye)
    if xi.size + yi.size == 0:
        return [], []

    p0 = np.concatenate([np.c_[xs[xi], ys[xj]], np.c_[xs[yi], ys[yj]]])
    p1 = np.concatenate([np.c_[xs[xi + 1], ys[xj]], np.c_[xs[yi], ys[yj + 1]]])
    g0 = np.concatenate([G[xi, xj], G[yi, yj]])
    g1 = np.concatenate([G[xi + 1, xj], G[yi, yj + 1]])
    verts = refine_on_edges(gap, p0, p1, g0, g1)
    edge_ids = np.concatenate([xi * ry + xj, nx_edges + yi * (ry - 1) + yj])
    vert_of = dict(zip(edge_ids.tolist(), range(len(edge_ids))))

    # cells touched by a crossing edge
    cells = set()
    for i, j in zip(xi.tolist(), xj.tolist()):
        if j < ry - 1:
            cells.add((i, j))
        if j > 0:
            cells.add((i, j - 1))
    for i, j in zip(yi.tolist(), yj.tolist()):
        if i < rx - 1:
            cells.add((i, j))
        if i > 0:
            cells.add((i - 1, j))

    def cell_edges(i, j):
        return (i * ry + j, nx_edges + (i + 1) * (ry - 1) + j, i * ry + j + 1, nx_edges + i * (ry - 1) + j)

    segs: list[tuple[int, int]] = []
    saddles = []
    for i, j in sorted(cells):
        e = cell_edges(i, j)
        hit = [k for k in range(4) if e[k] in vert_of]
        if len(hit) == 2:
            segs.append((e[hit[0]], e[hit[1]]))
        elif len(hit) == 4:
            saddles.append((i, j))
    if saddles:
        centers = np.array([[(xs[i] + xs[i + 1]) / 2, (ys[j] + ys[j + 1]) / 2] for i, j in saddles])
        cg = center_gap(centers) >= -DEFAULT_TOL
        for (i, j), c in zip(saddles, cg):
            e = cell_edges(i, j)
            if c == pos[i, j]:
                segs += [(e[0], e[1]), (e[2], e[3])]
            else:
                segs += [(e[3], e[0]), (e[1], e[2])]

    adj: dict[int, list[int]] = {}
    for a, b in segs:
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    visited: set[int] = set()
    polylines, closed = [], []

    def walk(start):
        chain = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nxt = [v for v in adj[cur] if v != prev and v not in visited]
            if not nxt:
                is_closed = len(chain) > 2 and start in adj[cur] and prev is not None
                return chain, is_closed
            prev, cur = cur, nxt[0]
            chain.append(cur)
            visited.add(cur)

    for e in sorted(adj):
        if e not in visited and len(adj[e]) == 1:
            chain, _ = walk(e)
            polylines.append(chain)
            closed.append(False)
    for e in sorted(adj):
        if e not in visited:
            chain, c = walk(e)
            if c:
                chain.append(chain[0])
            polylines.append(chain)
            closed.append(c)
    return [verts[[vert_of[e] for e in ch]] for ch in polylines], closed


def _touch_points(G: np.ndarray, grid: GridSpec, tol: float) -> np.ndarray:
    """Grid nodes with |gap| < tol whose neighbouring cells show no sign change."""
    pos = G >= -DEFAULT_TOL
    near = np.abs(G) < tol
    if not near.any():
        return np.empty((0, 2))
    change = np.zeros_like(pos)
    xe = pos[:-1, :] != pos[1:, :]
    ye = pos[:, :-1] != pos[:, 1:]
    change[:-1, :] |= xe
    change[1:, :] |= xe
    change[:, :-1] |= ye
    change[:, 1:] |= ye
    i, j = np.nonzero(near & ~change)
    xs, ys = grid.axes()
    return np.c_[xs[i], ys[j]]


def _require_2d(family: FunctionFamily, grid: GridSpec) -> None:
    if family.n != 2 or grid.n != 2:
        raise DimensionUnsupported("contours need n = 2; use sample_zero_points for n = 3")


def _contour_from_field(family, I, G, grid, touch_tol) -> ContourSet:
    gap = _gap_fn(family, I.as_bool())
    polys, closed = _marching_squares(G, grid, gap, gap)
    return ContourSet(I, polys, closed, _touch_points(G, grid, touch_tol))


def extract_zero_locus(family: FunctionFamily, I: SubsetMask, grid: GridSpec, touch_tol: float = TOUCH_TOL) -> ContourSet:
    _require_2d(family, grid)
    G = gap_matrix(family, [I], grid.nodes())[:, 0].reshape(grid.shape)
    return _contour_from_field(family, I, G, grid, touch_tol)


def sample_zero_points(family: FunctionFamily, I: SubsetMask, grid: GridSpec) -> np.ndarray:
    """Midpoints of grid edges whose end gaps have opposite signs (n = 3)."""
    if family.n != 3 or grid.n != 3:
        raise DimensionUnsupported("point clouds need n = 3")
    G = gap_matrix(family, [I], grid.nodes())[:, 0].reshape(grid.shape)
    pos = G >= -DEFAULT_TOL
    nodes = grid.nodes().reshape(*grid.shape, 3)
    out = []
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        hit = pos[lo] != pos[hi]
        out.append(((nodes[lo] + nodes[hi]) / 2)[hit])
    pts = np.concatenate(out)
    order = np.lexsort(pts.T[::-1])
    return pts[order]


@dataclass
class StratumLoci:
    k: int
    contours: list[ContourSet]

    @property
    def visible(self) -> list[ContourSet]:
        return [c for c in self.contours if not c.empty]

    @property
    def visible_count(self) -> int:
        return len(self.visible)

    @property
    def empty_subsets(self) -> list[SubsetMask]:
        return [c.subset for c in self.contours if c.empty]


def stratum_loci(family: FunctionFamily, k: int, grid: GridSpec, touch_tol: float = TOUCH_TOL,
                 workers: Optional[int] = None) -> StratumLoci:
    _require_2d(family, grid)
    _check_stratum(family.N, k)
    subs = dedup_for_loci(enumerate_subsets(family.N, k), family.N)
    G = gap_matrix(family, masks_matrix(subs), grid.nodes(), workers)
    contours = [
        _contour_from_field(family, I, G[:, c].reshape(grid.shape), grid, touch_tol)
        for c, I in enumerate(subs)
    ]
    return StratumLoci(k, contours)


def _segments(cs: ContourSet) -> np.ndarray:
    segs = [np.stack([p[:-1], p[1:]], axis=1) for p in cs.polylines if len(p) > 1]
    return np.concatenate(segs) if segs else np.empty((0, 2, 2))


def _point_segment(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    t = np.where(dd > 0, np.einsum("ij,ij->i", p - a, d) / np.where(dd > 0, dd, 1), 0.0)
    q = a + np.clip(t, 0, 1)[:, None] * d
    return np.linalg.norm(p - q, axis=1), q


def segment_distances(s1: np.ndarray, s2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distances between paired 2D segments and a closest-approach midpoint for each."""
    a, b, c, d = s1[:, 0], s1[:, 1], s2[:, 0], s2[:, 1]

    def cross(u, v):
        return u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]

    r, s = b - a, d - c
    den = cross(r, s)
    safe = np.where(den != 0, den, 1)
    t = cross(c - a, s) / safe
    u = cross(c - a, r) / safe
    crossing = (den != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)

    cands = [_point_segment(a, c, d), _point_segment(b, c, d), _point_segment(c, a, b), _point_segment(d, a, b)]
    pts = [a, b, c, d]
    dist = np.stack([x[0] for x in cands])
    best = np.argmin(dist, axis=0)
    rows = np.arange(len(a))
    dmin = dist[best, rows]
    foot = np.stack([x[1] for x in cands])[best, rows]
    src = np.stack(pts)[best, rows]
    wit = (foot + src) / 2
    xpt = a + t[:, None] * r
    dmin = np.where(crossing, 0.0, dmin)
    wit = np.where(crossing[:, None], xpt, wit)
    return dmin, wit


def min_separation(c1: ContourSet, c2: ContourSet, radius: float) -> tuple[float, Optional[np.ndarray]]:
    """Smallest distance between two contour sets if below ``radius`` (else inf)."""
    s1, s2 = _segments(c1), _segments(c2)
    if not len(s1) or not len(s2):
        return math.inf, None
    m1, m2 = s1.mean(axis=1), s2.mean(axis=1)
    reach = radius + np.linalg.norm(s1[:, 1] - s1[:, 0], axis=1).max() / 2 + np.linalg.norm(s2[:, 1] - s2[:, 0], axis=1).max() / 2
    pairs = cKDTree(m1).query_ball_tree(cKDTree(m2), reach)
    ii = np.fromiter((i for i, js in enumerate(pairs) for _ in js), dtype=np.int64)
    jj = np.fromiter((j for js in pairs for j in js), dtype=np.int64)
    if ii.size == 0:
        return math.inf, None
    d, w = segment_distances(s1[ii], s2[jj])
    b = int(np.argmin(d))
    if d[b] > radius:
        return math.inf, None
    return float(d[b]), w[b]


@dataclass(frozen=True)
class Intersection:
    first: SubsetMask
    second: SubsetMask
    distance: float
    witness: tuple[float, float]

    @property
    def overlapping(self) -> bool:
        return bool(self.first.bits & self.second.bits)


def _common_root(family: FunctionFamily, I1: SubsetMask, I2: SubsetMask, start: np.ndarray, radius: float):
    masks = np.stack([I1.as_bool(), I2.as_bool()])

    def fun(x):
        return log_gaps(family.evaluate(x), masks)[0]

    sol = root(fun, start, method="hybr", options={"xtol": 1e-13})
    if not np.all(np.isfinite(sol.x)):
        return None
    if np.max(np.abs(fun(sol.x))) > CERTIFY_TOL or np.linalg.norm(sol.x - start) > radius:
        return None
    # asymptotic tails give near-parallel gradients and numerically fake roots
    h = 1e-6
    J = np.stack([(fun(sol.x + e) - fun(sol.x - e)) / (2 * h) for e in (np.array([h, 0.0]), np.array([0.0, h]))], axis=1)
    norms = np.linalg.norm(J, axis=1)
    if norms.min() == 0 or abs(np.linalg.det(J)) / (norms[0] * norms[1]) < TRANSVERSAL_MIN:
        return None
    return sol.x


def detect_pairwise_intersections(
    loci: Sequence[ContourSet], radius: float, family: Optional[FunctionFamily] = None
) -> list[Intersection]:
    """Pairs of contour sets that come within ``radius`` of each other.

    With ``family`` given, each candidate must also lead to a transversal
    common root of both gaps near the witness; loci that only run close
    together (as they do along asymptotic tails) are then dropped.
    """
    out = []
    for a in range(len(loci)):
        for b in range(a + 1, len(loci)):
            d, w = min_separation(loci[a], loci[b], radius)
            if w is None:
                continue
            if family is not None:
                w = _common_root(family, loci[a].subset, loci[b].subset, w, radius)
                if w is None:
                    continue
                d = 0.0
            out.append(Intersection(loci[a].subset, loci[b].subset, d, (float(w[0]), float(w[1]))))
    return out


def extremal_boundary(rmap: RegionMap) -> np.ndarray:
    """Boolean cell mask: non-NEG cells sharing a face with a NEG cell."""
    if not rmap.labeled:
        raise NotLabeled("call label_subdomains first")
    neg = rmap.cell_class == CellClass.NEG
    touch = np.zeros_like(neg)
    for axis in range(neg.ndim):
        lo = [slice(None)] * neg.ndim
        hi = [slice(None)] * neg.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        touch[tuple(lo)] |= neg[tuple(hi)]
        touch[tuple(hi)] |= neg[tuple(lo)]
    return touch & ~neg


def max_intersection_bound(N: int, k: int) -> int:
    """Upper bound on pairwise crossings of distinct k-loci."""
    _check_stratum(N, k)
    c = math.comb(N, k)
    return c * (c - 1 - math.comb(N - k, k)) // 2
