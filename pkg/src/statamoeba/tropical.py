"""Max-plus limits of the exponent forms and their corner loci.

The affine kind keeps the constants b_a; the homogeneous kind drops them.
A boolean ``keep`` mask over the variables zeroes the dropped products
a_ai x_i, which gives the cylindrical variants.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from .core_model import FunctionFamily, SubsetMask, _as_points, _check_stratum, subset_matrix
from .errors import DimensionUnsupported, InvalidLambda
from .grid import GridSpec

TIE_TOL = 1e-9
KINDS = ("affine", "homogeneous")


def limit_forms(family: FunctionFamily, kind: str = "affine", keep: Optional[Sequence[bool]] = None):
    """(A, b) of the limit forms; raises LinearOnly for non-affine families."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    A, b = family.linear_parts()
    A = A.copy()
    if keep is not None:
        keep = np.asarray(keep, dtype=bool)
        if keep.shape != (family.n,):
            raise ValueError("keep mask needs one flag per variable")
        A[:, ~keep] = 0.0
    if kind == "homogeneous":
        b = np.zeros_like(b)
    return A, b


def _values(family, points, kind, keep) -> np.ndarray:
    A, b = limit_forms(family, kind, keep)
    return _as_points(points, family.n) @ A.T + b


def dominance(family: FunctionFamily, x, tol: float = TIE_TOL, kind: str = "affine", keep=None) -> tuple[int, ...]:
    """1-based labels of the forms within ``tol`` of the maximum at x."""
    v = _values(family, x, kind, keep)[0]
    return tuple(int(i) + 1 for i in np.flatnonzero(v >= v.max() - tol))


def skeleton_membership(family: FunctionFamily, points, tol: float = TIE_TOL, kind: str = "affine", keep=None) -> np.ndarray:
    """True where the maximum of the limit forms is attained at least twice."""
    v = _values(family, points, kind, keep)
    top = np.sort(v, axis=1)[:, -2:]
    return top[:, 1] - top[:, 0] <= tol


def tropical_stratum_membership(family: FunctionFamily, I: SubsetMask, x, tol: float = TIE_TOL,
                                kind: str = "affine", keep=None) -> bool:
    v = _values(family, x, kind, keep)[0]
    inside = I.as_bool()
    return bool(abs(v[inside].max() - v[~inside].max()) <= tol)


def tropical_gaps(family: FunctionFamily, k: int, points, kind: str = "affine", keep=None) -> np.ndarray:
    """max over I minus max over the complement, shape (P, C(N,k))."""
    _check_stratum(family.N, k)
    v = _values(family, points, kind, keep)
    masks = subset_matrix(family.N, k)
    out = np.empty((v.shape[0], masks.shape[0]))
    step = max(1, (1 << 22) // (masks.size or 1))
    for s in range(0, v.shape[0], step):
        blk = v[s:s + step, None, :]
        inside = np.where(masks[None], blk, -np.inf).max(axis=2)
        outside = np.where(~masks[None], blk, -np.inf).max(axis=2)
        out[s:s + step] = inside - outside
    return out


def stratum_cell_mask(family: FunctionFamily, k: int, grid: GridSpec, tol: float = TIE_TOL,
                      kind: str = "affine", keep=None) -> np.ndarray:
    """Cells where some stratum-k tropical gap vanishes or changes sign across the corners."""
    T = tropical_gaps(family, k, grid.nodes(), kind, keep)
    sgn = np.where(np.abs(T) <= tol, 0, np.sign(T)).astype(np.int8).reshape(*grid.shape, -1)
    n = grid.n
    corners = []
    for corner in range(1 << n):
        sl = tuple(slice(1, None) if (corner >> d) & 1 else slice(None, -1) for d in range(n))
        corners.append(sgn[sl])
    lo = np.minimum.reduce(corners)
    hi = np.maximum.reduce(corners)
    hit = (lo != hi) | (lo == 0)
    return hit.any(axis=-1)


@dataclass(frozen=True)
class TropicalPiece:
    """Part of the line f_a = f_b on which a and b jointly attain the maximum.

    The piece is {origin + t * direction : t_lo <= t <= t_hi}, with infinite
    bounds for rays and lines.
    """

    pair: tuple[int, int]  # 1-based
    origin: tuple[float, float]
    direction: tuple[float, float]
    t_lo: float
    t_hi: float

    @property
    def shape(self) -> str:
        unb = math.isinf(self.t_lo) + math.isinf(self.t_hi)
        return ("segment", "ray", "line")[unb]

    @property
    def unbounded(self) -> bool:
        return self.shape != "segment"

    def point(self, t: float) -> np.ndarray:
        return np.asarray(self.origin) + t * np.asarray(self.direction)

    def closure_contains(self, p, tol: float = 1e-9) -> bool:
        o, d = np.asarray(self.origin), np.asarray(self.direction)
        t = float(np.dot(np.asarray(p) - o, d))
        if np.linalg.norm(o + t * d - p) > tol:
            return False
        return self.t_lo - tol <= t <= self.t_hi + tol

    def clipped(self, bbox) -> Optional[tuple[np.ndarray, np.ndarray]]:
        """End points of the piece inside ``bbox`` (Liang-Barsky), or None."""
        lo, hi = self.t_lo, self.t_hi
        o, d = self.origin, self.direction
        for i in range(2):
            a, b = bbox[i]
            if abs(d[i]) < 1e-15:
                if not a <= o[i] <= b:
                    return None
                continue
            t1, t2 = (a - o[i]) / d[i], (b - o[i]) / d[i]
            lo, hi = max(lo, min(t1, t2)), min(hi, max(t1, t2))
        if lo > hi:
            return None
        return self.point(lo), self.point(hi)

    def to_dict(self) -> dict:
        def num(v):
            return None if math.isinf(v) else v

        return {
            "pair": list(self.pair),
            "origin": list(self.origin),
            "direction": list(self.direction),
            "t_lo": num(self.t_lo),
            "t_hi": num(self.t_hi),
            "shape": self.shape,
        }


@dataclass(frozen=True)
class TropicalSkeleton:
    kind: str
    pieces: tuple[TropicalPiece, ...]
    coincident_pairs: tuple[tuple[int, int], ...] = ()

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "pieces": [p.to_dict() for p in self.pieces],
            "coincident_pairs": [list(p) for p in self.coincident_pairs],
        }


def skeleton_2d(family: FunctionFamily, kind: str = "affine", keep=None, tol: float = TIE_TOL) -> TropicalSkeleton:
    """Clip every pairwise tie line by the half-planes where the pair is maximal."""
    if family.n != 2:
        raise DimensionUnsupported("exact skeletons are two-dimensional")
    A, b = limit_forms(family, kind, keep)
    N = family.N
    pieces = []
    coincident = []
    for a in range(N):
        for c in range(a + 1, N):
            d = A[a] - A[c]
            e = b[a] - b[c]
            dn = float(np.dot(d, d))
            if dn <= 1e-24:
                # forms differ by a constant: tie nowhere, or everywhere
                if abs(e) <= tol:
                    coincident.append((a + 1, c + 1))
                continue
            p0 = -e * d / dn
            u = np.array([-d[1], d[0]]) / math.sqrt(dn)
            lo, hi = -math.inf, math.inf
            empty = False
            for g in range(N):
                if g in (a, c):
                    continue
                w = A[a] - A[g]
                slope = float(np.dot(w, u))
                off = float(np.dot(w, p0) + b[a] - b[g])
                if abs(slope) <= 1e-12:
                    if off < -tol:
                        empty = True
                        break
                    continue
                t0 = -off / slope
                if slope > 0:
                    lo = max(lo, t0)
                else:
                    hi = min(hi, t0)
            if empty or hi - lo <= 1e-12:
                continue
            # + 0.0 normalizes negative zeros for stable output
            pieces.append(TropicalPiece(
                (a + 1, c + 1),
                (float(p0[0]) + 0.0, float(p0[1]) + 0.0),
                (float(u[0]) + 0.0, float(u[1]) + 0.0),
                lo + 0.0,
                hi + 0.0,
            ))
    return TropicalSkeleton(kind, tuple(pieces), tuple(coincident))


def rasterize_skeleton(skel: TropicalSkeleton, grid: GridSpec) -> np.ndarray:
    """Cells met by some piece (sampled every quarter cell)."""
    mask = np.zeros(grid.cell_shape, dtype=bool)
    step = min(grid.cell_size) / 4
    for piece in skel.pieces:
        ends = piece.clipped(grid.bbox)
        if ends is None:
            continue
        p, q = ends
        m = max(2, int(math.ceil(np.linalg.norm(q - p) / step)) + 1)
        pts = p + np.linspace(0, 1, m)[:, None] * (q - p)
        idx = [np.clip(np.floor((pts[:, i] - grid.bbox[i][0]) / grid.cell_size[i]).astype(int), 0, grid.cell_shape[i] - 1)
               for i in range(2)]
        mask[idx[0], idx[1]] = True
    return mask


def masks_match(a: np.ndarray, b: np.ndarray, cells: int = 1) -> bool:
    """Each mask lies inside the other dilated by ``cells`` cells (8-neighbourhood)."""
    st = ndimage.generate_binary_structure(a.ndim, a.ndim)
    da = ndimage.binary_dilation(a, st, iterations=cells)
    db = ndimage.binary_dilation(b, st, iterations=cells)
    return bool(np.all(~a | db) and np.all(~b | da))


@dataclass(frozen=True)
class UnboundedReport:
    kind: str
    components: int
    touching: int
    pieces: int
    unbounded_pieces: int
    asserted: bool

    @property
    def ok(self) -> bool:
        if not self.asserted:
            return True
        return self.touching == self.components and self.unbounded_pieces == self.pieces

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "components": self.components,
            "touching_boundary": self.touching,
            "pieces": self.pieces,
            "unbounded_pieces": self.unbounded_pieces,
            "asserted": self.asserted,
            "ok": self.ok,
        }


def check_unbounded(family: FunctionFamily, skel: TropicalSkeleton, grid: GridSpec, keep=None) -> UnboundedReport:
    """Every region off the skeleton should reach the bbox boundary.

    Regions are the connected sets of grid nodes with one strict argmax.
    Only the homogeneous kind is asserted; the affine kind is reported.
    """
    v = _values(family, grid.nodes(), skel.kind, keep)
    top = np.sort(v, axis=1)
    arg = np.argmax(v, axis=1)
    arg[top[:, -1] - top[:, -2] <= TIE_TOL] = -1
    arg = arg.reshape(grid.shape)
    st = ndimage.generate_binary_structure(grid.n, grid.n)
    border = np.zeros(grid.shape, dtype=bool)
    for ax in range(grid.n):
        sl = [slice(None)] * grid.n
        sl[ax] = 0
        border[tuple(sl)] = True
        sl[ax] = -1
        border[tuple(sl)] = True
    comps = touching = 0
    for a in np.unique(arg[arg >= 0]):
        lab, cnt = ndimage.label(arg == a, structure=st)
        comps += cnt
        touching += len(np.unique(lab[border & (lab > 0)]))
    return UnboundedReport(
        skel.kind, comps, touching, len(skel.pieces), sum(p.unbounded for p in skel.pieces),
        asserted=skel.kind == "homogeneous",
    )


def power_sum_check(family: FunctionFamily, lam: float, x, slack: float = 1e-12) -> bool:
    return power_sum_holds(family.evaluate(x)[0], lam, slack)


def power_sum_holds(f, lam: float, slack: float = 1e-12) -> bool:
    """sum e^{lam f} <= (sum e^f)^lam, compared in log space."""
    if not lam >= 1:
        raise InvalidLambda("lambda must be >= 1")
    f = np.asarray(f, dtype=float)
    lhs = _lse(lam * f)
    rhs = lam * _lse(f)
    return bool(lhs <= rhs + slack * max(1.0, abs(rhs)))


def _lse(v: np.ndarray) -> float:
    m = float(v.max())
    return m + math.log(math.fsum(np.exp(v - m)))
