"""Executable property checks with witness reporting.

Every check returns a :class:`CheckResult`; a :class:`VerifyReport` bundles
them with the configuration that produced them.  Sampling is deterministic
given the seed: scrambled Halton points over the bbox plus points jittered
around sign changes found on a coarse grid.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .core_model import FunctionFamily, SubsetMask, subset_matrix
from .errors import Inconclusive, InvalidStratum
from .evaluator import DEFAULT_TOL, gap_matrix, sign_matrix
from .grid import GridSpec
from .loci import stratum_loci
from .regions import CellClass, ekr_count, vector_classes
from .tropical import (
    TropicalPiece,
    masks_match,
    power_sum_holds,
    rasterize_skeleton,
    skeleton_2d,
    skeleton_membership,
    stratum_cell_mask,
    tropical_gaps,
)

MAX_WITNESSES = 20
NEAR_CELLS = 2.0

# CLI shorthand for expect-violation groups
VIOLATION_GROUPS = {"chains": ("neg_chain",)}


@dataclass
class CheckResult:
    name: str
    samples: int = 0
    violations: int = 0
    witnesses: list = field(default_factory=list)
    expect_violation: bool = False
    info: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.violations > 0) if self.expect_violation else (self.violations == 0)

    def record(self, points: np.ndarray, detail: Optional[Sequence] = None) -> None:
        """Count violations and keep the first few witnesses in sample order."""
        points = np.atleast_2d(points)
        self.violations += len(points)
        room = MAX_WITNESSES - len(self.witnesses)
        for i in range(min(room, len(points))):
            w = {"x": [float(v) for v in points[i]]}
            if detail is not None:
                w["detail"] = detail[i]
            self.witnesses.append(w)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "samples": self.samples,
            "violations": self.violations,
            "expect_violation": self.expect_violation,
            "passed": self.passed,
            "witnesses": self.witnesses,
            "info": self.info,
        }


@dataclass
class VerifyReport:
    config: dict
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"config": self.config, "passed": self.passed, "checks": [c.to_dict() for c in self.checks]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _expected(names: Iterable[str]) -> set[str]:
    out: set[str] = set()
    for n in names:
        out.update(VIOLATION_GROUPS.get(n, (n,)))
    return out


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def halton_points(bbox, count: int, seed: int) -> np.ndarray:
    lo = np.array([a for a, _ in bbox], dtype=float)
    hi = np.array([b for _, b in bbox], dtype=float)
    sampler = qmc.Halton(d=len(bbox), scramble=True, seed=seed)
    return qmc.scale(sampler.random(count), lo, hi)


def near_locus_points(family: FunctionFamily, strata: Sequence[int], bbox, count: int, seed: int) -> np.ndarray:
    """Points within two coarse cells of a sign change of some stratum function."""
    if count <= 0:
        return np.empty((0, family.n))
    res = {1: 4001, 2: 161, 3: 31}.get(family.n, 11)
    grid = GridSpec.make(bbox, res)
    nodes = grid.nodes()
    pool = []
    for k in strata:
        S = sign_matrix(family, k, nodes).reshape(*grid.shape, -1)
        for axis in range(grid.n):
            lo = [slice(None)] * grid.n
            hi = [slice(None)] * grid.n
            lo[axis] = slice(None, -1)
            hi[axis] = slice(1, None)
            change = np.any(S[tuple(lo)] != S[tuple(hi)], axis=-1)
            idx = np.argwhere(change)
            base = nodes.reshape(*grid.shape, grid.n)[tuple(idx.T)]
            step = np.zeros(grid.n)
            step[axis] = grid.cell_size[axis] / 2
            pool.append(base + step)
    if not pool or not sum(len(p) for p in pool):
        return np.empty((0, family.n))
    pool = np.concatenate(pool)
    rng = np.random.default_rng(seed)
    pick = pool[rng.integers(0, len(pool), count)]
    jitter = rng.uniform(-NEAR_CELLS, NEAR_CELLS, size=pick.shape) * np.asarray(grid.cell_size)
    lo = np.array([a for a, _ in bbox])
    hi = np.array([b for _, b in bbox])
    return np.clip(pick + jitter, lo, hi)


def sample_points(family: FunctionFamily, bbox, count: int, seed: int, strata=None, near_fraction: float = 0.2) -> np.ndarray:
    strata = list(strata) if strata is not None else list(range(1, family.N // 2 + 1))
    n_near = int(round(count * near_fraction))
    return np.concatenate([
        halton_points(bbox, count - n_near, seed),
        near_locus_points(family, strata, bbox, n_near, seed),
    ])


def _strata(family: FunctionFamily, strata) -> list[int]:
    ks = sorted(set(strata)) if strata is not None else list(range(1, family.N // 2 + 1))
    for k in ks:
        if not 1 <= k <= family.N // 2:
            raise InvalidStratum(f"k={k} outside 1..{family.N // 2}")
    return ks


# ---------------------------------------------------------------------------
# Sign counts and inclusion chains
# ---------------------------------------------------------------------------


def default_neg_rule(family: FunctionFamily) -> str:
    return "ekr" if family.is_polynomial else "observed"


def _disjoint_pairs(N: int, k: int) -> np.ndarray:
    M = subset_matrix(N, k).astype(np.int32)
    return (M @ M.T) == 0


def check_inclusion_and_counts(
    family: FunctionFamily,
    strata=None,
    samples: int = 10_000,
    seed: int = 0,
    bbox=None,
    neg_rule: Optional[str] = None,
    expect_violation: Iterable[str] = (),
    points: Optional[np.ndarray] = None,
    tol: float = DEFAULT_TOL,
) -> list[CheckResult]:
    """Negative-count bounds, intersecting families and the two inclusion chains.

    ``neg_rule`` picks how the unstable domain is recognized: ``"ekr"`` uses
    the intersecting-family maximum, ``"observed"`` the largest count among
    the samples (needed when that maximum is never attained).
    """
    ks = _strata(family, strata)
    N = family.N
    expected = _expected(expect_violation)
    rule = neg_rule or default_neg_rule(family)
    if points is None:
        points = sample_points(family, bbox or [(-8.0, 8.0)] * family.n, samples, seed, ks)

    res = {name: CheckResult(name, expect_violation=name in expected)
           for name in ("ekr_bound", "intersecting", "half_count", "pos_chain", "neg_chain")}
    classes: dict[int, np.ndarray] = {}
    for k in ks:
        S = sign_matrix(family, k, points, tol)
        off = ~np.any(S == 0, axis=1)
        neg = np.count_nonzero(S < 0, axis=1)
        if 2 * k == N:
            c = res["half_count"]
            c.samples += int(off.sum())
            bad = off & (neg != math.comb(2 * k - 1, k))
            c.record(points[bad], [f"k={k} neg={int(v)}" for v in neg[bad]])
        else:
            c = res["ekr_bound"]
            c.samples += int(off.sum())
            bad = off & (neg > ekr_count(N, k))
            c.record(points[bad], [f"k={k} neg={int(v)}" for v in neg[bad]])

            c = res["intersecting"]
            c.samples += int(off.sum())
            Sn = (S < 0).astype(np.float64)
            clash = np.einsum("pc,cd,pd->p", Sn, _disjoint_pairs(N, k).astype(np.float64), Sn) > 0
            bad = off & clash
            c.record(points[bad], [f"k={k}"] * int(bad.sum()))

        if rule == "ekr":
            thr = ekr_count(N, k)
        elif rule == "observed":
            thr = int(neg[off].max()) if off.any() else 0
        else:
            raise ValueError(f"unknown neg_rule {rule!r}")
        cls = vector_classes(S, N, k, thr)
        classes[k] = cls
        res["neg_chain"].info[f"neg_threshold_k{k}"] = thr

    for i, k in enumerate(ks):
        for kh in ks[i + 1:]:
            both = (classes[k] != CellClass.BOUNDARY) & (classes[kh] != CellClass.BOUNDARY)
            c = res["pos_chain"]
            c.samples += int(both.sum())
            bad = both & (classes[kh] == CellClass.POS) & (classes[k] != CellClass.POS)
            c.record(points[bad], [f"POS at k={kh} but not at k={k}"] * int(bad.sum()))
            # at 2k = N the unstable class is a convention tied to index 1
            if 2 * kh < N:
                c = res["neg_chain"]
                c.samples += int(both.sum())
                bad = both & (classes[k] == CellClass.NEG) & (classes[kh] != CellClass.NEG)
                c.record(points[bad], [f"NEG at k={k} but not at k={kh}"] * int(bad.sum()))
    res["neg_chain"].info["neg_rule"] = rule
    return list(res.values())


def total_spin(family: FunctionFamily, k: int, points, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Sum of sign-vector entries per point; NaN where a stratum function vanishes."""
    S = sign_matrix(family, k, points, tol)
    out = S.sum(axis=1, dtype=np.int64).astype(float)
    out[np.any(S == 0, axis=1)] = np.nan
    return out


# ---------------------------------------------------------------------------
# Algebraic identities
# ---------------------------------------------------------------------------


def check_algebraic_identities(
    family: FunctionFamily, samples: int = 1000, seed: int = 0, bbox=None, strata=None
) -> list[CheckResult]:
    ks = _strata(family, strata)
    N = family.N
    points = halton_points(bbox or [(-8.0, 8.0)] * family.n, samples, seed)
    F = family.evaluate(points)
    W = np.exp(F - F.max(axis=1, keepdims=True))
    rng = np.random.default_rng(seed)

    counting = CheckResult("counting_identity")
    anti = CheckResult("antisymmetry")
    for k in range(1, N):
        M = subset_matrix(N, k) if k <= N // 2 else ~subset_matrix(N, N - k)
        lhs = np.array([math.fsum(row) for row in W @ M.T.astype(float)])
        rhs = math.comb(N - 1, k - 1) * np.array([math.fsum(w) for w in W])
        rel = np.abs(lhs - rhs) / rhs
        counting.samples += len(points)
        bad = rel > 1e-12
        counting.record(points[bad], [f"k={k} rel={r:.3e}" for r in rel[bad]])
    for k in ks:
        M = subset_matrix(N, k)
        g = gap_matrix(family, M, points)
        gc = gap_matrix(family, ~M, points)
        anti.samples += len(points)
        bad = np.any(g != -gc, axis=1)
        anti.record(points[bad], [f"k={k}"] * int(bad.sum()))

    power = CheckResult("power_sum")
    lams = rng.uniform(1.0, 10.0, len(points))
    power.samples = len(points)
    bad = np.array([not power_sum_holds(f, lam) for f, lam in zip(F, lams)], dtype=bool)
    power.record(points[bad], [f"lambda={lam:.6g}" for lam in lams[bad]])
    power.info["lambda_range"] = [1.0, 10.0]

    nest = CheckResult("nesting_monotonicity")
    total = W.sum(axis=1)
    for p in range(len(points)):
        kh = int(rng.integers(2, N))
        big = rng.choice(N, size=kh, replace=False)
        k = int(rng.integers(1, kh))
        small = rng.choice(big, size=k, replace=False)
        w = W[p]
        inside_big = np.zeros(N, dtype=bool)
        inside_big[big] = True
        inside_small = np.zeros(N, dtype=bool)
        inside_small[small] = True
        z_small = w[~inside_small].sum() - w[inside_small].sum()
        z_big = w[~inside_big].sum() - w[inside_big].sum()
        diff = z_small - z_big
        exact = 2 * w[inside_big & ~inside_small].sum()
        nest.samples += 1
        # strictness is only observable when the difference exceeds rounding
        resolvable = exact > 1e-12 * total[p]
        if (resolvable and not diff > 0) or diff < -1e-12 * total[p]:
            nest.record(points[p:p + 1], [f"k={k} khat={kh} diff={diff:.3e}"])
    return [counting, anti, power, nest]


# ---------------------------------------------------------------------------
# Rays from a stratum
# ---------------------------------------------------------------------------


def _distance_to_pieces(p: np.ndarray, pieces: Sequence[TropicalPiece]) -> float:
    best = math.inf
    for pc in pieces:
        o, d = np.asarray(pc.origin), np.asarray(pc.direction)
        t = min(max(float(np.dot(p - o, d)), pc.t_lo), pc.t_hi)
        best = min(best, float(np.linalg.norm(o + t * d - p)))
    return best


def _pairwise_tie_pieces(family: FunctionFamily) -> list[TropicalPiece]:
    A, b = family.linear_parts()
    out = []
    for a in range(family.N):
        for c in range(a + 1, family.N):
            d = A[a] - A[c]
            dn = float(np.dot(d, d))
            if dn == 0:
                continue
            p0 = -(b[a] - b[c]) * d / dn
            u = np.array([-d[1], d[0]]) / math.sqrt(dn)
            out.append(TropicalPiece((a + 1, c + 1), tuple(p0), tuple(u), -math.inf, math.inf))
    return out


def _project_to_locus(family: FunctionFamily, J: SubsetMask, x: np.ndarray, tol: float = 1e-13) -> np.ndarray:
    """Newton steps along the gap gradient; contour vertices are only 1e-6 accurate."""
    m = J.as_bool()[None, :]

    def g(p):
        return gap_matrix(family, m, p)[:, 0]

    eps = 1e-7
    x = x.astype(float).copy()
    start = x.copy()
    for _ in range(30):
        gx = g(x)[0]
        if abs(gx) <= tol:
            break
        probe = np.array([x + eps * np.eye(2)[i] for i in range(2)] + [x - eps * np.eye(2)[i] for i in range(2)])
        gp = g(probe)
        grad = (gp[:2] - gp[2:]) / (2 * eps)
        nn = float(np.dot(grad, grad))
        if nn == 0:
            break
        x = x - gx * grad / nn
    if np.linalg.norm(x - start) > 1e-3:
        return start
    return x


def _single_dominant(F: np.ndarray) -> np.ndarray:
    """True where the top exponent beats the sum of all others (the ray's end state)."""
    m = F.max(axis=1, keepdims=True)
    w = np.exp(F - m)
    return w.sum(axis=1) - 1.0 < 1.0


def ray_escape_test(
    family: FunctionFamily,
    k_hat: int,
    k: int,
    trials: int = 200,
    seed: int = 0,
    grid: Optional[GridSpec] = None,
    exclusion: str = "all_pairs",
    exclusion_cells: float = NEAR_CELLS,
    max_steps: int = 200_000,
) -> CheckResult:
    """Rays from points of the k_hat-stratum should cross the k-stratum.

    Each ray is marched in quarter-cell steps through the bbox and in
    doubling steps beyond it, until one exponent exceeds the sum of all the
    others; past that point no further sign change is possible.  A ray is a
    hit when the k-sign vector anywhere along it differs from the one at
    the base.  Bases are contour vertices pushed onto their locus by Newton
    steps.  Bases within ``exclusion_cells`` cells of any tie line
    f_a = f_b (``exclusion="all_pairs"``) or only of the coincident maximum
    locus (``exclusion="dominant"``) are skipped.
    """
    if not 1 <= k < k_hat <= family.N // 2:
        raise InvalidStratum("need 1 <= k < k_hat <= N // 2")
    grid = grid or GridSpec.square(2.0, 1601)
    h = min(grid.cell_size)
    loci = stratum_loci(family, k_hat, grid)
    pool, owner = [], []
    for c in loci.visible:
        v = c.vertices
        pool.append(v)
        owner += [c.subset] * len(v)
    if not pool:
        raise Inconclusive(f"no {k_hat}-stratum locus found on the grid")
    pool = np.concatenate(pool)
    rng = np.random.default_rng(seed)
    pick = rng.choice(len(pool), size=min(trials, len(pool)), replace=len(pool) < trials)
    bases = np.array([_project_to_locus(family, owner[i], pool[i]) for i in pick])
    angles = rng.uniform(0.0, 2 * math.pi, len(bases))

    if exclusion == "dominant":
        pieces = list(skeleton_2d(family, "affine").pieces)
    elif exclusion == "all_pairs":
        pieces = _pairwise_tie_pieces(family)
    else:
        raise ValueError("exclusion must be 'dominant' or 'all_pairs'")

    res = CheckResult("ray_escape")
    excluded = 0
    unresolved = 0
    lo = np.array([a for a, _ in grid.bbox])
    hi = np.array([b for _, b in grid.bbox])
    for base, th in zip(bases, angles):
        if _distance_to_pieces(base, pieces) <= exclusion_cells * h:
            excluded += 1
            continue
        res.samples += 1
        e = np.array([math.cos(th), math.sin(th)])
        s0 = sign_matrix(family, k, base)[0]
        t, step, hit, done = 0.0, h / 4, False, False
        for _ in range(max_steps // 64):
            ts = t + step * np.arange(1, 65)
            pts = base + ts[:, None] * e
            S = sign_matrix(family, k, pts)
            if np.any(S != s0):
                hit = True
                break
            if np.any(_single_dominant(family.evaluate(pts))):
                done = True
                break
            t = ts[-1]
            if np.any(pts[-1] < lo) or np.any(pts[-1] > hi):
                step *= 2
        if not hit:
            if not done:
                unresolved += 1
            res.record(base[None, :], [f"angle={th:.6f}"])
    res.info.update({
        "rays": len(bases),
        "excluded": excluded,
        "exclusion_fraction": excluded / len(bases),
        "exclusion": exclusion,
        "exclusion_radius": exclusion_cells * h,
        "hit_fraction": (res.samples - res.violations) / res.samples if res.samples else float("nan"),
        "unresolved": unresolved,
    })
    return res


# ---------------------------------------------------------------------------
# Tropical coincidence
# ---------------------------------------------------------------------------


def check_tropical_coincidence(
    family: FunctionFamily, strata=None, grid: Optional[GridSpec] = None, tol: float = 1e-9
) -> CheckResult:
    """Stratum-wise tropical loci agree across k and with the clipped skeleton."""
    ks = _strata(family, strata)
    grid = grid or GridSpec.square(10.0, 201)
    res = CheckResult("tropical_coincidence")
    nodes = grid.nodes()
    on_skel = skeleton_membership(family, nodes, tol)
    masks = {}
    for k in ks:
        T = tropical_gaps(family, k, nodes)
        member = np.any(np.abs(T) <= tol, axis=1)
        res.samples += len(nodes)
        bad = member != on_skel
        res.record(nodes[bad], [f"node k={k}"] * int(bad.sum()))
        masks[k] = stratum_cell_mask(family, k, grid, tol)
    ref = masks[ks[0]]
    for k in ks[1:]:
        diff = masks[k] != ref
        if diff.any():
            res.record(grid.cell_centers()[diff.ravel()], [f"cell mask k={k} differs from k={ks[0]}"] * int(diff.sum()))
    res.info["cells_marked"] = {str(k): int(m.sum()) for k, m in masks.items()}
    if family.n == 2:
        raster = rasterize_skeleton(skeleton_2d(family, "affine"), grid)
        match = masks_match(ref, raster, 1)
        res.info["skeleton_match_within_one_cell"] = match
        if not match:
            res.record(np.zeros((1, 2)), ["skeleton raster differs by more than one cell"])
    return res


# ---------------------------------------------------------------------------
# Whole-suite driver
# ---------------------------------------------------------------------------


def run_verify(
    family: FunctionFamily,
    bbox=None,
    samples: int = 10_000,
    seed: int = 0,
    strata=None,
    expect_violation: Iterable[str] = (),
    neg_rule: Optional[str] = None,
    rays: int = 200,
    grid_res: int = 201,
) -> VerifyReport:
    """Run every check that applies to the family."""
    bbox = [tuple(map(float, ab)) for ab in (bbox or [(-8.0, 8.0)] * family.n)]
    ks = _strata(family, strata)
    expected = sorted(_expected(expect_violation))
    report = VerifyReport({
        "model": family.name or "<file>",
        "bbox": [list(ab) for ab in bbox],
        "samples": samples,
        "seed": seed,
        "strata": ks,
        "tol": DEFAULT_TOL,
        "expect_violation": expected,
        "neg_rule": neg_rule or default_neg_rule(family),
        "exclusion_note": "ray bases within 2 cells of a pairwise tie locus are skipped (numerical stand-in for the dense-subset qualification)",
    })
    report.checks += check_inclusion_and_counts(family, ks, samples, seed, bbox, neg_rule, expected)
    report.checks += check_algebraic_identities(family, min(samples, 1000), seed, bbox, ks)
    if family.is_linear:
        grid = GridSpec.make(bbox, grid_res) if family.n == 2 else GridSpec.make(bbox, min(grid_res, 41))
        report.checks.append(check_tropical_coincidence(family, ks, grid))
        if family.n == 2 and len(ks) >= 2:
            try:
                report.checks.append(ray_escape_test(family, ks[1], ks[0], rays, seed))
            except Inconclusive as exc:
                c = CheckResult("ray_escape")
                c.info["inconclusive"] = str(exc)
                report.checks.append(c)
    for c in report.checks:
        if c.name in expected:
            c.expect_violation = True
    return report
