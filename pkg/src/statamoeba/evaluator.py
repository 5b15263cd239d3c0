"""Sign evaluation of the stratum functions Z_k(I; x), done in log space.

Z_k(I; x) = -sum_{a in I} e^{f_a(x)} + sum_{b not in I} e^{f_b(x)} has the
same sign as the log gap LSE_{b not in I} f_b(x) - LSE_{a in I} f_a(x), and
the gap never overflows.  Direct summation (:func:`zk_value`) is kept only as
a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from ._parallel import run_chunks
from .core_model import (
    FunctionFamily,
    SubsetMask,
    _as_points,
    _check_stratum,
    masks_matrix,
    subset_matrix,
)
from .errors import EmptyTermSet, InvalidSubset, RangeExceeded

DEFAULT_TOL = 1e-12
EXP_LIMIT = 700.0


def log_sum_exp(values: Sequence[float]) -> float:
    vals = [float(v) for v in values]
    if not vals:
        raise EmptyTermSet("log-sum-exp of an empty list")
    m = max(vals)
    if math.isinf(m):
        return m
    return m + math.log(math.fsum(math.exp(v - m) for v in vals))


def _check_subset(family: FunctionFamily, I: SubsetMask) -> None:
    if I.n_terms != family.N:
        raise InvalidSubset(f"mask over {I.n_terms} terms used with a family of {family.N}")
    if I.k == 0 or I.k == family.N:
        raise InvalidSubset("subset must be non-empty with a non-empty complement")


def zk_log_gap(family: FunctionFamily, I: SubsetMask, x) -> float:
    """Log gap whose sign is the sign of Z_k(I; x); zero exactly on the locus."""
    _check_subset(family, I)
    f = family.evaluate(x)[0]
    inside = I.as_bool()
    return log_sum_exp(f[~inside]) - log_sum_exp(f[inside])


def zk_value(family: FunctionFamily, I: SubsetMask, x) -> float:
    """Z_k(I; x) by naive summation; raises RangeExceeded when exponents are too large."""
    _check_subset(family, I)
    f = family.evaluate(x)[0]
    if np.max(np.abs(f)) > EXP_LIMIT:
        raise RangeExceeded("exponent magnitude above 700; use zk_log_gap")
    inside = I.as_bool()
    return float(-np.exp(f[inside]).sum() + np.exp(f[~inside]).sum())


def sign_of(family: FunctionFamily, I: SubsetMask, x, tol: float = DEFAULT_TOL) -> int:
    g = zk_log_gap(family, I, x)
    if abs(g) <= tol:
        return 0
    return 1 if g > 0 else -1


@dataclass(frozen=True)
class SignVector:
    """Signs of all Z_k(I; x) for I in enumeration order."""

    k: int
    entries: np.ndarray

    @property
    def neg_count(self) -> int:
        return int(np.count_nonzero(self.entries < 0))

    @property
    def has_zero(self) -> bool:
        return bool(np.any(self.entries == 0))

    def __len__(self) -> int:
        return len(self.entries)

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self.entries)


def sign_vector(family: FunctionFamily, k: int, x, tol: float = DEFAULT_TOL) -> SignVector:
    _check_stratum(family.N, k)
    F = family.evaluate(x)
    g = log_gaps(F, subset_matrix(family.N, k))[0]
    return SignVector(k, signs_from_gaps(g, tol))


class Z0(NamedTuple):
    """Z_0(x) = e^max * rest, stored as (max exponent, log of the rescaled sum)."""

    max_exponent: float
    log_rest: float

    @property
    def log(self) -> float:
        return self.max_exponent + self.log_rest

    @property
    def value(self) -> float:
        return math.exp(self.log)


def z0(family: FunctionFamily, x) -> Z0:
    f = family.evaluate(x)[0]
    m = float(np.max(f))
    return Z0(m, math.log(math.fsum(math.exp(v - m) for v in f)))


# ---------------------------------------------------------------------------
# Vectorized paths
# ---------------------------------------------------------------------------


def _lse_row(v: np.ndarray) -> float:
    m = v.max()
    return float(m + np.log(np.exp(v - m).sum()))


def log_gaps(F: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Log gaps for exponent rows ``F`` (P, N) against boolean ``masks`` (C, N)."""
    F = np.asarray(F, dtype=float)
    m = F.max(axis=1, keepdims=True)
    E = np.exp(F - m)
    Mi = masks.T.astype(float)
    s_in = E @ Mi
    s_out = E @ (1.0 - Mi)
    with np.errstate(divide="ignore"):
        g = np.log(s_out) - np.log(s_in)
    bad = ~np.isfinite(g)
    if bad.any():
        # a whole side underflowed relative to the max; redo those exactly
        for p, c in zip(*np.nonzero(bad)):
            g[p, c] = _lse_row(F[p, ~masks[c]]) - _lse_row(F[p, masks[c]])
    return g


def signs_from_gaps(g: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
    s = np.sign(g).astype(np.int8)
    s[np.abs(g) <= tol] = 0
    return s


def _chunk_for(C: int) -> int:
    return max(256, (1 << 20) // max(C, 1))


def _resolve_masks(family: FunctionFamily, subsets) -> np.ndarray:
    if isinstance(subsets, (int, np.integer)):
        _check_stratum(family.N, int(subsets))
        return subset_matrix(family.N, int(subsets))
    if isinstance(subsets, np.ndarray):
        return subsets
    return masks_matrix(list(subsets))


def gap_matrix(family: FunctionFamily, subsets, points, workers: int | None = None) -> np.ndarray:
    """Log gaps at many points; ``subsets`` is a stratum k, a mask list, or a bool matrix."""
    masks = _resolve_masks(family, subsets)
    pts = _as_points(points, family.n)
    out = np.empty((pts.shape[0], masks.shape[0]))

    def work(s, e):
        out[s:e] = log_gaps(family.evaluate(pts[s:e]), masks)

    run_chunks(work, pts.shape[0], _chunk_for(masks.shape[0]), workers)
    return out


def sign_matrix(
    family: FunctionFamily, subsets, points, tol: float = DEFAULT_TOL, workers: int | None = None
) -> np.ndarray:
    """int8 signs (P, C); memory stays bounded by evaluating in chunks."""
    masks = _resolve_masks(family, subsets)
    pts = _as_points(points, family.n)
    out = np.empty((pts.shape[0], masks.shape[0]), dtype=np.int8)

    def work(s, e):
        out[s:e] = signs_from_gaps(log_gaps(family.evaluate(pts[s:e]), masks), tol)

    run_chunks(work, pts.shape[0], _chunk_for(masks.shape[0]), workers)
    return out
