"""Closed planar polygons with prescribed side lengths.

A list of positive lengths closes up into a polygon iff no entry is at
least the sum of the others.  The construction splits off a triangle on
the longest and shortest sides through an auxiliary chord, realizes the
rest recursively, and glues the two along the chord.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from typing import Iterator, Optional, Sequence

import numpy as np

from .core_model import FunctionFamily, _check_stratum
from .errors import Lopsided

EQ_RTOL = 1e-12
ENUMERATE_MAX_N = 8


@dataclass(frozen=True)
class LopsidedCheck:
    index: Optional[int]  # 1-based label of the dominating entry
    degenerate: bool  # the entry equals the sum of the others

    @property
    def lopsided(self) -> bool:
        return self.index is not None and not self.degenerate

    @property
    def realizable(self) -> bool:
        return self.index is None


def lopsided_index(lengths: Sequence[float]) -> LopsidedCheck:
    L = np.asarray(lengths, dtype=float)
    if L.size < 2:
        raise ValueError("need at least two lengths")
    if np.any(~(L > 0)) or not np.all(np.isfinite(L)):
        raise ValueError("lengths must be positive and finite")
    i = int(np.argmax(L))
    total = math.fsum(L)
    rest = total - L[i]
    if abs(L[i] - rest) <= EQ_RTOL * total:
        return LopsidedCheck(i + 1, True)
    if L[i] > rest:
        return LopsidedCheck(i + 1, False)
    return LopsidedCheck(None, False)


@dataclass(frozen=True)
class Polygon:
    vertices: np.ndarray  # (g + 1, 2), last vertex repeats the first
    order: tuple[int, ...]  # side i has length lengths[order[i]]
    degenerate: bool

    @property
    def sides(self) -> np.ndarray:
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)

    @property
    def closure_error(self) -> float:
        return float(np.linalg.norm(self.vertices[-1] - self.vertices[0]))

    @property
    def signed_area(self) -> float:
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))

    def to_dict(self) -> dict:
        return {
            "vertices": [[float(a), float(b)] for a, b in self.vertices],
            "order": list(self.order),
            "degenerate": self.degenerate,
        }


_CHORD = -1


def _triangle(a: float, b: float, c: float) -> tuple[list[complex], bool]:
    """Side vectors of a counterclockwise triangle with sides a, b, c in turn.

    The apex is placed by coordinates rather than through an angle, which
    keeps side lengths exact to rounding even for nearly flat triangles.
    """
    px = (a * a + c * c - b * b) / (2 * a)
    py2 = (c - px) * (c + px)
    flat = py2 <= 1e-24 * c * c
    apex = complex(px, math.sqrt(max(py2, 0.0)))
    return [complex(a, 0.0), apex - a, -apex], flat


def _realize(items: list[tuple[int, float]]) -> tuple[list[tuple[int, complex]], bool]:
    items = sorted(items, key=lambda t: (-t[1], t[0]))
    if len(items) == 3:
        vecs, flat = _triangle(items[0][1], items[1][1], items[2][1])
        return [(items[i][0], vecs[i]) for i in range(3)], flat

    lens = [v for _, v in items]
    lo = max(lens[1], lens[0] - lens[-1])
    hi = min(lens[0], math.fsum(lens[1:-1]))
    chord = 0.5 * (lo + hi)
    # the chord needs its own id at each recursion depth
    chord_id = _CHORD - len(items)

    tri, flat1 = _triangle(lens[0], chord, lens[-1])
    tri_ids = [items[0][0], chord_id, items[-1][0]]
    rest, flat2 = _realize([(chord_id, chord)] + items[1:-1])

    pos = next(i for i, (sid, _) in enumerate(rest) if sid == chord_id)
    rot = -tri[1] / rest[pos][1]
    rot /= abs(rot)
    tail = rest[pos + 1:] + rest[:pos]
    glued = [(tri_ids[0], tri[0])] + [(sid, v * rot) for sid, v in tail] + [(tri_ids[2], tri[2])]
    return glued, flat1 or flat2 or hi - lo <= EQ_RTOL * lens[0]


def build_closed_polygon(lengths: Sequence[float], tol: float = 1e-9) -> Polygon:
    """Counterclockwise polygon starting at the origin, first side along +x."""
    check = lopsided_index(lengths)
    if check.lopsided:
        raise Lopsided(check.index)
    L = [float(v) for v in lengths]
    if len(L) < 3:
        raise ValueError("a closed polygon needs at least three sides")
    sides, flat = _realize(list(enumerate(L)))
    first = sides[0][1]
    turn = first.conjugate() / abs(first)
    vecs = np.array([v * turn for _, v in sides])
    pts = np.concatenate([[0j], np.cumsum(vecs)])
    verts = np.c_[pts.real, pts.imag]
    poly = Polygon(verts, tuple(sid for sid, _ in sides), check.degenerate or flat)
    if poly.closure_error > tol * max(L):
        raise ArithmeticError(f"closure error {poly.closure_error:.3e} above tolerance")
    return poly


def set_partitions(n: int, min_blocks: int = 1) -> Iterator[list[list[int]]]:
    """All partitions of range(n) with at least ``min_blocks`` blocks."""

    def rec(i: int, blocks: list[list[int]]):
        if n - i + len(blocks) < min_blocks:
            return
        if i == n:
            yield [b[:] for b in blocks]
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(0, [])


@lru_cache(maxsize=None)
def _partitions_for(N: int, k: int) -> list[list[list[int]]]:
    if N <= ENUMERATE_MAX_N:
        return list(set_partitions(N, N - k + 1))
    # singletons plus one k-block is the binding case
    out = [[[a] for a in range(N)]]
    for block in combinations(range(N), k):
        rest = [[a] for a in range(N) if a not in block]
        out.append([list(block)] + rest)
    return out


def k_constructibility_check(family: FunctionFamily, k: int, x, tol: float = EQ_RTOL) -> bool:
    """True iff every tested partition with >= N-k+1 blocks has non-lopsided block sums."""
    _check_stratum(family.N, k)
    f = family.evaluate(x)[0]
    w = np.exp(f - f.max())
    for part in _partitions_for(family.N, k):
        sums = [math.fsum(w[b]) for b in part]
        if not lopsided_index(sums).realizable:
            return False
    return True
