"""Exponent-function families and k-subset bookkeeping.

Every other module takes its ordering conventions from here: subsets of
``[N]`` are enumerated lexicographically on their sorted element lists, and
that order fixes the component index of every sign vector.

Function indices are 1-based in files, presets and user-facing strings, and
0-based everywhere inside arrays.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import InvalidModel, InvalidStratum, InvalidSubset, LinearOnly, ModelTooLarge

MAX_TERMS = 24
MAX_EXPONENT = 12


def _as_points(x, n: int) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(1, -1)
    if pts.shape[-1] != n:
        raise ValueError(f"expected points with {n} coordinates, got shape {pts.shape}")
    return pts


# ---------------------------------------------------------------------------
# Function specs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LinearSpec:
    """f(x) = b + a.x"""

    b: float
    a: tuple[float, ...]
    kind = "linear"

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        return self.b + pts @ np.asarray(self.a, dtype=float)

    def to_dict(self) -> dict:
        return {"kind": "linear", "b": self.b, "a": list(self.a)}


@dataclass(frozen=True)
class PolynomialSpec:
    """Sum of monomials; ``terms`` holds (coefficient, exponent tuple) pairs."""

    terms: tuple[tuple[float, tuple[int, ...]], ...]
    kind = "polynomial"

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        out = np.zeros(pts.shape[0])
        for c, e in self.terms:
            mono = np.ones(pts.shape[0])
            for i, p in enumerate(e):
                if p:
                    mono = mono * pts[:, i] ** p
            out += c * mono
        return out

    @property
    def degree(self) -> int:
        return max((sum(e) for c, e in self.terms if c != 0), default=0)

    def linear_form(self, n: int) -> tuple[float, tuple[float, ...]]:
        b = 0.0
        a = [0.0] * n
        for c, e in self.terms:
            d = sum(e)
            if d == 0:
                b += c
            elif d == 1:
                a[e.index(1)] += c
            elif c != 0:
                raise ValueError("polynomial is not affine")
        return b, tuple(a)

    def to_dict(self) -> dict:
        return {"kind": "polynomial", "terms": [{"c": c, "e": list(e)} for c, e in self.terms]}


def bump_eta(z: np.ndarray) -> np.ndarray:
    """1 - exp(-z^2/(1-z^2)) inside |z| < 1, and 1 outside."""
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    inside = np.abs(z) < 1.0
    zi = z[inside]
    out[inside] = 1.0 - np.exp(-(zi * zi) / (1.0 - zi * zi))
    return out


@dataclass(frozen=True)
class RadialBumpSpec:
    """Built-in radial bump with threshold radius (alpha + 1999) / 1000.

    Inside the threshold the profile is scaled by ``c``, outside by ``d``.
    """

    alpha: int
    c: float
    d: float
    kind = "radial_bump"

    @property
    def radius(self) -> float:
        return (self.alpha + 1999) / 1000.0

    def evaluate(self, pts: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(pts, axis=1)
        eta = bump_eta(r - self.radius)
        return np.where(self.radius > r, self.c * eta, self.d * eta)

    def to_dict(self) -> dict:
        return {"kind": "radial_bump", "alpha": self.alpha, "c": self.c, "d": self.d}


FunctionSpec = Union[LinearSpec, PolynomialSpec, RadialBumpSpec]


# ---------------------------------------------------------------------------
# Families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FunctionFamily:
    n: int
    specs: tuple[FunctionSpec, ...]
    name: str = ""

    def __post_init__(self):
        if self.n < 1:
            raise InvalidModel("dimension n must be >= 1")
        if len(self.specs) < 2:
            raise InvalidModel("a family needs at least two functions")
        if len(self.specs) > MAX_TERMS:
            raise ModelTooLarge(f"N={len(self.specs)} exceeds the cap of {MAX_TERMS} terms")
        for s in self.specs:
            if isinstance(s, LinearSpec) and len(s.a) != self.n:
                raise InvalidModel("linear coefficient vector has wrong length")
            if isinstance(s, PolynomialSpec):
                for _, e in s.terms:
                    if len(e) != self.n:
                        raise InvalidModel("monomial exponent vector has wrong length")
                    if any((not isinstance(p, int)) or p < 0 or p > MAX_EXPONENT for p in e):
                        raise InvalidModel(f"exponents must be integers in [0, {MAX_EXPONENT}]")

    @property
    def N(self) -> int:
        return len(self.specs)

    @property
    def is_linear(self) -> bool:
        """True when every function is affine (polynomials of degree <= 1 count)."""
        return all(
            isinstance(s, LinearSpec) or (isinstance(s, PolynomialSpec) and s.degree <= 1)
            for s in self.specs
        )

    @property
    def is_polynomial(self) -> bool:
        return all(isinstance(s, (LinearSpec, PolynomialSpec)) for s in self.specs)

    def evaluate(self, x) -> np.ndarray:
        """Matrix of exponents f_alpha(x), shape (P, N)."""
        pts = _as_points(x, self.n)
        return np.stack([s.evaluate(pts) for s in self.specs], axis=1)

    def linear_parts(self) -> tuple[np.ndarray, np.ndarray]:
        """Coefficient matrix A (N, n) and constants b (N,) of an affine family."""
        if not self.is_linear:
            raise LinearOnly("operation requires an affine (linear) family")
        A = np.zeros((self.N, self.n))
        b = np.zeros(self.N)
        for i, s in enumerate(self.specs):
            if isinstance(s, LinearSpec):
                b[i], A[i] = s.b, s.a
            else:
                bi, ai = s.linear_form(self.n)
                b[i], A[i] = bi, ai
        return A, b

    def to_dict(self) -> dict:
        return {"n": self.n, "functions": [s.to_dict() for s in self.specs]}


def linear_family(A, b=None, name: str = "") -> FunctionFamily:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
    specs = tuple(LinearSpec(float(bi), tuple(float(v) for v in ai)) for ai, bi in zip(A, b))
    return FunctionFamily(A.shape[1], specs, name)


def evaluate_f(family: FunctionFamily, alpha: int, x) -> float:
    """Value of f_alpha at a single point; ``alpha`` is 1-based."""
    if not 1 <= alpha <= family.N:
        raise IndexError(f"alpha must be in 1..{family.N}")
    pts = _as_points(x, family.n)
    return float(family.specs[alpha - 1].evaluate(pts)[0])


def validate_family(family: FunctionFamily) -> list[str]:
    warnings = []
    if family.N < 3:
        warnings.append(f"N={family.N} < 3: pairwise disjointness of 1-stratum loci is not guaranteed")
    seen: dict[tuple, int] = {}
    for i, s in enumerate(family.specs, start=1):
        if isinstance(s, LinearSpec):
            key = ("lin", s.b, s.a)
        elif isinstance(s, PolynomialSpec):
            key = ("poly", tuple(sorted((e, c) for c, e in s.terms if c != 0)))
        else:
            key = ("bump", s.alpha, s.c, s.d)
        if key in seen:
            warnings.append(f"f_{seen[key]} and f_{i} are identical (difference vanishes identically)")
        else:
            seen[key] = i
    return warnings


# ---------------------------------------------------------------------------
# JSON model files
# ---------------------------------------------------------------------------


def _spec_from_dict(d: dict, n: int) -> FunctionSpec:
    kind = d.get("kind")
    try:
        if kind == "linear":
            return LinearSpec(float(d["b"]), tuple(float(v) for v in d["a"]))
        if kind == "polynomial":
            terms = []
            for t in d["terms"]:
                e = t["e"]
                if any(isinstance(p, float) and not float(p).is_integer() for p in e):
                    raise InvalidModel("polynomial exponents must be integers")
                terms.append((float(t["c"]), tuple(int(p) for p in e)))
            return PolynomialSpec(tuple(terms))
        if kind in ("radial_bump", "radial_bump_builtin"):
            return RadialBumpSpec(int(d["alpha"]), float(d["c"]), float(d["d"]))
    except (KeyError, TypeError) as exc:
        raise InvalidModel(f"malformed function entry {d!r}") from exc
    raise InvalidModel(f"unknown function kind {kind!r}")


def family_from_dict(data: dict, name: str = "") -> FunctionFamily:
    try:
        n = int(data["n"])
        funcs = data["functions"]
    except (KeyError, TypeError) as exc:
        raise InvalidModel("model needs 'n' and 'functions'") from exc
    return FunctionFamily(n, tuple(_spec_from_dict(d, n) for d in funcs), name)


def load_model(path: Union[str, Path]) -> FunctionFamily:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        data = json.load(fh)
    return family_from_dict(data, name=path.stem)


def dump_model(family: FunctionFamily) -> str:
    return json.dumps(family.to_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# Subsets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsetMask:
    bits: int
    n_terms: int

    @classmethod
    def from_elements(cls, elements: Iterable[int], n_terms: int) -> "SubsetMask":
        """Build from 1-based element labels."""
        bits = 0
        for e in elements:
            if not 1 <= e <= n_terms:
                raise InvalidSubset(f"element {e} outside 1..{n_terms}")
            bits |= 1 << (e - 1)
        return cls(bits, n_terms)

    @property
    def k(self) -> int:
        return bin(self.bits).count("1")

    @property
    def indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n_terms) if self.bits >> i & 1)

    @property
    def elements(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.indices)

    def complement(self) -> "SubsetMask":
        return SubsetMask(~self.bits & ((1 << self.n_terms) - 1), self.n_terms)

    def as_bool(self) -> np.ndarray:
        return np.array([self.bits >> i & 1 for i in range(self.n_terms)], dtype=bool)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.elements)) + "}"


def _check_stratum(N: int, k: int) -> None:
    if not 1 <= k <= N // 2:
        raise InvalidStratum(f"stratum k={k} outside 1..{N // 2} for N={N}")


@lru_cache(maxsize=256)
def _subsets(N: int, k: int) -> tuple[SubsetMask, ...]:
    return tuple(
        SubsetMask(sum(1 << i for i in combo), N) for combo in itertools.combinations(range(N), k)
    )


def enumerate_subsets(N: int, k: int) -> list[SubsetMask]:
    """All k-subsets of [N] in lexicographic order of their sorted elements."""
    _check_stratum(N, k)
    return list(_subsets(N, k))


def dedup_for_loci(subsets: Sequence[SubsetMask], N: int) -> list[SubsetMask]:
    """Drop the second member of each complementary pair when 2k = N."""
    if not subsets:
        return []
    k = subsets[0].k
    if any(s.k != k for s in subsets):
        raise InvalidSubset("all masks must have the same cardinality")
    if 2 * k != N:
        return list(subsets)
    return [s for s in subsets if s.elements < s.complement().elements]


@lru_cache(maxsize=256)
def _subset_matrix(N: int, k: int) -> np.ndarray:
    M = np.zeros((math.comb(N, k), N), dtype=bool)
    for t, combo in enumerate(itertools.combinations(range(N), k)):
        M[t, list(combo)] = True
    M.setflags(write=False)
    return M


def subset_matrix(N: int, k: int) -> np.ndarray:
    """Boolean membership matrix (C(N,k), N) in enumeration order."""
    return _subset_matrix(N, k)


def masks_matrix(subsets: Sequence[SubsetMask]) -> np.ndarray:
    if not subsets:
        return np.zeros((0, 0), dtype=bool)
    return np.stack([s.as_bool() for s in subsets])
