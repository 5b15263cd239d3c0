"""Grid classification into stable, maximally unstable and mixed-sign cells.

Cells, not nodes, carry the classification: a cell gets a class only when all
of its corners share one sign vector with no zero entry, otherwise it is
BOUNDARY.  Mixed cells are then split into connected subdomains of constant
sign vector (4-connectivity in 2D, 6 in 3D).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import ndimage

from .core_model import FunctionFamily, _check_stratum, dedup_for_loci, enumerate_subsets
from .errors import ModelTooLarge, NotLabeled, OnBoundary
from .evaluator import DEFAULT_TOL, SignVector, sign_matrix
from .grid import GridSpec

# max C(N,k) * node count evaluated in one classification
NODE_BUDGET = 200_000_000


class CellClass(enum.IntEnum):
    BOUNDARY = 0
    POS = 1
    NEG = 2
    ZCD = 3


class DomainKind(str, enum.Enum):
    POS = "POS"
    NEG = "NEG"
    MIXED = "MIXED"


def ekr_count(N: int, k: int) -> int:
    """Largest possible number of negative entries in a k-sign vector."""
    return math.comb(N - 1, k - 1)


def _pair_representatives(N: int, k: int) -> np.ndarray:
    subs = enumerate_subsets(N, k)
    keep = {s.bits for s in dedup_for_loci(subs, N)}
    return np.array([s.bits in keep for s in subs])


def vector_classes(S: np.ndarray, N: int, k: int, neg_threshold: Optional[int] = None) -> np.ndarray:
    """CellClass for each row of a sign matrix; rows with a zero are BOUNDARY.

    ``neg_threshold`` is the negative count that marks the unstable domain
    when 2k < N.  It defaults to the intersecting-family maximum.
    """
    S = np.atleast_2d(S)
    out = np.full(S.shape[0], CellClass.ZCD, dtype=np.int8)
    if 2 * k == N:
        rep = S[:, _pair_representatives(N, k)]
        out[np.all(rep > 0, axis=1)] = CellClass.POS
        out[np.all(rep < 0, axis=1)] = CellClass.NEG
    else:
        neg = np.count_nonzero(S < 0, axis=1)
        thr = ekr_count(N, k) if neg_threshold is None else neg_threshold
        out[neg == 0] = CellClass.POS
        if thr > 0:
            out[neg == thr] = CellClass.NEG
    out[np.any(S == 0, axis=1)] = CellClass.BOUNDARY
    return out


def domain_class(v: SignVector, N: int, k: int) -> DomainKind:
    if v.has_zero:
        raise OnBoundary("sign vector has a zero entry")
    c = vector_classes(v.entries[None, :], N, k)[0]
    return {CellClass.POS: DomainKind.POS, CellClass.NEG: DomainKind.NEG}.get(CellClass(c), DomainKind.MIXED)


def mean_spin(v) -> float:
    """Average entry of a sign vector; always within [1 - 2k/N, 1]."""
    e = np.asarray(v.entries if isinstance(v, SignVector) else v)
    if np.any(e == 0):
        raise OnBoundary("mean spin is undefined on a locus")
    return float(e.sum()) / e.size


@dataclass
class RegionMap:
    grid: GridSpec
    k: int
    N: int
    cell_class: np.ndarray  # int8, grid.cell_shape
    cell_sign: np.ndarray  # int32 row of sign_table, -1 on BOUNDARY cells
    sign_table: np.ndarray  # (V, C) int8, distinct zero-free node vectors, sorted
    node_sign: np.ndarray  # int32 row of sign_table per node, -1 where a zero occurs
    neg_threshold: int
    components: Optional[np.ndarray] = None  # int32 delta per cell, 0 outside ZCD
    component_sign: list[int] = field(default_factory=list)

    @property
    def labeled(self) -> bool:
        return self.components is not None

    @property
    def M(self) -> int:
        if self.components is None:
            raise NotLabeled("call label_subdomains first")
        return len(self.component_sign)

    @property
    def neg_counts(self) -> np.ndarray:
        return np.count_nonzero(self.sign_table < 0, axis=1)

    def cell_neg_count(self) -> np.ndarray:
        """Negative count per cell, -1 on BOUNDARY cells."""
        nc = np.append(self.neg_counts, -1)
        return nc[self.cell_sign]

    def class_counts(self) -> dict[str, int]:
        return {c.name: int(np.count_nonzero(self.cell_class == c)) for c in CellClass}

    def cell_of(self, point) -> tuple[int, ...]:
        return self.grid.cell_of(point)

    def class_at(self, point) -> CellClass:
        return CellClass(int(self.cell_class[self.cell_of(point)]))

    def node_class(self, point) -> CellClass:
        """Class of the sign vector at the grid node nearest ``point``."""
        sid = int(self.node_sign[self.grid.nearest_node(point)])
        if sid < 0:
            return CellClass.BOUNDARY
        return CellClass(int(vector_classes(self.sign_table[sid], self.N, self.k, self.neg_threshold)[0]))


def _corner_views(a: np.ndarray) -> list[np.ndarray]:
    n = a.ndim
    views = []
    for corner in range(1 << n):
        sl = tuple(slice(1, None) if (corner >> d) & 1 else slice(None, -1) for d in range(n))
        views.append(a[sl])
    return views


def classify_grid(
    family: FunctionFamily,
    k: int,
    grid: GridSpec,
    tol: float = DEFAULT_TOL,
    neg_rule: str = "ekr",
    workers: Optional[int] = None,
) -> RegionMap:
    """Evaluate every node and classify every cell.

    ``neg_rule`` is ``"ekr"`` (unstable means the maximal count allowed by
    the intersecting-family bound) or ``"observed"`` (the largest count seen
    on this grid); the two agree whenever the bound is attained.
    """
    _check_stratum(family.N, k)
    if grid.n != family.n:
        raise ValueError(f"grid has {grid.n} axes, family has n={family.n}")
    n_nodes = int(np.prod(grid.shape))
    C = math.comb(family.N, k)
    if C * n_nodes > NODE_BUDGET:
        raise ModelTooLarge(f"{C} subsets x {n_nodes} nodes exceeds budget {NODE_BUDGET}")

    S = sign_matrix(family, k, grid.nodes(), tol, workers)
    zero = np.any(S == 0, axis=1)
    table, inv = np.unique(S[~zero], axis=0, return_inverse=True)
    node_sign = np.full(n_nodes, -1, dtype=np.int32)
    node_sign[~zero] = inv.ravel()
    node_sign = node_sign.reshape(grid.shape)

    if neg_rule == "ekr":
        thr = ekr_count(family.N, k)
    elif neg_rule == "observed":
        nc = np.count_nonzero(table < 0, axis=1)
        thr = int(nc.max()) if nc.size else 0
    else:
        raise ValueError(f"unknown neg_rule {neg_rule!r}")

    corners = _corner_views(node_sign)
    cell_sign = corners[0].copy()
    for other in corners[1:]:
        cell_sign[other != corners[0]] = -1
    cell_sign[corners[0] < 0] = -1

    vclass = np.append(vector_classes(table, family.N, k, thr), CellClass.BOUNDARY).astype(np.int8)
    cell_class = vclass[cell_sign]
    return RegionMap(grid, k, family.N, cell_class, cell_sign.astype(np.int32), table, node_sign, thr)


def label_subdomains(rmap: RegionMap) -> RegionMap:
    """Connected components of equal-vector ZCD cells, numbered 1..M in scan order."""
    zcd = rmap.cell_class == CellClass.ZCD
    structure = ndimage.generate_binary_structure(rmap.cell_class.ndim, 1)
    raw = np.zeros(rmap.cell_class.shape, dtype=np.int64)
    offset = 0
    for sid in np.unique(rmap.cell_sign[zcd]):
        lab, count = ndimage.label(zcd & (rmap.cell_sign == sid), structure=structure)
        raw[lab > 0] = lab[lab > 0] + offset
        offset += count

    flat = raw.ravel()
    present = flat > 0
    labels, first = np.unique(flat[present], return_index=True)
    order = labels[np.argsort(np.flatnonzero(present)[first], kind="stable")]
    remap = np.zeros(offset + 1, dtype=np.int32)
    remap[order] = np.arange(1, len(order) + 1, dtype=np.int32)
    components = remap[raw]

    flat_sign = rmap.cell_sign.ravel()
    flat_comp = components.ravel()
    comp_sign = [0] * len(order)
    idx = np.flatnonzero(flat_comp)
    for i in idx[np.unique(flat_comp[idx], return_index=True)[1]]:
        comp_sign[flat_comp[i] - 1] = int(flat_sign[i])
    return replace(rmap, components=components, component_sign=comp_sign)


@dataclass(frozen=True)
class SpinState:
    label: str  # "D+", "D-" or "ZCD:<delta>"
    total_spin: int
    energy: float
    interaction: float
    weight: float


@dataclass(frozen=True)
class SpinThermo:
    states: tuple[SpinState, ...]
    Z: float


def spin_thermodynamics(
    rmap: RegionMap, beta: float, H: float, gamma: float = 0.0, boltzmann: bool = False
) -> SpinThermo:
    """Energies and partition function over the domains present on the map.

    Each of D+, D- (if present) and every ZCD subdomain counts as one state.
    The default weight is exp(-beta*H*sum S); ``boltzmann=True`` uses
    exp(-beta*E) with E = -H*sum S instead.
    """
    if not rmap.labeled:
        raise NotLabeled("call label_subdomains first")
    sums = rmap.sign_table.sum(axis=1, dtype=np.int64)
    raw: list[tuple[str, int]] = []
    for cls, label in ((CellClass.POS, "D+"), (CellClass.NEG, "D-")):
        ids = np.unique(rmap.cell_sign[rmap.cell_class == cls])
        if ids.size:
            raw.append((label, int(sums[ids[0]])))
    for delta, sid in enumerate(rmap.component_sign, start=1):
        raw.append((f"ZCD:{delta}", int(sums[sid])))

    states = []
    for label, s in raw:
        energy = -H * s
        w = math.exp(-beta * energy) if boltzmann else math.exp(-beta * H * s)
        states.append(SpinState(label, s, energy, gamma * s * s, w))
    return SpinThermo(tuple(states), math.fsum(st.weight for st in states))
