"""Rectangular sampling grids over a bounding box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .errors import DimensionUnsupported


@dataclass(frozen=True)
class GridSpec:
    """Per-axis ``(lo, hi)`` intervals and node counts; nodes include both ends."""

    bbox: tuple[tuple[float, float], ...]
    resolution: tuple[int, ...]

    def __post_init__(self):
        if len(self.bbox) != len(self.resolution):
            raise ValueError("bbox and resolution must have the same number of axes")
        if not 1 <= len(self.bbox) <= 3:
            raise DimensionUnsupported("grids support n in {1, 2, 3}")
        for lo, hi in self.bbox:
            if not lo < hi:
                raise ValueError(f"empty axis interval [{lo}, {hi}]")
        if any(r < 2 for r in self.resolution):
            raise ValueError("resolution must be >= 2 per axis")

    @classmethod
    def make(cls, bbox: Sequence[Sequence[float]], resolution: Union[int, Sequence[int]]) -> "GridSpec":
        box = tuple((float(lo), float(hi)) for lo, hi in bbox)
        if isinstance(resolution, (int, np.integer)):
            res = (int(resolution),) * len(box)
        else:
            res = tuple(int(r) for r in resolution)
            if len(res) == 1:
                res = res * len(box)
        return cls(box, res)

    @classmethod
    def square(cls, half_width: float, resolution: int, n: int = 2) -> "GridSpec":
        return cls.make([(-half_width, half_width)] * n, resolution)

    @property
    def n(self) -> int:
        return len(self.bbox)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.resolution

    @property
    def cell_shape(self) -> tuple[int, ...]:
        return tuple(r - 1 for r in self.resolution)

    @property
    def cell_size(self) -> tuple[float, ...]:
        return tuple((hi - lo) / (r - 1) for (lo, hi), r in zip(self.bbox, self.resolution))

    @property
    def cell_diagonal(self) -> float:
        return float(np.linalg.norm(self.cell_size))

    def axes(self) -> list[np.ndarray]:
        return [np.linspace(lo, hi, r) for (lo, hi), r in zip(self.bbox, self.resolution)]

    def nodes(self) -> np.ndarray:
        """All nodes, shape (prod(resolution), n), C order over (i, j[, l])."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_centers(self) -> np.ndarray:
        mids = [(a[:-1] + a[1:]) / 2 for a in self.axes()]
        mesh = np.meshgrid(*mids, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def nearest_node(self, point) -> tuple[int, ...]:
        idx = []
        for x, (lo, hi), r, h in zip(point, self.bbox, self.resolution, self.cell_size):
            idx.append(int(np.clip(round((x - lo) / h), 0, r - 1)))
        return tuple(idx)

    def cell_of(self, point) -> tuple[int, ...]:
        idx = []
        for x, (lo, hi), r, h in zip(point, self.bbox, self.resolution, self.cell_size):
            idx.append(int(np.clip(np.floor((x - lo) / h), 0, r - 2)))
        return tuple(idx)

    def contains(self, point) -> bool:
        return all(lo <= x <= hi for x, (lo, hi) in zip(point, self.bbox))
