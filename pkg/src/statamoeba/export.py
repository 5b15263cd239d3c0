"""Deterministic text artifacts: CSV tables, JSON documents and SVG pictures.

Every writer returns a string.  JSON uses sorted keys and two-space
indentation, floats are written with ``repr`` so that equal inputs give
byte-equal files, and nothing depends on wall-clock time or worker count.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .loci import ContourSet, StratumLoci
from .polygon import Polygon
from .regions import CellClass, RegionMap
from .tropical import TropicalSkeleton

# fixed palette; ZCD shades run light to dark with the negative count
POS_COLOR = "#1f4fbf"
NEG_COLOR = "#ffffff"
BOUNDARY_COLOR = "#d62728"
ZCD_LIGHT = (199, 233, 192)
ZCD_DARK = (0, 68, 27)
CURVE_COLORS = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)

SVG_SIZE = 600


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_text(path: Union[str, Path], text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def _num(v: float) -> str:
    return repr(float(v))


def _axis_names(n: int) -> list[str]:
    return ["x", "y", "z"][:n]


# ---------------------------------------------------------------------------
# Region maps
# ---------------------------------------------------------------------------


def _cell_spin(rmap: RegionMap) -> np.ndarray:
    C = rmap.sign_table.shape[1] if rmap.sign_table.size else 1
    spins = np.append(rmap.sign_table.sum(axis=1) / C, np.nan)
    return spins[rmap.cell_sign]


def region_csv(rmap: RegionMap) -> str:
    """One row per cell centre: coordinates, class, subdomain, negatives, mean spin.

    ``delta`` is the subdomain label (0 outside ZCD or when unlabeled);
    ``neg_count`` and ``mean_spin`` are empty on BOUNDARY cells.
    """
    grid = rmap.grid
    centers = grid.cell_centers()
    cls = rmap.cell_class.ravel()
    delta = rmap.components.ravel() if rmap.labeled else np.zeros(cls.size, dtype=np.int32)
    negs = rmap.cell_neg_count().ravel()
    spin = _cell_spin(rmap).ravel()
    names = [CellClass(c).name for c in range(4)]

    lines = [",".join(_axis_names(grid.n) + ["class", "delta", "neg_count", "mean_spin"])]
    for p, c, d, nc, s in zip(centers.tolist(), cls.tolist(), delta.tolist(), negs.tolist(), spin.tolist()):
        coords = ",".join(repr(v) for v in p)
        if nc < 0:
            lines.append(f"{coords},{names[c]},{d},,")
        else:
            lines.append(f"{coords},{names[c]},{d},{nc},{s!r}")
    return "\n".join(lines) + "\n"


def region_summary(rmap: RegionMap) -> dict:
    nc = rmap.neg_counts
    C = rmap.sign_table.shape[1] if rmap.sign_table.size else 0
    table = []
    for sid, row in enumerate(rmap.sign_table):
        table.append({
            "id": sid,
            "signs": [int(v) for v in row],
            "neg_count": int(nc[sid]),
            "mean_spin": float(row.sum()) / C,
            "cells": int(np.count_nonzero(rmap.cell_sign == sid)),
        })
    out = {
        "k": rmap.k,
        "N": rmap.N,
        "bbox": [list(ab) for ab in rmap.grid.bbox],
        "resolution": list(rmap.grid.resolution),
        "neg_threshold": rmap.neg_threshold,
        "counts": rmap.class_counts(),
        "sign_vectors": table,
    }
    if rmap.labeled:
        out["M"] = rmap.M
        out["subdomains"] = [
            {"delta": d, "sign_id": sid, "cells": int(np.count_nonzero(rmap.components == d))}
            for d, sid in enumerate(rmap.component_sign, start=1)
        ]
    return out


def region_json(rmap: RegionMap) -> str:
    return dumps(region_summary(rmap))


def _zcd_color(neg: int, top: int) -> str:
    t = 0.0 if top <= 1 else min(1.0, max(0.0, (neg - 1) / (top - 1)))
    rgb = [round(a + t * (b - a)) for a, b in zip(ZCD_LIGHT, ZCD_DARK)]
    return "#%02x%02x%02x" % tuple(rgb)


def _svg_open(width_units: float, height_units: float, view: str) -> list[str]:
    scale = SVG_SIZE / max(width_units, height_units)
    w, h = round(width_units * scale), round(height_units * scale)
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="{view}" '
        'preserveAspectRatio="none" shape-rendering="crispEdges">',
    ]


def region_svg(rmap: RegionMap) -> str:
    """Raster of the cell classes, one rect per horizontal run of equal colour."""
    if rmap.grid.n != 2:
        raise ValueError("region SVG is two-dimensional only")
    nx, ny = rmap.grid.cell_shape
    negs = rmap.cell_neg_count()
    top = max(int(rmap.neg_counts.max()) if rmap.neg_counts.size else 1, 1)
    fixed = {CellClass.POS: POS_COLOR, CellClass.NEG: NEG_COLOR, CellClass.BOUNDARY: BOUNDARY_COLOR}

    def color(i: int, j: int) -> str:
        c = CellClass(int(rmap.cell_class[i, j]))
        return fixed[c] if c in fixed else _zcd_color(int(negs[i, j]), top)

    out = _svg_open(nx, ny, f"0 0 {nx} {ny}")
    for j in range(ny):
        row_y = ny - 1 - j
        start, current = 0, color(0, j)
        for i in range(1, nx + 1):
            c = color(i, j) if i < nx else None
            if c != current:
                out.append(f'<rect x="{start}" y="{row_y}" width="{i - start}" height="1" fill="{current}"/>')
                start, current = i, c
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Contours and point clouds
# ---------------------------------------------------------------------------


def contour_json(cs: ContourSet) -> str:
    return dumps(cs.to_dict())


def stratum_summary(loci: StratumLoci) -> dict:
    return {
        "k": loci.k,
        "visible": [list(c.subset.elements) for c in loci.visible],
        "visible_count": loci.visible_count,
        "empty": [list(s.elements) for s in loci.empty_subsets],
    }


def _to_view(bbox):
    (x0, x1), (y0, y1) = bbox

    def tr(p):
        return f"{_num(p[0] - x0)},{_num(y1 - p[1])}"

    return tr, x1 - x0, y1 - y0


def contours_svg(contours: Iterable[ContourSet], bbox) -> str:
    tr, w, h = _to_view(bbox)
    out = _svg_open(w, h, f"0 0 {_num(w)} {_num(h)}")
    stroke = _num(max(w, h) / 400)
    out.append(f'<rect x="0" y="0" width="{_num(w)}" height="{_num(h)}" fill="#ffffff"/>')
    for idx, cs in enumerate(contours):
        colour = CURVE_COLORS[idx % len(CURVE_COLORS)]
        label = "{" + ",".join(map(str, cs.subset.elements)) + "}"
        out.append(f'<g id="subset-{"-".join(map(str, cs.subset.elements))}" stroke="{colour}" '
                   f'fill="none" stroke-width="{stroke}"><title>{label}</title>')
        for line in cs.polylines:
            pts = " ".join(tr(p) for p in line)
            out.append(f'<polyline points="{pts}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def point_cloud_csv(points: np.ndarray, subset) -> str:
    """Rows ``x,y,z,subset`` with the subset written as ``1-2``."""
    tag = "-".join(map(str, subset.elements))
    names = _axis_names(points.shape[1] if points.ndim == 2 else 3)
    lines = [",".join(names + ["subset"])]
    for p in np.atleast_2d(points).tolist():
        lines.append(",".join(repr(v) for v in p) + f",{tag}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Tropical skeletons
# ---------------------------------------------------------------------------


def skeleton_json(skel: TropicalSkeleton, extra: Optional[dict] = None) -> str:
    doc = skel.to_dict()
    if extra:
        doc.update(extra)
    return dumps(doc)


def skeleton_svg(skel: TropicalSkeleton, bbox) -> str:
    tr, w, h = _to_view(bbox)
    out = _svg_open(w, h, f"0 0 {_num(w)} {_num(h)}")
    stroke = _num(max(w, h) / 300)
    out.append(f'<rect x="0" y="0" width="{_num(w)}" height="{_num(h)}" fill="#ffffff"/>')
    for piece in skel.pieces:
        ends = piece.clipped(bbox)
        if ends is None:
            continue
        p, q = ends
        a, b = tr(p).split(","), tr(q).split(",")
        out.append(f'<line x1="{a[0]}" y1="{a[1]}" x2="{b[0]}" y2="{b[1]}" stroke="#000000" '
                   f'stroke-width="{stroke}"><title>{piece.pair[0]}={piece.pair[1]}</title></line>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def mask_csv(mask: np.ndarray, centers: np.ndarray) -> str:
    names = _axis_names(centers.shape[1])
    lines = [",".join(names + ["member"])]
    for p, m in zip(centers.tolist(), mask.ravel().tolist()):
        lines.append(",".join(repr(v) for v in p) + f",{int(m)}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Polygons
# ---------------------------------------------------------------------------


def polygon_json(poly: Polygon, lengths: Sequence[float]) -> str:
    doc = poly.to_dict()
    doc["lengths"] = [float(v) for v in lengths]
    doc["closure_error"] = poly.closure_error
    return dumps(doc)


def polygon_svg(poly: Polygon) -> str:
    v = poly.vertices
    lo, hi = v.min(axis=0), v.max(axis=0)
    pad = 0.05 * max(float(np.max(hi - lo)), 1e-12)
    bbox = [(lo[0] - pad, hi[0] + pad), (lo[1] - pad, hi[1] + pad)]
    tr, w, h = _to_view(bbox)
    out = _svg_open(w, h, f"0 0 {_num(w)} {_num(h)}")
    stroke = _num(max(w, h) / 200)
    pts = " ".join(tr(p) for p in v[:-1])
    out.append(f'<polygon points="{pts}" fill="{POS_COLOR}" fill-opacity="0.25" '
               f'stroke="#000000" stroke-width="{stroke}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def finite_or_none(v: float) -> Optional[float]:
    return None if not math.isfinite(v) else float(v)
