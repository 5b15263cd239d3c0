import math

import numpy as np
import pytest

from statamoeba.core_model import SubsetMask, enumerate_subsets
from statamoeba.errors import DimensionUnsupported, NotLabeled
from statamoeba.evaluator import gap_matrix
from statamoeba.grid import GridSpec
from statamoeba.loci import (
    VERTEX_TOL,
    detect_pairwise_intersections,
    extract_zero_locus,
    extremal_boundary,
    max_intersection_bound,
    min_separation,
    refine_on_edges,
    sample_zero_points,
    segment_distances,
    stratum_loci,
)
from statamoeba.presets import get_preset
from statamoeba.regions import CellClass, classify_grid, label_subdomains

from oracles import intersection_bound

# frozen from oracles.triangle_tail_x(-10.0) and oracles.chi_root()
TRIANGLE_TAIL_X = -4.540096037031205e-05
CHI = 0.5086603916420045
LN2 = math.log(2)


def S(*e, N):
    return SubsetMask.from_elements(e, N)


def nearest(points, p):
    return float(np.min(np.linalg.norm(points - np.asarray(p), axis=1)))


def test_triangle_locus_passes_forced_point(triangle):
    grid = GridSpec.make([(-6, 6)] * 2, 401)
    cs = extract_zero_locus(triangle, S(1, N=3), grid)
    assert not cs.empty
    assert nearest(cs.vertices, (-LN2, -LN2)) < min(grid.cell_size)


def test_triangle_tail(triangle):
    grid = GridSpec.make([(-10, 10)] * 2, 801)
    cs = extract_zero_locus(triangle, S(1, N=3), grid)
    v = cs.vertices
    row = v[np.isclose(v[:, 1], -10.0, atol=1e-12)]
    assert len(row) == 1
    assert row[0, 0] == pytest.approx(TRIANGLE_TAIL_X, abs=1e-9)


def test_vertices_on_locus(fig4):
    grid = GridSpec.make([(-6, 6)] * 2, 201)
    for cs in stratum_loci(fig4, 2, grid).visible:
        g = gap_matrix(fig4, [cs.subset], cs.vertices)[:, 0]
        assert np.all(np.abs(g) <= VERTEX_TOL)


def test_degenerate6_line(degenerate6):
    grid = GridSpec.make([(-10, 10)] * 2, 801)
    v = extract_zero_locus(degenerate6, S(6, N=6), grid).vertices
    # slope-1 line through (-ln chi, 0): y = x + ln chi
    dev = np.abs(v[:, 1] - v[:, 0] - math.log(CHI)) / math.sqrt(2)
    assert dev.max() < 1e-3


@pytest.mark.parametrize("name,visible,empty", [
    ("fig4", 5, [(4,)]),
    ("symmetric6", 6, []),
    ("degenerate6", 2, [(2,), (3,), (4,), (5,)]),
    ("triangle", 3, []),
])
def test_visible_counts(name, visible, empty):
    loci = stratum_loci(get_preset(name), 1, GridSpec.make([(-10, 10)] * 2, 801))
    assert loci.visible_count == visible
    assert [s.elements for s in loci.empty_subsets] == empty
    assert loci.visible_count <= get_preset(name).N


def test_half_stratum_uses_representatives(symmetric6):
    loci = stratum_loci(symmetric6, 3, GridSpec.make([(-4, 4)] * 2, 101))
    assert len(loci.contours) == 10
    assert all(1 in c.subset.elements for c in loci.contours)


def test_fig1b_has_closed_curve():
    loci = stratum_loci(get_preset("fig1b"), 1, GridSpec.make([(-6, 6)] * 2, 401))
    cs = next(c for c in loci.contours if c.subset.elements == (4,))
    assert cs.closed == [True]
    assert np.allclose(cs.polylines[0][0], cs.polylines[0][-1])


def test_touch_points_reported():
    fam = get_preset("touch5")
    grid = GridSpec.make([(-3, 3)] * 2, 201)
    cs = extract_zero_locus(fam, S(4, 5, N=5), grid)
    assert cs.empty
    assert len(cs.touch_points) > 0
    assert np.max(np.abs(cs.touch_points[:, 0] - cs.touch_points[:, 1])) <= grid.cell_size[0] + 1e-12
    assert nearest(cs.touch_points, (0, 0)) == 0


def test_refine_on_edges_linear():
    p0 = np.array([[0.0, 0.0], [0.0, 0.0]])
    p1 = np.array([[2.0, 0.0], [0.0, 3.0]])

    def gap(p):
        return p[:, 0] + p[:, 1] - 1.3

    r = refine_on_edges(gap, p0, p1, gap(p0), gap(p1))
    assert np.abs(gap(r)).max() <= VERTEX_TOL
    assert r[0] == pytest.approx([1.3, 0.0])
    assert r[1] == pytest.approx([0.0, 1.3])


def test_saddle_is_resolved():
    # exp(xy)-style saddle: the gap x*y has a crossing at the origin
    from statamoeba.loci import _marching_squares

    grid = GridSpec.make([(-1, 1)] * 2, 2)

    def gap(p):
        return p[:, 0] * p[:, 1] + 0.1

    xs, ys = grid.axes()
    G = np.array([[xs[i] * ys[j] + 0.1 for j in range(2)] for i in range(2)])
    polys, closed = _marching_squares(G, grid, gap, gap)
    assert len(polys) == 2 and closed == [False, False]


def test_3d_point_clouds():
    fam = get_preset("superideal3")
    grid = GridSpec.make([(-3, 3)] * 3, 41)
    pts = sample_zero_points(fam, S(3, N=3), grid)
    assert len(pts) > 0
    axis = pts[(np.abs(pts[:, 0]) < 1e-12) & (np.abs(pts[:, 1]) < 1e-12)]
    assert len(axis) == 1 and axis[0, 2] == pytest.approx(LN2, abs=grid.cell_size[2])
    p1 = sample_zero_points(fam, S(1, N=3), grid)
    assert not np.any(p1[:, 0] < np.minimum(p1[:, 1], p1[:, 2]) - 1)
    empty = sample_zero_points(fam, S(1, N=3), GridSpec.make([(-3, -2), (0, 1), (0, 1)], 5))
    assert empty.shape == (0, 3)
    with pytest.raises(DimensionUnsupported):
        sample_zero_points(get_preset("fig4"), S(1, N=6), GridSpec.make([(0, 1)] * 2, 5))
    with pytest.raises(DimensionUnsupported):
        extract_zero_locus(fam, S(1, N=3), grid)


def test_segment_distances():
    s1 = np.array([[[0, 0], [2, 0]], [[0, 0], [1, 0]]], dtype=float)
    s2 = np.array([[[1, -1], [1, 1]], [[3, 1], [3, 2]]], dtype=float)
    d, w = segment_distances(s1, s2)
    assert d[0] == 0 and np.allclose(w[0], [1, 0])
    assert d[1] == pytest.approx(math.hypot(2, 1))


@pytest.mark.parametrize("N,k", [(6, 2), (6, 1), (4, 2), (7, 3), (10, 4)])
def test_intersection_bound(N, k):
    assert max_intersection_bound(N, k) == intersection_bound(N, k)


def test_intersection_bound_values():
    assert max_intersection_bound(6, 2) == 60
    assert max_intersection_bound(6, 1) == 0
    assert max_intersection_bound(4, 2) == 12


def test_k1_loci_disjoint(fig4):
    grid = GridSpec.make([(-2, 2)] * 2, 801)
    loci = stratum_loci(fig4, 1, grid).visible
    h = min(grid.cell_size)
    assert detect_pairwise_intersections(loci, 2 * h) == []


def test_k2_intersections_overlap(fig4):
    grid = GridSpec.make([(-10, 10)] * 2, 801)
    loci = stratum_loci(fig4, 2, grid).visible
    found = detect_pairwise_intersections(loci, 2 * min(grid.cell_size), family=fig4)
    assert found
    assert all(i.overlapping for i in found)
    assert len(found) <= max_intersection_bound(6, 2)
    for hit in found:
        g = gap_matrix(fig4, [hit.first, hit.second], np.array([hit.witness]))
        assert np.abs(g).max() <= 1e-9


def test_min_separation_far_apart(triangle):
    grid = GridSpec.make([(-2, 2)] * 2, 201)
    loci = stratum_loci(triangle, 1, grid).visible
    d, w = min_separation(loci[0], loci[1], 0.01)
    assert d == math.inf and w is None


def test_extremal_boundary(fig4, triangle):
    grid = GridSpec.make([(-6, 6)] * 2, 201)
    rmap = classify_grid(fig4, 2, grid)
    with pytest.raises(NotLabeled):
        extremal_boundary(rmap)
    rmap = label_subdomains(rmap)
    edge = extremal_boundary(rmap)
    assert edge.any()
    cls = rmap.cell_class[edge]
    assert not np.any(cls == CellClass.NEG)

    tri = label_subdomains(classify_grid(triangle, 1, grid))
    edge_t = extremal_boundary(tri)
    assert np.all(tri.cell_class[edge_t] == CellClass.BOUNDARY)

    pos_only = label_subdomains(classify_grid(triangle, 1, GridSpec.make([(-0.3, 0.3)] * 2, 11)))
    assert not extremal_boundary(pos_only).any()


def test_contour_dict(triangle):
    cs = extract_zero_locus(triangle, S(2, N=3), GridSpec.make([(-2, 2)] * 2, 21))
    d = cs.to_dict()
    assert d["subset"] == [2] and not d["empty"]
    assert all(len(p) >= 2 for p in d["polylines"])
