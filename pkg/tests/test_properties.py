"""Invariants checked on generated models, points and length lists."""

import math
from itertools import combinations

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from statamoeba.core_model import SubsetMask, enumerate_subsets, linear_family, subset_matrix
from statamoeba.errors import Lopsided
from statamoeba.evaluator import gap_matrix, sign_vector
from statamoeba.polygon import build_closed_polygon, lopsided_index
from statamoeba.presets import get_preset
from statamoeba.regions import ekr_count, mean_spin
from statamoeba.tropical import power_sum_holds, skeleton_membership

from oracles import direct_vector, lopsided, polygon_sides

coord = st.floats(-6, 6, allow_nan=False)
weight = st.floats(-4, 4, allow_nan=False)


@st.composite
def linear_models(draw, n_min=3, n_max=8):
    N = draw(st.integers(n_min, n_max))
    A = draw(st.lists(st.tuples(weight, weight), min_size=N, max_size=N))
    b = draw(st.lists(weight, min_size=N, max_size=N))
    return linear_family(A, b)


@st.composite
def model_point_stratum(draw):
    fam = draw(linear_models())
    k = draw(st.integers(1, fam.N // 2))
    x = (draw(coord), draw(coord))
    return fam, k, x


@given(st.integers(1, 12).flatmap(lambda N: st.tuples(st.just(N), st.integers(0, N))))
def test_enumeration_length_and_order(nk):
    N, k = nk
    if k == 0 or 2 * k > N:
        return
    subs = enumerate_subsets(N, k)
    assert len(subs) == math.comb(N, k)
    assert [s.elements for s in subs] == list(combinations(range(1, N + 1), k))


@given(st.integers(2, 12).flatmap(lambda N: st.tuples(st.just(N), st.sets(st.integers(1, N), min_size=1, max_size=N - 1))))
def test_complement_involution(data):
    N, elems = data
    I = SubsetMask.from_elements(elems, N)
    assert I.complement().complement() == I
    assert I.complement().bits & I.bits == 0
    assert I.complement().k == N - I.k


@given(model_point_stratum())
def test_antisymmetry(case):
    fam, k, x = case
    for I in enumerate_subsets(fam.N, k):
        g = gap_matrix(fam, [I, I.complement()], np.array([x]))[0]
        assert g[0] == -g[1]


@given(model_point_stratum())
def test_counting_identity(case):
    fam, k, x = case
    w = np.exp(fam.evaluate(x)[0])
    lhs = math.fsum(subset_matrix(fam.N, k) @ w)
    assert lhs == pytest.approx(ekr_count(fam.N, k) * math.fsum(w), rel=1e-12)


@given(model_point_stratum())
def test_sign_vector_matches_direct_sum(case):
    fam, k, x = case
    f = fam.evaluate(x)[0].tolist()
    v = sign_vector(fam, k, x)
    ref = direct_vector(f, k)
    # skip points within rounding of a locus
    assume(0 not in ref)
    assert list(v.as_tuple()) == ref


@given(model_point_stratum())
def test_negatives_bounded_and_intersecting(case):
    fam, k, x = case
    v = sign_vector(fam, k, x)
    assume(not v.has_zero)
    negs = [I for I, s in zip(enumerate_subsets(fam.N, k), v.entries) if s < 0]
    assert len(negs) <= math.comb(fam.N - 1, k - 1)
    assert all(a.bits & b.bits for a, b in combinations(negs, 2))
    assert 1 - 2 * k / fam.N - 1e-12 <= mean_spin(v) <= 1


@given(linear_models(6, 6), coord, coord)
def test_half_stratum_has_ten_negatives(fam, x, y):
    v = sign_vector(fam, 3, (x, y))
    assume(not v.has_zero)
    assert v.neg_count == 10


@given(st.lists(st.floats(-30, 30), min_size=1, max_size=10), st.floats(1, 20))
def test_power_sum(f, lam):
    assert power_sum_holds(f, lam)


def _lengths():
    return st.lists(st.floats(1e-3, 1e3), min_size=3, max_size=10)


@given(_lengths())
def test_lopsided_iff_build_fails(L):
    chk = lopsided_index(L)
    assert chk.lopsided == lopsided(L)
    if chk.lopsided:
        with pytest.raises(Lopsided):
            build_closed_polygon(L)


@given(_lengths())
def test_polygon_round_trip(L):
    assume(not lopsided(L))
    poly = build_closed_polygon(L)
    assert poly.closure_error < 1e-9 * max(L)
    sides = polygon_sides(poly.vertices.tolist())
    assert sorted(sides) == pytest.approx(sorted(L), rel=1e-9)


@given(linear_models(3, 7), st.floats(0.05, 1.0), st.floats(0, 2 * math.pi), st.floats(0.1, 20))
def test_homogeneous_scaling(fam, r, theta, lam):
    x = np.array([[r * math.cos(theta), r * math.sin(theta)]])
    a = skeleton_membership(fam, x, tol=1e-9, kind="homogeneous")[0]
    b = skeleton_membership(fam, lam * x, tol=1e-9 * lam, kind="homogeneous")[0]
    assert a == b


@given(st.floats(-5, 5), st.floats(-5, 5))
def test_bump_family_is_continuous(x, y):
    fam = get_preset("bump10")
    p = np.array([[x, y]])
    d = fam.evaluate(p + 1e-7)[0] - fam.evaluate(p)[0]
    assert np.abs(d).max() < 1e-4
