import json
import math

import numpy as np
import pytest

from statamoeba.core_model import (
    FunctionFamily,
    LinearSpec,
    PolynomialSpec,
    RadialBumpSpec,
    SubsetMask,
    bump_eta,
    dedup_for_loci,
    dump_model,
    enumerate_subsets,
    evaluate_f,
    family_from_dict,
    linear_family,
    load_model,
    subset_matrix,
    validate_family,
)
from statamoeba.errors import InvalidModel, InvalidStratum, InvalidSubset, LinearOnly, ModelTooLarge
from statamoeba.presets import DESCRIPTIONS, LINEAR_PRESETS, default_bbox, get_preset, preset_names

from oracles import subsets as oracle_subsets


def elems(masks):
    return [m.elements for m in masks]


def test_enumerate_4_2():
    assert elems(enumerate_subsets(4, 2)) == [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]


def test_enumerate_6_3_complement_pairs():
    masks = enumerate_subsets(6, 3)
    assert len(masks) == 20
    for t in range(20):
        assert masks[19 - t] == masks[t].complement()


def test_enumerate_6_2_ends():
    masks = enumerate_subsets(6, 2)
    assert len(masks) == 15
    assert masks[0].elements == (1, 2)
    assert masks[-1].elements == (5, 6)


@pytest.mark.parametrize("N", range(2, 11))
def test_enumeration_matches_brute_force(N):
    for k in range(1, N // 2 + 1):
        assert elems(enumerate_subsets(N, k)) == oracle_subsets(N, k)
        M = subset_matrix(N, k)
        assert M.shape == (math.comb(N, k), N)
        assert np.all(M.sum(axis=1) == k)


@pytest.mark.parametrize("N,k", [(6, 0), (6, 4), (3, 2), (1, 1)])
def test_enumerate_rejects_bad_stratum(N, k):
    with pytest.raises(InvalidStratum):
        enumerate_subsets(N, k)


def test_subset_matrix_read_only():
    with pytest.raises(ValueError):
        subset_matrix(4, 2)[0, 0] = False


@pytest.mark.parametrize("N,k,expected", [(6, 3, 10), (6, 2, 15), (4, 2, 3)])
def test_dedup_counts(N, k, expected):
    kept = dedup_for_loci(enumerate_subsets(N, k), N)
    assert len(kept) == expected


def test_dedup_keeps_smaller_member():
    kept = dedup_for_loci(enumerate_subsets(4, 2), 4)
    assert elems(kept) == [(1, 2), (1, 3), (1, 4)]


def test_dedup_mixed_k_rejected():
    with pytest.raises(InvalidSubset):
        dedup_for_loci([SubsetMask.from_elements([1], 4), SubsetMask.from_elements([1, 2], 4)], 4)


def test_subset_mask_roundtrip():
    m = SubsetMask.from_elements([3, 1], 5)
    assert m.elements == (1, 3)
    assert m.indices == (0, 2)
    assert m.k == 2
    assert str(m) == "{1,3}"
    assert m.complement().elements == (2, 4, 5)
    assert m.complement().complement() == m
    assert m.as_bool().tolist() == [True, False, True, False, False]
    with pytest.raises(InvalidSubset):
        SubsetMask.from_elements([6], 5)


def test_evaluate_f_examples(triangle, fig4, bump10):
    assert evaluate_f(triangle, 2, (3, -1)) == 3.0
    assert evaluate_f(fig4, 5, (0, 0)) == pytest.approx(math.log(11), abs=0)
    # z = 3 - 2 >= 1 puts the first bump on its flat outer branch
    assert evaluate_f(bump10, 1, (3, 0)) == pytest.approx(math.log(8), rel=1e-15)
    with pytest.raises(IndexError):
        evaluate_f(triangle, 4, (0, 0))


def test_bump_eta_profile():
    z = np.array([-2.0, -1.0, 0.0, 0.5, 1.0, 3.0])
    out = bump_eta(z)
    assert out[0] == out[1] == out[4] == out[5] == 1.0
    assert out[2] == 0.0
    assert out[3] == pytest.approx(1 - math.exp(-0.25 / 0.75))


def test_bump_continuous_at_threshold(bump10):
    for spec in bump10.specs:
        r = spec.radius
        inner = spec.evaluate(np.array([[r - 1e-9, 0.0]]))[0]
        outer = spec.evaluate(np.array([[r + 1e-9, 0.0]]))[0]
        assert abs(inner) < 1e-12 and abs(outer) < 1e-12


def test_validate_family_warnings(triangle):
    assert validate_family(triangle) == []
    dup = linear_family([(1, 0), (1, 0), (0, 1)])
    assert any("identical" in w for w in validate_family(dup))
    small = linear_family([(1, 0), (0, 1)])
    assert any("N=2" in w for w in validate_family(small))


def test_family_validation_errors():
    with pytest.raises(InvalidModel):
        FunctionFamily(2, (LinearSpec(0.0, (1.0, 0.0)),))
    with pytest.raises(InvalidModel):
        FunctionFamily(2, (LinearSpec(0.0, (1.0,)), LinearSpec(0.0, (0.0, 1.0))))
    with pytest.raises(InvalidModel):
        FunctionFamily(1, (PolynomialSpec(((1.0, (13,)),)), LinearSpec(0.0, (1.0,))))
    with pytest.raises(ModelTooLarge):
        linear_family(np.eye(25, 2))


def test_linear_parts_and_polynomial_degree():
    fam = FunctionFamily(2, (
        PolynomialSpec(((2.0, (1, 0)), (0.5, (0, 0)))),
        LinearSpec(1.0, (0.0, 1.0)),
    ))
    assert fam.is_linear
    A, b = fam.linear_parts()
    assert A.tolist() == [[2.0, 0.0], [0.0, 1.0]]
    assert b.tolist() == [0.5, 1.0]
    assert get_preset("poly6").is_polynomial and not get_preset("poly6").is_linear
    with pytest.raises(LinearOnly):
        get_preset("bump10").linear_parts()


def test_model_file_roundtrip(tmp_path, fig4, bump10):
    for fam in (fig4, bump10, get_preset("poly6")):
        path = tmp_path / "m.json"
        path.write_text(dump_model(fam))
        back = load_model(path)
        pts = np.array([[0.3, -1.2], [2.0, 2.5]])
        assert np.array_equal(back.evaluate(pts), fam.evaluate(pts))


def test_model_file_errors():
    with pytest.raises(InvalidModel):
        family_from_dict({"n": 2})
    with pytest.raises(InvalidModel):
        family_from_dict({"n": 1, "functions": [{"kind": "spline"}, {"kind": "linear", "b": 0, "a": [1]}]})
    with pytest.raises(InvalidModel):
        family_from_dict({"n": 1, "functions": [
            {"kind": "polynomial", "terms": [{"c": 1, "e": [1.5]}]},
            {"kind": "linear", "b": 0, "a": [1]},
        ]})


def test_presets_complete():
    names = preset_names()
    for required in ("triangle", "fig1b", "symmetric6", "degenerate6", "fig4", "fig5_3d", "bump10"):
        assert required in names
    for name in names:
        fam = get_preset(name)
        assert name in DESCRIPTIONS
        assert len(default_bbox(name)) == fam.n
        assert (name in LINEAR_PRESETS) == fam.is_linear
    with pytest.raises(KeyError):
        get_preset("nope")


def test_preset_json_is_plain(fig4):
    doc = json.loads(dump_model(fig4))
    assert doc["n"] == 2 and len(doc["functions"]) == 6
    assert doc["functions"][4] == {"kind": "linear", "b": math.log(11), "a": [2.0, 1.0]}


def test_radial_spec_radius():
    assert RadialBumpSpec(1, 0.0, 0.0).radius == 2.0
    assert RadialBumpSpec(10, 0.0, 0.0).radius == pytest.approx(2.009)
