import json

import pytest

from statamoeba.cli import parse_bbox, run_cli, UsageError
from statamoeba.core_model import dump_model
from statamoeba.presets import get_preset


def test_parse_bbox():
    assert parse_bbox("-6:6,-1.5:2") == [(-6.0, 6.0), (-1.5, 2.0)]
    for bad in ("1:0", "a:b", "1"):
        with pytest.raises(UsageError):
            parse_bbox(bad)


def test_presets(capsys):
    assert run_cli(["presets"]) == 0
    out = capsys.readouterr().out
    assert "fig4" in out and "bump10" in out and "touch5" in out


def test_strata_fig4(tmp_path, capsys):
    out = tmp_path / "fig4_k1"
    rc = run_cli(["strata", "--preset", "fig4", "--k", "1", "--bbox", "-6:6,-6:6", "--res", "201", "--out", str(out)])
    assert rc == 0
    line = capsys.readouterr().out
    assert "visible=5" in line and "empty={4}" in line
    assert sorted(p.name for p in out.iterdir()) == [
        "contour_1.json", "contour_2.json", "contour_3.json", "contour_5.json", "contour_6.json", "summary.json"]
    summ = json.loads((out / "summary.json").read_text())
    assert summ["empty"] == [[4]]


def test_classify_triangle(tmp_path):
    out = tmp_path / "regions.csv"
    assert run_cli(["classify", "--preset", "triangle", "--k", "1", "--bbox", "-1:1,-1:1", "--res", "4", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].startswith("x,y,class")
    cells = [r.split(",") for r in rows[1:]]
    centre = min(cells, key=lambda r: abs(float(r[0])) + abs(float(r[1])))
    assert abs(float(centre[0])) < 1e-12 and centre[2] == "POS"


def test_classify_json_and_svg(tmp_path):
    for fmt in ("json", "svg"):
        out = tmp_path / f"m.{fmt}"
        assert run_cli(["classify", "--preset", "fig4", "--k", "2", "--res", "41", "--format", fmt, "--out", str(out)]) == 0
    assert json.loads((tmp_path / "m.json").read_text())["k"] == 2
    assert (tmp_path / "m.svg").read_text().rstrip().endswith("</svg>")


def test_contour_and_model_file(tmp_path, capsys):
    model = tmp_path / "tri.json"
    model.write_text(dump_model(get_preset("triangle")))
    assert run_cli(["contour", "--model", str(model), "--subset", "1", "--res", "101"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["subset"] == [1] and not doc["empty"]
    assert run_cli(["contour", "--preset", "superideal3", "--subset", "3", "--res", "11", "--format", "csv"]) == 0
    assert capsys.readouterr().out.startswith("x,y,z,subset")


def test_tropical(capsys):
    assert run_cli(["tropical", "--preset", "triangle", "--kind", "homogeneous", "--res", "101"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["pieces"]) == 3 and doc["unbounded_check"]["ok"]
    assert run_cli(["tropical", "--preset", "triangle", "--drop-vars", "2", "--res", "51"]) == 0
    assert run_cli(["tropical", "--preset", "fig4", "--format", "csv", "--res", "21"]) == 0


def test_polygon(capsys):
    assert run_cli(["polygon", "--lengths", "3,4,5"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["closure_error"] < 1e-12
    assert run_cli(["polygon", "--preset", "triangle", "--point", "0,0", "--k", "1"]) == 0
    assert json.loads(capsys.readouterr().out)["k_constructible"] is True
    assert run_cli(["polygon", "--lengths", "5,1,1,1"]) == 2
    assert "entry 1" in capsys.readouterr().err


def test_spin(capsys):
    assert run_cli(["spin", "--preset", "triangle", "--k", "1", "--bbox", "-0.3:0.3,-0.3:0.3", "--res", "11"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [s["label"] for s in doc["states"]] == ["D+"]


def test_verify_expect_violation(tmp_path):
    out = tmp_path / "report.json"
    args = ["verify", "--preset", "bump10", "--samples", "3000", "--strata", "3,4", "--rays", "20"]
    assert run_cli(args + ["--expect-violation", "chains", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"]
    assert run_cli(args) == 1


def test_verify_fig4(capsys):
    assert run_cli(["verify", "--preset", "fig4", "--samples", "2000", "--rays", "20"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"]


@pytest.mark.parametrize("argv", [
    [],
    ["classify", "--preset", "fig4"],
    ["classify", "--preset", "nope", "--k", "1"],
    ["classify", "--preset", "fig4", "--k", "9", "--res", "11"],
    ["classify", "--preset", "fig4", "--k", "1", "--bbox", "0:1"],
    ["contour", "--preset", "fig4", "--subset", "7", "--res", "11"],
    ["contour", "--preset", "fig4", "--subset", "1", "--format", "csv", "--res", "11"],
    ["polygon"],
    ["tropical", "--preset", "bump10"],
    ["classify", "--model", "/nonexistent.json", "--k", "1"],
])
def test_bad_arguments(argv, capsys):
    assert run_cli(argv) == 2
