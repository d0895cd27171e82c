"""CLI subcommands: result documents, SVG structure, scripts, exit codes."""
from __future__ import annotations

import csv
import json
import xml.etree.ElementTree as ET

import pytest

from freeform_layout.cli import main
from freeform_layout.constraints import AnchorLine, Decal, DecalGroup
from freeform_layout.geometry import GamutShape, Point2, Polygon
from freeform_layout.scene import Scene, SceneDelta, delta_to_dict, save_scene
from freeform_layout.svg import render_scene_svg


def rect(x0, y0, x1, y1) -> Polygon:
    return Polygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


@pytest.fixture
def easy_scene(tmp_path):
    """One decal already at rest: the solver is a fixed point on it."""
    scene = Scene(GamutShape(rect(0, 0, 100, 100)), (Decal("a", Point2(50.0, 50.0), 10.0),))
    path = tmp_path / "scene.json"
    path.write_bytes(save_scene(scene))
    return path


@pytest.fixture
def holey_scene(tmp_path):
    scene = Scene(
        GamutShape(rect(0, 0, 200, 120), (rect(20, 20, 50, 50),)),
        (
            Decal("a", Point2(120.0, 60.0), 10.0, group="row"),
            Decal("b", Point2(160.0, 60.0), 10.0, group="row"),
        ),
        (DecalGroup("row", ("a", "b"), 80.0, (AnchorLine("horizontal", 60.0, "fixed"),)),),
        reference=(("a", Point2(120.0, 60.0)), ("b", Point2(160.0, 60.0))),
    )
    path = tmp_path / "holey.json"
    path.write_bytes(save_scene(scene))
    return path


# --- solve -------------------------------------------------------------------------

def test_solve_writes_result_document(easy_scene, tmp_path):
    out = tmp_path / "result.json"
    assert main(["solve", "--scene", str(easy_scene), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["converged"] is True
    assert doc["total_cost"] == 0.0
    # zero-cost scene: positions come back unchanged
    assert doc["decals"] == [{"id": "a", "pos": [50.0, 50.0]}]
    assert set(doc["per_kind_cost"]) == {"gamut", "min_distance", "max_distance", "anchor"}


def test_solve_invalid_scene_exits_1_with_field_path(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "display": {"outer": [[0, 0], [100, 0], [100, 100], [0, 100]]},
        "decals": [{"id": "a", "pos": [50, 50], "radius": 10, "size": 3}],
    }))
    out = tmp_path / "result.json"
    assert main(["solve", "--scene", str(bad), "--out", str(out)]) == 1
    assert "decals[0].size" in capsys.readouterr().err
    assert not out.exists()


def test_solve_exit_2_when_budget_exhausted(tmp_path):
    scene = Scene(
        GamutShape(rect(0, 0, 25, 25)),
        (Decal("a", Point2(10.0, 10.0), 10.0), Decal("b", Point2(16.0, 15.0), 10.0)),
    )
    path = tmp_path / "tight.json"
    path.write_bytes(save_scene(scene))
    out = tmp_path / "result.json"
    code = main(["solve", "--scene", str(path), "--out", str(out), "--max-iter", "1"])
    assert code == 2
    assert json.loads(out.read_text())["converged"] is False


def test_solve_weight_override_changes_costs(easy_scene, tmp_path):
    moved = Scene(GamutShape(rect(0, 0, 100, 100)), (Decal("a", Point2(120.0, 50.0), 10.0),))
    path = tmp_path / "out_of_gamut.json"
    path.write_bytes(save_scene(moved))
    out = tmp_path / "result.json"
    main(["solve", "--scene", str(path), "--out", str(out), "--max-iter", "0", "--weight-gamut", "3"])
    doc = json.loads(out.read_text())
    # d_S=+20, r=10: raw = 10+20+10 = 40, weighted by the override
    assert doc["per_kind_cost"]["gamut"] == pytest.approx((3 * 40.0) ** 2)


# --- SVG ---------------------------------------------------------------------------

def test_svg_structure_matches_scene(holey_scene, tmp_path):
    out = tmp_path / "result.json"
    svg_path = tmp_path / "layout.svg"
    assert main(["solve", "--scene", str(holey_scene), "--out", str(out), "--svg", str(svg_path)]) == 0
    root = ET.fromstring(svg_path.read_text())  # must be valid XML
    ns = "{http://www.w3.org/2000/svg}"
    polygons = root.findall(f".//{ns}polygon")
    assert len(polygons) == 2  # outer + one hole
    assert len(root.findall(f".//{ns}circle")) == 2
    assert len(root.findall(f".//{ns}rect")) == 2  # one r-box per decal
    anchor_lines = [e for e in root.findall(f".//{ns}line") if e.get("class") == "anchor"]
    assert len(anchor_lines) == 1
    assert anchor_lines[0].get("stroke-dasharray")
    hole = [p for p in polygons if p.get("class") == "hole"]
    assert hole[0].get("fill").startswith("url(#")


def test_svg_positions_override():
    scene = Scene(GamutShape(rect(0, 0, 100, 100)), (Decal("a", Point2(50.0, 50.0), 10.0),))
    text = render_scene_svg(scene, {"a": (12.0, 34.0)})
    root = ET.fromstring(text)
    circle = root.find(".//{http://www.w3.org/2000/svg}circle")
    assert (circle.get("cx"), circle.get("cy")) == ("12", "34")


# --- play --------------------------------------------------------------------------

def write_script(path, steps):
    path.write_text(json.dumps(steps))
    return path


def test_play_empty_script_emits_initial_row_only(easy_scene, tmp_path):
    script = write_script(tmp_path / "script.json", [])
    frames = tmp_path / "frames"
    metrics = tmp_path / "metrics.csv"
    assert main(["play", "--scene", str(easy_scene), "--script", str(script),
                 "--frames", str(frames), "--metrics", str(metrics)]) == 0
    rows = list(csv.DictReader(metrics.open()))
    assert len(rows) == 1
    assert rows[0]["step"] == "-1"
    assert sorted(p.name for p in frames.iterdir()) == ["frame_0000.json", "frame_0000.svg"]


def test_play_three_steps_make_four_frames(holey_scene, tmp_path):
    steps = [
        {"at": 1, "delta": delta_to_dict(SceneDelta.hole_moved(0, (30.0, 10.0)))},
        {"at": 2, "delta": delta_to_dict(SceneDelta.hole_moved(0, (30.0, 10.0)))},
        {"at": 4, "delta": delta_to_dict(SceneDelta.hole_moved(0, (20.0, 0.0)))},
    ]
    script = write_script(tmp_path / "script.json", steps)
    frames = tmp_path / "frames"
    metrics = tmp_path / "metrics.csv"
    plot = tmp_path / "curves.png"
    assert main(["play", "--scene", str(holey_scene), "--script", str(script),
                 "--frames", str(frames), "--metrics", str(metrics), "--plot", str(plot)]) == 0
    rows = list(csv.DictReader(metrics.open()))
    assert [r["step"] for r in rows] == ["-1", "1", "2", "4"]
    svgs = sorted(p.name for p in frames.iterdir() if p.suffix == ".svg")
    assert svgs == [f"frame_{k:04d}.svg" for k in range(4)]
    assert plot.stat().st_size > 0
    for row in rows:
        assert row["converged"] == "True"


def test_play_rejects_non_increasing_steps(easy_scene, tmp_path, capsys):
    steps = [
        {"at": 3, "delta": delta_to_dict(SceneDelta.hole_moved(0, (1.0, 0.0)))},
        {"at": 3, "delta": delta_to_dict(SceneDelta.hole_moved(0, (1.0, 0.0)))},
    ]
    script = write_script(tmp_path / "script.json", steps)
    code = main(["play", "--scene", str(easy_scene), "--script", str(script),
                 "--frames", str(tmp_path / "frames"), "--metrics", str(tmp_path / "m.csv")])
    assert code == 1
    assert "step 1" in capsys.readouterr().err


def test_play_names_failing_step(easy_scene, tmp_path, capsys):
    # the scene has no holes, so the first hole_moved cannot apply
    steps = [{"at": 1, "delta": delta_to_dict(SceneDelta.hole_moved(0, (1.0, 0.0)))}]
    script = write_script(tmp_path / "script.json", steps)
    code = main(["play", "--scene", str(easy_scene), "--script", str(script),
                 "--frames", str(tmp_path / "frames"), "--metrics", str(tmp_path / "m.csv")])
    assert code == 1
    assert "step 0" in capsys.readouterr().err


# --- compare -----------------------------------------------------------------------

def test_compare_prints_table_and_csv(holey_scene, tmp_path, capsys):
    out_csv = tmp_path / "table.csv"
    plot = tmp_path / "bars.png"
    code = main(["compare", "--scene", str(holey_scene), "--baselines", "warp,cover",
                 "--csv", str(out_csv), "--plot", str(plot)])
    assert code == 0
    table = capsys.readouterr().out
    assert table.splitlines()[0].split()[:2] == ["layout", "visibility"]
    rows = list(csv.DictReader(out_csv.open()))
    assert [r["layout"] for r in rows] == ["optimizer", "warp", "cover"]
    assert float(rows[2]["displacement"]) == 0.0  # cover is the identity
    assert plot.stat().st_size > 0


def test_compare_without_reference_exits_1(easy_scene, capsys):
    assert main(["compare", "--scene", str(easy_scene)]) == 1
    assert "reference_layout" in capsys.readouterr().err


def test_compare_unknown_baseline_exits_1(holey_scene, capsys):
    assert main(["compare", "--scene", str(holey_scene), "--baselines", "stretch"]) == 1
    assert "stretch" in capsys.readouterr().err
