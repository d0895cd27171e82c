"""Scene documents: strict parsing, round trips, deltas, baselines, metrics."""
from __future__ import annotations

import json
import pathlib

import numpy as np
import pytest

from freeform_layout import corpus
from freeform_layout.constraints import AnchorLine, ConstraintWeights, Decal, DecalGroup
from freeform_layout.geometry import GamutShape, Point2, Polygon
from freeform_layout.scene import (
    BaselineKind,
    DeltaError,
    Scene,
    SceneDelta,
    SceneParseError,
    SceneValidationError,
    apply_delta,
    baseline_cover,
    baseline_positions,
    baseline_warp,
    compute_metrics,
    delta_from_dict,
    delta_to_dict,
    load_scene,
    save_scene,
    scene_to_dict,
    validate_scene,
)

MINIMAL = {
    "display": {"outer": [[0, 0], [100, 0], [100, 100], [0, 100]]},
    "decals": [{"id": "a", "pos": [50, 50], "radius": 10}],
}


def doc(**overrides):
    base = json.loads(json.dumps(MINIMAL))
    base.update(overrides)
    return base


def make_scene(**overrides) -> Scene:
    return load_scene(json.dumps(doc(**overrides)))


# --- parsing -----------------------------------------------------------------------

def test_minimal_document_gets_defaults():
    scene = make_scene()
    assert scene.gamut.holes == ()
    assert scene.groups == ()
    assert scene.weights == ConstraintWeights(10.0, 5.0, 1.0, 2.0)
    assert scene.solver.e_step == 10.0
    assert scene.solver.max_iterations == 200
    assert scene.solver.use_sdf_cache is True
    assert scene.reference is None


def test_unknown_fields_are_named_in_errors():
    with pytest.raises(SceneParseError) as err:
        load_scene(json.dumps(doc(extra_section=1)))
    assert "extra_section" in str(err.value)

    bad = doc()
    bad["decals"][0]["radii"] = 3
    with pytest.raises(SceneParseError) as err:
        load_scene(json.dumps(bad))
    assert "decals[0].radii" in str(err.value)


def test_missing_and_mistyped_fields():
    with pytest.raises(SceneParseError) as err:
        load_scene(json.dumps({"decals": []}))
    assert "display" in str(err.value)

    bad = doc()
    del bad["decals"][0]["pos"]
    with pytest.raises(SceneParseError) as err:
        load_scene(json.dumps(bad))
    assert "decals[0]" in str(err.value) and "pos" in str(err.value)

    bad = doc()
    bad["decals"][0]["radius"] = "big"
    with pytest.raises(SceneParseError) as err:
        load_scene(json.dumps(bad))
    assert "decals[0].radius" in str(err.value)

    bad = doc(groups=[{"id": "g", "members": ["a"], "d_max": 5,
                       "anchors": [{"axis": "diagonal", "coord": 0, "mode": "fixed"}]}])
    with pytest.raises(SceneParseError) as err:
        load_scene(json.dumps(bad))
    assert "groups[0].anchors[0].axis" in str(err.value)


def test_invalid_json_is_a_parse_error():
    with pytest.raises(SceneParseError):
        load_scene(b"{not json")


# --- validation ----------------------------------------------------------------------

def test_validation_failures_carry_paths():
    bad = doc(decals=[
        {"id": "a", "pos": [10, 10], "radius": 5},
        {"id": "a", "pos": [20, 20], "radius": -1},
    ])
    with pytest.raises(SceneValidationError) as err:
        load_scene(json.dumps(bad))
    paths = [v.path for v in err.value.violations]
    assert "decals[1].id" in paths
    assert "decals[1].radius" in paths


def test_validation_catches_group_and_reference_problems():
    scene = Scene(
        GamutShape(Polygon(((0, 0), (100, 0), (100, 100), (0, 100)))),
        (Decal("a", Point2(50, 50), 10.0, group="nope"),),
        (DecalGroup("g", ("a", "ghost"), -2.0),),
        reference=(("a", Point2(0, 0)), ("stranger", Point2(1, 1))),
    )
    paths = [v.path for v in validate_scene(scene)]
    assert "groups[0].members[1]" in paths
    assert "groups[0].d_max" in paths
    assert "decals[0].group" in paths
    assert "reference_layout[1].id" in paths


def test_validation_catches_bad_gamut_and_weights():
    scene = Scene(
        GamutShape(
            Polygon(((0, 0), (100, 0), (100, 100), (0, 100))),
            (Polygon(((90, 90), (120, 90), (120, 120), (90, 120))),),
        ),
        (Decal("a", Point2(50, 50), 10.0),),
        weights=ConstraintWeights(gamut=-1.0),
    )
    paths = [v.path for v in validate_scene(scene)]
    assert "display" in paths
    assert "weights.gamut" in paths


# --- round trips -----------------------------------------------------------------------

def full_scene() -> Scene:
    return Scene(
        GamutShape(
            Polygon(((0.0, 0.0), (200.0, 0.0), (200.0, 120.0), (0.0, 120.0))),
            (Polygon(((40.0, 40.0), (70.0, 40.0), (70.0, 70.0), (40.0, 70.0))),),
        ),
        (
            Decal("a", Point2(20.0, 20.0), 8.0, group="g"),
            Decal("b", Point2(100.0, 60.5), 12.0, group="g"),
            Decal("c", Point2(150.0, 90.0), 6.0),
        ),
        (DecalGroup("g", ("a", "b"), 90.0, (AnchorLine("horizontal", 30.0, "floating"),)),),
        ConstraintWeights(9.0, 4.0, 2.0, 1.5),
        reference=(("a", Point2(20.0, 20.0)), ("b", Point2(100.0, 60.5)), ("c", Point2(150.0, 90.0))),
    )


def test_scene_round_trip_is_identity():
    scene = full_scene()
    assert load_scene(save_scene(scene)) == scene


def test_document_round_trip_is_stable():
    blob = save_scene(full_scene())
    assert save_scene(load_scene(blob)) == blob


# --- deltas ------------------------------------------------------------------------------

def hole(lo: float, hi: float) -> Polygon:
    return Polygon(((lo, lo), (hi, lo), (hi, hi), (lo, hi)))


def test_hole_moved_translates_vertices():
    scene = make_scene(display={"outer": MINIMAL["display"]["outer"], "holes": [
        [[40, 40], [60, 40], [60, 60], [40, 60]]]})
    moved = apply_delta(scene, SceneDelta.hole_moved(0, (5.0, 0.0)))
    assert moved.gamut.holes[0].vertices[0] == (45.0, 40.0)
    assert scene.gamut.holes[0].vertices[0] == (40.0, 40.0)  # original untouched


def test_hole_add_then_remove_restores_gamut():
    scene = make_scene()
    added = apply_delta(scene, SceneDelta.hole_added(hole(30.0, 45.0)))
    assert len(added.gamut.holes) == 1
    removed = apply_delta(added, SceneDelta.hole_removed(0))
    assert removed.gamut == scene.gamut


def test_decal_lifecycle_updates_groups():
    scene = make_scene(
        decals=[
            {"id": "a", "pos": [20, 20], "radius": 5, "group": "g"},
            {"id": "b", "pos": [40, 20], "radius": 5, "group": "g"},
        ],
        groups=[{"id": "g", "members": ["a", "b"], "d_max": 50}],
    )
    slim = apply_delta(scene, SceneDelta.decal_removed("b"))
    assert slim.groups[0].members == ("a",)
    grown = apply_delta(slim, SceneDelta.decal_added(Decal("c", Point2(60.0, 20.0), 5.0, group="g")))
    assert grown.groups[0].members == ("a", "c")


def test_decal_pinned_sets_flag_and_position():
    scene = make_scene()
    pinned = apply_delta(scene, SceneDelta.decal_pinned("a", True, (30.0, 40.0)))
    assert pinned.decal("a").pinned is True
    assert pinned.decal("a").pos == Point2(30.0, 40.0)
    released = apply_delta(pinned, SceneDelta.decal_pinned("a", False))
    assert released.decal("a").pinned is False
    assert released.decal("a").pos == Point2(30.0, 40.0)


def test_deltas_referencing_missing_things_fail():
    scene = make_scene()
    with pytest.raises(DeltaError):
        apply_delta(scene, SceneDelta.hole_removed(0))
    with pytest.raises(DeltaError):
        apply_delta(scene, SceneDelta.decal_removed("ghost"))
    with pytest.raises(DeltaError):
        apply_delta(scene, SceneDelta.decal_added(Decal("a", Point2(1.0, 1.0), 2.0)))


def test_delta_producing_invalid_scene_fails():
    scene = make_scene(display={"outer": MINIMAL["display"]["outer"], "holes": [
        [[40, 40], [60, 40], [60, 60], [40, 60]]]})
    with pytest.raises(DeltaError):
        apply_delta(scene, SceneDelta.hole_moved(0, (80.0, 0.0)))  # would leak outside


def test_delta_dict_round_trip():
    deltas = [
        SceneDelta.hole_moved(1, (3.0, -2.0)),
        SceneDelta.hole_added(hole(10.0, 20.0)),
        SceneDelta.hole_removed(0),
        SceneDelta.decal_added(Decal("z", Point2(5.0, 5.0), 2.0, group="g")),
        SceneDelta.decal_removed("z"),
        SceneDelta.decal_pinned("z", True, (1.0, 2.0)),
        SceneDelta.gamut_replaced(GamutShape(hole(0.0, 50.0))),
    ]
    for delta in deltas:
        assert delta_from_dict(delta_to_dict(delta)) == delta
    with pytest.raises(SceneParseError):
        delta_from_dict({"kind": "hole_moved", "hole": 0})
    with pytest.raises(SceneParseError):
        delta_from_dict({"kind": "teleport"})


# --- baselines -----------------------------------------------------------------------------

def test_warp_maps_reference_bbox_onto_gamut_bbox():
    scene = Scene(
        GamutShape(Polygon(((0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)))),
        (Decal("a", Point2(0.0, 0.0), 5.0), Decal("b", Point2(10.0, 10.0), 5.0)),
        reference=(("a", Point2(0.0, 0.0)), ("b", Point2(200.0, 100.0))),
    )
    warped = baseline_warp(scene)
    np.testing.assert_allclose(warped[0], [0.0, 0.0])
    np.testing.assert_allclose(warped[1], [100.0, 100.0])


def test_cover_is_the_reference_itself():
    scene = full_scene()
    np.testing.assert_array_equal(baseline_cover(scene), scene.reference_positions())
    np.testing.assert_array_equal(
        baseline_positions(scene, BaselineKind.COVER), baseline_cover(scene)
    )
    assert compute_metrics(scene, baseline_cover(scene)).displacement == 0.0


def test_degenerate_reference_axis_maps_to_midline():
    scene = Scene(
        GamutShape(Polygon(((0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)))),
        (Decal("a", Point2(0.0, 0.0), 5.0), Decal("b", Point2(10.0, 10.0), 5.0)),
        reference=(("a", Point2(40.0, 10.0)), ("b", Point2(40.0, 90.0))),
    )
    warped = baseline_warp(scene)
    assert warped[0][0] == warped[1][0] == 50.0  # zero-width axis lands mid-gamut


# --- metrics ---------------------------------------------------------------------------------

def test_visibility_full_and_half():
    inside = make_scene()
    assert compute_metrics(inside).visibility == 1.0
    # centre sitting exactly on a straight edge: half the box is out of gamut
    straddling = make_scene(decals=[{"id": "a", "pos": [50, 0], "radius": 10}])
    assert compute_metrics(straddling).visibility == pytest.approx(0.5, abs=0.05)


def test_visibility_counts_mutual_coverage():
    scene = make_scene(decals=[
        {"id": "a", "pos": [40, 50], "radius": 10},
        {"id": "b", "pos": [56, 50], "radius": 10},
    ])
    # boxes overlap over 4 of 20 px; 3 of 16 sample columns fall in the overlap
    assert compute_metrics(scene).visibility == pytest.approx(13.0 / 16.0, abs=1e-9)


def test_alignment_error_is_rms_of_member_offsets():
    scene = make_scene(
        decals=[
            {"id": "a", "pos": [47, 10], "radius": 5, "group": "g"},
            {"id": "b", "pos": [55, 20], "radius": 5, "group": "g"},
        ],
        groups=[{"id": "g", "members": ["a", "b"], "d_max": 50,
                 "anchors": [{"axis": "vertical", "coord": 50, "mode": "fixed"}]}],
    )
    assert compute_metrics(scene).alignment_error == pytest.approx(np.sqrt(17.0), abs=1e-12)


def test_grouping_violation_fraction():
    scene = make_scene(
        decals=[
            {"id": "a", "pos": [10, 10], "radius": 2, "group": "g"},
            {"id": "b", "pos": [90, 90], "radius": 2, "group": "g"},
            {"id": "c", "pos": [12, 12], "radius": 2, "group": "h"},
            {"id": "d", "pos": [14, 10], "radius": 2, "group": "h"},
        ],
        groups=[
            {"id": "g", "members": ["a", "b"], "d_max": 20},
            {"id": "h", "members": ["c", "d"], "d_max": 20},
        ],
    )
    assert compute_metrics(scene).grouping_violation == 0.5
    assert compute_metrics(make_scene()).grouping_violation == 0.0


def test_metrics_stay_in_range_on_awkward_scenes():
    scene = make_scene(decals=[{"id": "a", "pos": [500, 500], "radius": 10}])
    m = compute_metrics(scene)
    assert m.visibility == 0.0
    assert m.alignment_error == 0.0 and m.grouping_violation == 0.0


def test_shipped_scene_files_match_the_corpus():
    root = pathlib.Path(__file__).resolve().parent.parent
    shipped = {p.stem: p for p in (root / "scenes").glob("*.json")
               if not p.name.endswith(".script.json")}
    fresh = corpus.bundled_scenes()
    assert set(shipped) == set(fresh), "run scripts/export_scenes.py"
    for name, path in shipped.items():
        assert json.loads(path.read_bytes()) == scene_to_dict(fresh[name]), name


def test_shipped_demo_script_applies_to_the_demo_scene():
    root = pathlib.Path(__file__).resolve().parent.parent
    steps = json.loads((root / "scenes" / "demo-drag.script.json").read_text())
    scene = corpus.demo_scene()
    assert [s["at"] for s in steps] == sorted({s["at"] for s in steps})
    for step in steps:
        scene = apply_delta(scene, delta_from_dict(step["delta"]))
    validate_scene(scene)
