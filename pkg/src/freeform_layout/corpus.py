"""Bundled example scenes used by the test suite, the docs and the CLI demos.

Everything here is constructed from fixed arithmetic (no RNG) so repeated
builds are identical. Scenes come in four families:

- `oracle_scenes`: one or two decals, small enough for the exhaustive lattice
  oracle to certify the solver's final cost.
- `feasible_scenes`: a zero-cost layout is known to exist; starts are
  perturbed so the solver has real work to do.
- `occlusion_scenes`: a reference layout designed for a rectangle meets a
  display with holes or cut corners; used to compare against the warp/cover
  baselines.
- `perf_scene` / `anchored_field_scene`: interactive-rate sizing targets
  (50 decals, ~512 px); the anchored variant has a unique zero-cost layout so
  drag sessions are checked against a fresh solve.

`bundled_scenes` names every scene; `scripts/export_scenes.py` snapshots them
to `scenes/*.json` for the CLI and the sandbox UI.
"""
from __future__ import annotations

import math

from .constraints import AnchorLine, ConstraintWeights, Decal, DecalGroup
from .geometry import GamutShape, Point2, Polygon
from .scene import Scene


def _rect(x0: float, y0: float, x1: float, y1: float) -> Polygon:
    return Polygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


def _ngon(n: int, radius: float, cx: float, cy: float, phase: float = 0.0) -> Polygon:
    return Polygon(
        tuple(
            (
                cx + radius * math.cos(2.0 * math.pi * k / n + phase),
                cy + radius * math.sin(2.0 * math.pi * k / n + phase),
            )
            for k in range(n)
        )
    )


# --- oracle corpus ------------------------------------------------------------------------


def oracle_scenes() -> list[Scene]:
    """Five 1-2 decal scenes small enough for `brute_force_oracle` at 1 px."""
    round_display = Scene(
        GamutShape(_ngon(64, 60.0, 64.0, 64.0)),
        (Decal("badge", Point2(140.0, 64.0), 10.0),),
    )
    hole_escape = Scene(
        GamutShape(_rect(0, 0, 100, 100), (_rect(40, 40, 60, 60),)),
        (Decal("badge", Point2(49.0, 52.0), 8.0),),
    )
    tight_pair = Scene(
        GamutShape(_rect(0, 0, 25, 25)),
        (Decal("a", Point2(10.0, 10.0), 10.0), Decal("b", Point2(16.0, 15.0), 10.0)),
    )
    anchored_pair = Scene(
        GamutShape(_rect(0, 0, 50, 50)),
        (
            Decal("a", Point2(12.0, 21.0), 8.0, group="pair"),
            Decal("b", Point2(38.0, 30.0), 8.0, group="pair"),
        ),
        (DecalGroup("pair", ("a", "b"), 20.0, (AnchorLine("vertical", 25.0, "fixed"),)),),
    )
    l_corner = Scene(
        GamutShape(
            Polygon(((0, 0), (100, 0), (100, 40), (40, 40), (40, 100), (0, 100)))
        ),
        (Decal("badge", Point2(46.0, 46.0), 6.0),),
    )
    return [round_display, hole_escape, tight_pair, anchored_pair, l_corner]


# --- feasible corpus ------------------------------------------------------------------------


def feasible_scenes() -> list[Scene]:
    """Scenes built around a known zero-cost layout, started off of it."""
    scenes: list[Scene] = []

    # ring of six: rest positions on a circle, started squeezed toward centre
    rest = [
        (
            200.0 + 70.0 * math.cos(k * math.pi / 3.0),
            200.0 + 70.0 * math.sin(k * math.pi / 3.0),
        )
        for k in range(6)
    ]
    decals = tuple(
        Decal(
            f"dot{k}",
            Point2(200.0 + (x - 200.0) * 0.35, 200.0 + (y - 200.0) * 0.35),
            11.0,
        )
        for k, (x, y) in enumerate(rest)
    )
    scenes.append(Scene(GamutShape(_rect(0, 0, 400, 400)), decals))

    # two anchored rows inside a wide strip; rows start vertically swapped a bit
    row_decals = []
    for k in range(3):
        row_decals.append(Decal(f"top{k}", Point2(70.0 + 60.0 * k, 74.0), 12.0, group="top"))
        row_decals.append(Decal(f"bot{k}", Point2(82.0 + 60.0 * k, 126.0), 12.0, group="bot"))
    groups = (
        DecalGroup("top", ("top0", "top1", "top2"), 150.0, (AnchorLine("horizontal", 60.0, "fixed"),)),
        DecalGroup("bot", ("bot0", "bot1", "bot2"), 150.0, (AnchorLine("horizontal", 140.0, "fixed"),)),
    )
    scenes.append(Scene(GamutShape(_rect(0, 0, 300, 200)), tuple(row_decals), groups))

    # four badges crowding a central hole's margins
    hole = _rect(80, 80, 120, 120)
    crowd = tuple(
        Decal(name, Point2(x, y), 12.0)
        for name, (x, y) in (
            ("nw", (72.0, 74.0)),
            ("ne", (126.0, 72.0)),
            ("se", (128.0, 126.0)),
            ("sw", (74.0, 128.0)),
        )
    )
    scenes.append(Scene(GamutShape(_rect(0, 0, 200, 200), (hole,)), crowd))

    # octagonal display, three decals started outside the rim
    tri = tuple(
        Decal(f"pip{k}", Point2(110.0 + 95.0 * math.cos(a), 110.0 + 95.0 * math.sin(a)), 15.0)
        for k, a in enumerate((0.3, 2.2, 4.4))
    )
    scenes.append(Scene(GamutShape(_ngon(8, 90.0, 110.0, 110.0, math.pi / 8.0)), tri))
    return scenes


# --- occlusion corpus -------------------------------------------------------------------------


def _grid_reference(columns=(60.0, 120.0, 180.0), rows=(50.0, 110.0), radius=10.0):
    """Two rows of three decals plus their reference layout, rows anchored."""
    decals = []
    reference = []
    for r, y in enumerate(rows):
        for c, x in enumerate(columns):
            name = f"r{r}c{c}"
            decals.append(Decal(name, Point2(x, y), radius, group=f"row{r}"))
            reference.append((name, Point2(x, y)))
    groups = tuple(
        DecalGroup(
            f"row{r}",
            tuple(f"r{r}c{c}" for c in range(len(columns))),
            170.0,
            (AnchorLine("horizontal", y, "fixed"),),
        )
        for r, y in enumerate(rows)
    )
    return tuple(decals), groups, tuple(reference)


def occlusion_scenes() -> list[Scene]:
    """Ten scenarios where the designed-for-rectangle layout meets obstacles."""
    scenes: list[Scene] = []
    box = _rect(0, 0, 240, 160)

    # 1-4: a hole parked over a different reference decal each time
    for k, (hx, hy, half) in enumerate(
        ((60.0, 50.0, 18.0), (120.0, 50.0, 22.0), (180.0, 110.0, 16.0), (120.0, 110.0, 26.0))
    ):
        decals, groups, reference = _grid_reference()
        hole = _rect(hx - half, hy - half, hx + half, hy + half)
        scenes.append(Scene(GamutShape(box, (hole,)), decals, groups, reference=reference))

    # 5: two holes over the top row's outer decals
    decals, groups, reference = _grid_reference()
    scenes.append(
        Scene(
            GamutShape(box, (_rect(44, 34, 76, 66), _rect(164, 34, 196, 66))),
            decals,
            groups,
            reference=reference,
        )
    )

    # 6: L-shaped display; the notch swallows the top-right reference corner
    decals, groups, reference = _grid_reference()
    l_outline = Polygon(((0, 0), (150, 0), (150, 80), (240, 80), (240, 160), (0, 160)))
    scenes.append(Scene(GamutShape(l_outline), decals, groups, reference=reference))

    # 7: round display, reference corners spill outside; no anchors to honour
    decals, _groups, reference = _grid_reference(radius=9.0)
    free = tuple(Decal(d.id, d.pos, d.radius) for d in decals)
    scenes.append(
        Scene(GamutShape(_ngon(40, 78.0, 120.0, 80.0)), free, (), reference=reference)
    )

    # 8: arch (half-octagon over a base) with a hole near the springing line
    decals, groups, reference = _grid_reference(rows=(60.0, 110.0))
    arch = Polygon(
        ((0, 160), (0, 70), (40, 20), (200, 20), (240, 70), (240, 160))
    )
    scenes.append(
        Scene(GamutShape(arch, (_rect(100, 44, 140, 76),)), decals, groups, reference=reference)
    )

    # 9: ungrouped badges against a diagonal cut corner
    badges = tuple(
        Decal(f"b{k}", Point2(30.0 + 45.0 * k, 30.0), 11.0) for k in range(5)
    )
    cut = Polygon(((0, 70), (70, 0), (240, 0), (240, 160), (0, 160)))
    scenes.append(
        Scene(
            GamutShape(cut, (_rect(100, 90, 150, 130),)),
            badges,
            reference=tuple((d.id, d.pos) for d in badges),
        )
    )

    # 10: octagon with two holes, both rows squeezed
    decals, groups, reference = _grid_reference(columns=(80.0, 120.0, 160.0))
    scenes.append(
        Scene(
            GamutShape(
                _ngon(8, 85.0, 120.0, 80.0, math.pi / 8.0),
                (_rect(66, 36, 96, 62), _rect(140, 96, 170, 126)),
            ),
            decals,
            groups,
            reference=reference,
        )
    )
    return scenes


# --- sizing target ----------------------------------------------------------------------------


def perf_scene(n_decals: int = 50) -> Scene:
    """Interactive-rate target: many decals in a ~512 px display with a hole."""
    outline = _ngon(8, 250.0, 256.0, 256.0, math.pi / 8.0)
    hole = _rect(150, 150, 230, 230)
    decals = []
    for k in range(n_decals):
        # low-discrepancy-ish spiral keeps the start spread but deterministic
        angle = 2.399963 * k
        rad = 205.0 * math.sqrt((k + 0.5) / n_decals)
        decals.append(
            Decal(
                f"d{k:02d}",
                Point2(256.0 + rad * math.cos(angle), 256.0 + rad * math.sin(angle)),
                8.0 + (k % 3) * 2.0,
            )
        )
    return Scene(GamutShape(outline, (hole,)), tuple(decals))


def anchored_field_scene() -> Scene:
    """Fifty badges held by per-badge anchor crosses, plus an obstacle corridor.

    Every decal sits at the intersection of its own fixed vertical and
    horizontal line, so the zero-cost layout is unique: wherever an obstacle
    pushes things during an interactive drag, removing it lets the layout
    relax back to exactly one answer. The hole sits in a corridor that
    overlaps the rows above and below it by half a radius, so a sweep along
    the corridor nudges those rows aside and releases them; it has 300 px of
    travel before anything is left in contact.
    """
    outline = Polygon(((0, 0), (520, 0), (520, 440), (440, 520), (0, 520)))
    hole = _rect(20, 210, 90, 260)
    columns = (60.0, 105.0, 150.0, 195.0, 240.0, 285.0)
    rows = (75.0, 120.0, 165.0, 205.0, 265.0, 310.0, 355.0, 400.0)
    points = [(x, y) for y in rows for x in columns]
    points += [(420.0, 75.0), (420.0, 120.0)]

    decals = []
    groups = []
    for k, (x, y) in enumerate(points):
        decal_id = f"b{k:02d}"
        decals.append(Decal(decal_id, Point2(x, y), 10.0, group=f"pin-{decal_id}"))
        groups.append(
            DecalGroup(
                f"pin-{decal_id}",
                (decal_id,),
                50.0,
                (AnchorLine("vertical", x, "fixed"), AnchorLine("horizontal", y, "fixed")),
            )
        )
    return Scene(GamutShape(outline, (hole,)), tuple(decals), tuple(groups))


def demo_scene() -> Scene:
    """Small showcase used by the README walkthrough."""
    decals, groups, reference = _grid_reference()
    weights = ConstraintWeights()
    # hole sits off-centre over r0c1 so the escape direction is unambiguous
    return Scene(
        GamutShape(_rect(0, 0, 240, 160), (_rect(104, 30, 144, 70),)),
        decals,
        groups,
        weights,
        reference=reference,
    )


def bundled_scenes() -> dict[str, Scene]:
    """Every shipped scene keyed by its `scenes/<name>.json` stem."""
    named: dict[str, Scene] = {}
    for i, scene in enumerate(oracle_scenes()):
        named[f"oracle-{i:02d}"] = scene
    for i, scene in enumerate(feasible_scenes()):
        named[f"feasible-{i:02d}"] = scene
    for i, scene in enumerate(occlusion_scenes()):
        named[f"occlusion-{i:02d}"] = scene
    named["perf-50"] = perf_scene()
    named["anchored-field"] = anchored_field_scene()
    named["demo"] = demo_scene()
    return named
