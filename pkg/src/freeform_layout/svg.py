"""Deterministic SVG rendering of scenes and solved layouts.

One `<svg>` document per scene: the display outline as a filled polygon,
holes hatched, every decal as a circle plus its dashed axis-aligned r-box,
and anchor lines (floating ones re-fitted to the drawn positions) as dashed
guides across the display. Coordinates are used as-is — the scene schema and
SVG are both y-down, so no flipping happens anywhere.
"""
from __future__ import annotations

import xml.etree.ElementTree as ET
from typing import Mapping

import numpy as np

from .geometry import Point2
from .solver import line_refit

_MARGIN = 12.0

# fill colours cycled per group; ungrouped decals use the first entry
_PALETTE = (
    "#4878a8",
    "#a85a48",
    "#58985a",
    "#937ab0",
    "#b08d3e",
    "#4a9a9e",
)


def _fmt(value: float) -> str:
    """Fixed-point with trailing zeros stripped, so output is stable."""
    text = f"{value:.3f}".rstrip("0").rstrip(".")
    return "0" if text == "-0" else text


def _points_attr(vertices) -> str:
    return " ".join(f"{_fmt(x)},{_fmt(y)}" for x, y in vertices)


def _decal_positions(scene, positions) -> dict[str, Point2]:
    if positions is None:
        return {d.id: d.pos for d in scene.decals}
    if isinstance(positions, Mapping):
        return {d.id: Point2(*positions[d.id]) for d in scene.decals}
    arr = np.asarray(positions, dtype=np.float64)
    return {d.id: Point2(float(arr[i, 0]), float(arr[i, 1])) for i, d in enumerate(scene.decals)}


def render_scene_svg(scene, positions=None) -> str:
    """The scene as an SVG document string; `positions` override decal centers.

    `positions` may be a mapping id → (x, y) or an array row-aligned with
    `scene.decals`; omitted means the stored scene positions.
    """
    pos = _decal_positions(scene, positions)
    xmin, ymin, xmax, ymax = scene.gamut.bounding_box
    pad = max((d.radius for d in scene.decals), default=0.0) + _MARGIN
    x0, y0 = xmin - pad, ymin - pad
    width, height = (xmax - xmin) + 2 * pad, (ymax - ymin) + 2 * pad

    svg = ET.Element(
        "svg",
        {
            "xmlns": "http://www.w3.org/2000/svg",
            "viewBox": f"{_fmt(x0)} {_fmt(y0)} {_fmt(width)} {_fmt(height)}",
            "width": _fmt(width),
            "height": _fmt(height),
        },
    )

    defs = ET.SubElement(svg, "defs")
    pattern = ET.SubElement(
        defs,
        "pattern",
        {
            "id": "hole-hatch",
            "width": "6",
            "height": "6",
            "patternUnits": "userSpaceOnUse",
            "patternTransform": "rotate(45)",
        },
    )
    ET.SubElement(
        pattern,
        "line",
        {"x1": "0", "y1": "0", "x2": "0", "y2": "6", "stroke": "#8a8a8a", "stroke-width": "2"},
    )

    display = ET.SubElement(svg, "g", {"class": "display"})
    ET.SubElement(
        display,
        "polygon",
        {
            "class": "outer",
            "points": _points_attr(scene.gamut.outer.vertices),
            "fill": "#f4f1ea",
            "stroke": "#333333",
            "stroke-width": "1.5",
        },
    )
    for hole in scene.gamut.holes:
        ET.SubElement(
            display,
            "polygon",
            {
                "class": "hole",
                "points": _points_attr(hole.vertices),
                "fill": "url(#hole-hatch)",
                "stroke": "#555555",
                "stroke-width": "1",
            },
        )

    guides = ET.SubElement(svg, "g", {"class": "anchors"})
    for group in scene.groups:
        for line in line_refit(group, pos):
            if line.axis == "vertical":
                attrs = {"x1": _fmt(line.coord), "y1": _fmt(y0), "x2": _fmt(line.coord), "y2": _fmt(y0 + height)}
            else:
                attrs = {"x1": _fmt(x0), "y1": _fmt(line.coord), "x2": _fmt(x0 + width), "y2": _fmt(line.coord)}
            attrs.update(
                {
                    "class": "anchor",
                    "stroke": "#777777",
                    "stroke-width": "0.75",
                    "stroke-dasharray": "6 4",
                }
            )
            ET.SubElement(guides, "line", attrs)

    group_index = {g.id: k for k, g in enumerate(scene.groups)}
    badges = ET.SubElement(svg, "g", {"class": "decals"})
    for decal in scene.decals:
        p = pos[decal.id]
        color = _PALETTE[(group_index.get(decal.group, -1) + 1) % len(_PALETTE)]
        node = ET.SubElement(badges, "g", {"class": "decal"})
        title = ET.SubElement(node, "title")
        title.text = decal.id
        ET.SubElement(
            node,
            "rect",
            {
                "x": _fmt(p.x - decal.radius),
                "y": _fmt(p.y - decal.radius),
                "width": _fmt(2 * decal.radius),
                "height": _fmt(2 * decal.radius),
                "fill": "none",
                "stroke": color,
                "stroke-width": "0.75",
                "stroke-dasharray": "3 3",
            },
        )
        ET.SubElement(
            node,
            "circle",
            {
                "cx": _fmt(p.x),
                "cy": _fmt(p.y),
                "r": _fmt(decal.radius),
                "fill": color,
                "fill-opacity": "0.85",
                "stroke": "#222222" if decal.pinned else color,
                "stroke-width": "1.5" if decal.pinned else "1",
            },
        )

    return ET.tostring(svg, encoding="unicode") + "\n"


def write_scene_svg(path, scene, positions=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(render_scene_svg(scene, positions))
