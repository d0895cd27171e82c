"""Scene documents: the JSON schema, edit deltas, baselines and layout metrics.

A scene bundles the display shape, the decals to place, grouping/alignment
structure, constraint weights, solver settings and (optionally) the reference
layout the content was originally designed for. Scenes are immutable; edits
go through `apply_delta`, which returns a new validated scene.

Coordinates are pixels with y growing downward, matching the SVG output.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Mapping

import numpy as np

from .constraints import AnchorLine, ConstraintWeights, Decal, DecalGroup
from .geometry import GamutShape, Point2, Polygon, signed_distance_batch
from .solver import SolverConfig


class SceneError(ValueError):
    """Base class for scene document problems."""


class SceneParseError(SceneError):
    """Malformed document; `path` names the offending field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Violation:
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


class SceneValidationError(SceneError):
    def __init__(self, violations: list[Violation]) -> None:
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


class DeltaError(SceneError):
    """A delta cannot be applied to the current scene."""


@dataclass(frozen=True)
class Scene:
    gamut: GamutShape
    decals: tuple[Decal, ...]
    groups: tuple[DecalGroup, ...] = ()
    weights: ConstraintWeights = ConstraintWeights()
    solver: SolverConfig = SolverConfig()
    reference: tuple[tuple[str, Point2], ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "decals", tuple(self.decals))
        object.__setattr__(self, "groups", tuple(self.groups))

    @cached_property
    def ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.decals)

    def decal(self, decal_id: str) -> Decal:
        for d in self.decals:
            if d.id == decal_id:
                return d
        raise KeyError(decal_id)

    def positions(self) -> np.ndarray:
        return np.array([[d.pos.x, d.pos.y] for d in self.decals], dtype=np.float64).reshape(
            len(self.decals), 2
        )

    def with_positions(self, positions: np.ndarray | Mapping[str, Point2]) -> "Scene":
        """Copy of the scene with decal centres replaced."""
        if isinstance(positions, Mapping):
            decals = tuple(
                replace(d, pos=Point2(*positions[d.id])) if d.id in positions else d
                for d in self.decals
            )
        else:
            arr = np.asarray(positions, dtype=np.float64).reshape(len(self.decals), 2)
            decals = tuple(
                replace(d, pos=Point2(float(x), float(y)))
                for d, (x, y) in zip(self.decals, arr)
            )
        return replace(self, decals=decals)

    def reference_positions(self) -> np.ndarray:
        if self.reference is None:
            raise SceneError("scene has no reference_layout")
        by_id = {rid: pos for rid, pos in self.reference}
        return np.array([[by_id[d.id].x, by_id[d.id].y] for d in self.decals])


# --- strict JSON parsing ---------------------------------------------------------------

def _check_keys(obj: Mapping[str, Any], path: str, required: tuple[str, ...], optional: tuple[str, ...] = ()) -> None:
    if not isinstance(obj, dict):
        raise SceneParseError(path, f"expected an object, got {type(obj).__name__}")
    for key in obj:
        if key not in required and key not in optional:
            raise SceneParseError(f"{path}.{key}" if path else key, "unknown field")
    for key in required:
        if key not in obj:
            raise SceneParseError(path or key, f"missing required field '{key}'")


def _number(value: Any, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneParseError(path, f"expected a number, got {type(value).__name__}")
    return float(value)


def _integer(value: Any, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SceneParseError(path, f"expected an integer, got {type(value).__name__}")
    return value


def _boolean(value: Any, path: str) -> bool:
    if not isinstance(value, bool):
        raise SceneParseError(path, f"expected a boolean, got {type(value).__name__}")
    return value


def _string(value: Any, path: str) -> str:
    if not isinstance(value, str):
        raise SceneParseError(path, f"expected a string, got {type(value).__name__}")
    return value


def _point(value: Any, path: str) -> Point2:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise SceneParseError(path, "expected a [x, y] pair")
    return Point2(_number(value[0], f"{path}[0]"), _number(value[1], f"{path}[1]"))


def _polygon(value: Any, path: str) -> Polygon:
    if not isinstance(value, list):
        raise SceneParseError(path, "expected a list of [x, y] vertices")
    return Polygon(tuple(_point(v, f"{path}[{i}]") for i, v in enumerate(value)))


def _parse_display(obj: Any, path: str = "display") -> GamutShape:
    _check_keys(obj, path, required=("outer",), optional=("holes",))
    outer = _polygon(obj["outer"], f"{path}.outer")
    holes = obj.get("holes", [])
    if not isinstance(holes, list):
        raise SceneParseError(f"{path}.holes", "expected a list of polygons")
    return GamutShape(
        outer, tuple(_polygon(h, f"{path}.holes[{i}]") for i, h in enumerate(holes))
    )


def _parse_decal(obj: Any, path: str) -> Decal:
    _check_keys(obj, path, required=("id", "pos", "radius"), optional=("group",))
    return Decal(
        id=_string(obj["id"], f"{path}.id"),
        pos=_point(obj["pos"], f"{path}.pos"),
        radius=_number(obj["radius"], f"{path}.radius"),
        group=_string(obj["group"], f"{path}.group") if "group" in obj else None,
    )


def _parse_anchor(obj: Any, path: str) -> AnchorLine:
    _check_keys(obj, path, required=("axis", "coord", "mode"))
    axis = _string(obj["axis"], f"{path}.axis")
    if axis not in ("vertical", "horizontal"):
        raise SceneParseError(f"{path}.axis", f"expected 'vertical' or 'horizontal', got '{axis}'")
    mode = _string(obj["mode"], f"{path}.mode")
    if mode not in ("fixed", "floating"):
        raise SceneParseError(f"{path}.mode", f"expected 'fixed' or 'floating', got '{mode}'")
    return AnchorLine(axis, _number(obj["coord"], f"{path}.coord"), mode)


def _parse_group(obj: Any, path: str) -> DecalGroup:
    _check_keys(obj, path, required=("id", "members", "d_max"), optional=("anchors",))
    members = obj["members"]
    if not isinstance(members, list):
        raise SceneParseError(f"{path}.members", "expected a list of decal ids")
    anchors = obj.get("anchors", [])
    if not isinstance(anchors, list):
        raise SceneParseError(f"{path}.anchors", "expected a list of anchor lines")
    return DecalGroup(
        id=_string(obj["id"], f"{path}.id"),
        members=tuple(_string(m, f"{path}.members[{i}]") for i, m in enumerate(members)),
        d_max=_number(obj["d_max"], f"{path}.d_max"),
        anchors=tuple(_parse_anchor(a, f"{path}.anchors[{i}]") for i, a in enumerate(anchors)),
    )


def _parse_weights(obj: Any, path: str = "weights") -> ConstraintWeights:
    _check_keys(obj, path, required=(), optional=("gamut", "min_distance", "max_distance", "anchor"))
    base = ConstraintWeights()
    return ConstraintWeights(
        gamut=_number(obj["gamut"], f"{path}.gamut") if "gamut" in obj else base.gamut,
        min_distance=_number(obj["min_distance"], f"{path}.min_distance")
        if "min_distance" in obj
        else base.min_distance,
        max_distance=_number(obj["max_distance"], f"{path}.max_distance")
        if "max_distance" in obj
        else base.max_distance,
        anchor=_number(obj["anchor"], f"{path}.anchor") if "anchor" in obj else base.anchor,
    )


_SOLVER_FIELDS = (
    "e_step",
    "max_iterations",
    "step_tolerance",
    "cost_tolerance",
    "lm_lambda_init",
    "lm_lambda_factor",
    "sdf_cell_size",
    "use_sdf_cache",
)


def _parse_solver(obj: Any, path: str = "solver") -> SolverConfig:
    _check_keys(obj, path, required=(), optional=_SOLVER_FIELDS)
    base = SolverConfig()
    kwargs: dict[str, Any] = {}
    for name in _SOLVER_FIELDS:
        if name not in obj:
            continue
        if name == "max_iterations":
            kwargs[name] = _integer(obj[name], f"{path}.{name}")
        elif name == "use_sdf_cache":
            kwargs[name] = _boolean(obj[name], f"{path}.{name}")
        else:
            kwargs[name] = _number(obj[name], f"{path}.{name}")
    return replace(base, **kwargs)


def scene_from_dict(doc: Any) -> Scene:
    """Parse a scene document; strict about unknown fields, lenient about none."""
    _check_keys(
        doc,
        "",
        required=("display", "decals"),
        optional=("groups", "weights", "solver", "reference_layout"),
    )
    gamut = _parse_display(doc["display"])
    if not isinstance(doc["decals"], list):
        raise SceneParseError("decals", "expected a list")
    decals = tuple(_parse_decal(d, f"decals[{i}]") for i, d in enumerate(doc["decals"]))
    raw_groups = doc.get("groups", [])
    if not isinstance(raw_groups, list):
        raise SceneParseError("groups", "expected a list")
    groups = tuple(_parse_group(g, f"groups[{i}]") for i, g in enumerate(raw_groups))
    weights = _parse_weights(doc["weights"]) if "weights" in doc else ConstraintWeights()
    solver = _parse_solver(doc["solver"]) if "solver" in doc else SolverConfig()
    reference = None
    if "reference_layout" in doc:
        raw_ref = doc["reference_layout"]
        if not isinstance(raw_ref, list):
            raise SceneParseError("reference_layout", "expected a list")
        entries = []
        for i, item in enumerate(raw_ref):
            _check_keys(item, f"reference_layout[{i}]", required=("id", "pos"))
            entries.append(
                (
                    _string(item["id"], f"reference_layout[{i}].id"),
                    _point(item["pos"], f"reference_layout[{i}].pos"),
                )
            )
        reference = tuple(entries)
    return Scene(gamut, decals, groups, weights, solver, reference)


def scene_to_dict(scene: Scene) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "display": {
            "outer": [[x, y] for x, y in scene.gamut.outer.vertices],
            "holes": [[[x, y] for x, y in h.vertices] for h in scene.gamut.holes],
        },
        "decals": [
            {
                "id": d.id,
                "pos": [d.pos.x, d.pos.y],
                "radius": d.radius,
                **({"group": d.group} if d.group is not None else {}),
            }
            for d in scene.decals
        ],
        "groups": [
            {
                "id": g.id,
                "members": list(g.members),
                "d_max": g.d_max,
                "anchors": [
                    {"axis": a.axis, "coord": a.coord, "mode": a.mode} for a in g.anchors
                ],
            }
            for g in scene.groups
        ],
        "weights": {
            "gamut": scene.weights.gamut,
            "min_distance": scene.weights.min_distance,
            "max_distance": scene.weights.max_distance,
            "anchor": scene.weights.anchor,
        },
        "solver": {name: getattr(scene.solver, name) for name in _SOLVER_FIELDS},
    }
    if scene.reference is not None:
        doc["reference_layout"] = [
            {"id": rid, "pos": [pos.x, pos.y]} for rid, pos in scene.reference
        ]
    return doc


def load_scene(data: bytes | str) -> Scene:
    """Parse and validate a scene document (UTF-8 JSON)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise SceneParseError("", f"invalid JSON: {exc}") from exc
    scene = scene_from_dict(doc)
    violations = validate_scene(scene)
    if violations:
        raise SceneValidationError(violations)
    return scene


def save_scene(scene: Scene) -> bytes:
    """Canonical UTF-8 JSON; `load_scene(save_scene(s))` reproduces `s` exactly."""
    return (json.dumps(scene_to_dict(scene), indent=2) + "\n").encode("utf-8")


# --- validation --------------------------------------------------------------------------

def validate_scene(scene: Scene) -> list[Violation]:
    """Structural problems that make a scene unusable; empty list means valid."""
    out: list[Violation] = []
    for problem in scene.gamut.validate():
        out.append(Violation("display", problem))

    seen: set[str] = set()
    for i, d in enumerate(scene.decals):
        if d.id in seen:
            out.append(Violation(f"decals[{i}].id", f"duplicate id '{d.id}'"))
        seen.add(d.id)
        if not (np.isfinite(d.pos.x) and np.isfinite(d.pos.y)):
            out.append(Violation(f"decals[{i}].pos", "coordinates must be finite"))
        if not np.isfinite(d.radius) or d.radius <= 0.0:
            out.append(Violation(f"decals[{i}].radius", "must be positive"))

    group_ids: set[str] = set()
    members_of: dict[str, set[str]] = {}
    for i, g in enumerate(scene.groups):
        if g.id in group_ids:
            out.append(Violation(f"groups[{i}].id", f"duplicate id '{g.id}'"))
        group_ids.add(g.id)
        if not np.isfinite(g.d_max) or g.d_max <= 0.0:
            out.append(Violation(f"groups[{i}].d_max", "must be positive"))
        seen_members: set[str] = set()
        for j, m in enumerate(g.members):
            if m not in seen:
                out.append(Violation(f"groups[{i}].members[{j}]", f"unknown decal id '{m}'"))
            if m in seen_members:
                out.append(Violation(f"groups[{i}].members[{j}]", f"repeated member '{m}'"))
            seen_members.add(m)
        members_of[g.id] = seen_members
        for j, a in enumerate(g.anchors):
            if not np.isfinite(a.coord):
                out.append(Violation(f"groups[{i}].anchors[{j}].coord", "must be finite"))

    for i, d in enumerate(scene.decals):
        if d.group is not None:
            if d.group not in members_of:
                out.append(Violation(f"decals[{i}].group", f"unknown group '{d.group}'"))
            elif d.id not in members_of[d.group]:
                out.append(
                    Violation(f"decals[{i}].group", f"group '{d.group}' does not list '{d.id}'")
                )

    for kind in ("gamut", "min_distance", "max_distance", "anchor"):
        w = scene.weights.of(kind)
        if not np.isfinite(w) or w < 0.0:
            out.append(Violation(f"weights.{kind}", "must be a non-negative number"))

    cfg = scene.solver
    if cfg.e_step < 0.0:
        out.append(Violation("solver.e_step", "must be non-negative"))
    if cfg.max_iterations < 1:
        out.append(Violation("solver.max_iterations", "must be at least 1"))
    for name in ("step_tolerance", "cost_tolerance", "lm_lambda_init", "sdf_cell_size"):
        if getattr(cfg, name) <= 0.0:
            out.append(Violation(f"solver.{name}", "must be positive"))
    if cfg.lm_lambda_factor <= 1.0:
        out.append(Violation("solver.lm_lambda_factor", "must be greater than 1"))

    if scene.reference is not None:
        ref_seen: set[str] = set()
        for i, (rid, _pos) in enumerate(scene.reference):
            if rid not in seen:
                out.append(Violation(f"reference_layout[{i}].id", f"unknown decal id '{rid}'"))
            if rid in ref_seen:
                out.append(Violation(f"reference_layout[{i}].id", f"duplicate id '{rid}'"))
            ref_seen.add(rid)
        for d in scene.decals:
            if d.id not in ref_seen:
                out.append(
                    Violation("reference_layout", f"missing position for decal '{d.id}'")
                )
    return out


# --- deltas ------------------------------------------------------------------------------

_DELTA_KINDS = (
    "gamut_replaced",
    "hole_added",
    "hole_moved",
    "hole_removed",
    "decal_added",
    "decal_removed",
    "decal_pinned",
)


@dataclass(frozen=True)
class SceneDelta:
    """One incremental edit; payload fields depend on `kind`."""

    kind: str
    display: GamutShape | None = None
    polygon: Polygon | None = None
    hole: int | None = None
    offset: Point2 | None = None
    decal: Decal | None = None
    id: str | None = None
    pinned: bool | None = None
    pos: Point2 | None = None

    @staticmethod
    def gamut_replaced(display: GamutShape) -> "SceneDelta":
        return SceneDelta("gamut_replaced", display=display)

    @staticmethod
    def hole_added(polygon: Polygon) -> "SceneDelta":
        return SceneDelta("hole_added", polygon=polygon)

    @staticmethod
    def hole_moved(hole: int, offset: tuple[float, float]) -> "SceneDelta":
        return SceneDelta("hole_moved", hole=hole, offset=Point2(*offset))

    @staticmethod
    def hole_removed(hole: int) -> "SceneDelta":
        return SceneDelta("hole_removed", hole=hole)

    @staticmethod
    def decal_added(decal: Decal) -> "SceneDelta":
        return SceneDelta("decal_added", decal=decal)

    @staticmethod
    def decal_removed(decal_id: str) -> "SceneDelta":
        return SceneDelta("decal_removed", id=decal_id)

    @staticmethod
    def decal_pinned(decal_id: str, pinned: bool, pos: tuple[float, float] | None = None) -> "SceneDelta":
        return SceneDelta(
            "decal_pinned", id=decal_id, pinned=pinned, pos=Point2(*pos) if pos else None
        )

    def touches_gamut(self) -> bool:
        return self.kind in ("gamut_replaced", "hole_added", "hole_moved", "hole_removed")


def delta_from_dict(obj: Any, path: str = "delta") -> SceneDelta:
    if not isinstance(obj, dict):
        raise SceneParseError(path, "expected an object")
    kind = obj.get("kind")
    if kind not in _DELTA_KINDS:
        raise SceneParseError(f"{path}.kind", f"unknown delta kind {kind!r}")
    if kind == "gamut_replaced":
        _check_keys(obj, path, required=("kind", "display"))
        return SceneDelta.gamut_replaced(_parse_display(obj["display"], f"{path}.display"))
    if kind == "hole_added":
        _check_keys(obj, path, required=("kind", "polygon"))
        return SceneDelta.hole_added(_polygon(obj["polygon"], f"{path}.polygon"))
    if kind == "hole_moved":
        _check_keys(obj, path, required=("kind", "hole", "offset"))
        return SceneDelta.hole_moved(
            _integer(obj["hole"], f"{path}.hole"), _point(obj["offset"], f"{path}.offset")
        )
    if kind == "hole_removed":
        _check_keys(obj, path, required=("kind", "hole"))
        return SceneDelta.hole_removed(_integer(obj["hole"], f"{path}.hole"))
    if kind == "decal_added":
        _check_keys(obj, path, required=("kind", "decal"))
        return SceneDelta.decal_added(_parse_decal(obj["decal"], f"{path}.decal"))
    if kind == "decal_removed":
        _check_keys(obj, path, required=("kind", "id"))
        return SceneDelta.decal_removed(_string(obj["id"], f"{path}.id"))
    _check_keys(obj, path, required=("kind", "id", "pinned"), optional=("pos",))
    return SceneDelta.decal_pinned(
        _string(obj["id"], f"{path}.id"),
        _boolean(obj["pinned"], f"{path}.pinned"),
        _point(obj["pos"], f"{path}.pos") if "pos" in obj else None,
    )


def delta_to_dict(delta: SceneDelta) -> dict[str, Any]:
    out: dict[str, Any] = {"kind": delta.kind}
    if delta.kind == "gamut_replaced":
        assert delta.display is not None
        out["display"] = {
            "outer": [[x, y] for x, y in delta.display.outer.vertices],
            "holes": [[[x, y] for x, y in h.vertices] for h in delta.display.holes],
        }
    elif delta.kind == "hole_added":
        assert delta.polygon is not None
        out["polygon"] = [[x, y] for x, y in delta.polygon.vertices]
    elif delta.kind == "hole_moved":
        out["hole"] = delta.hole
        assert delta.offset is not None
        out["offset"] = [delta.offset.x, delta.offset.y]
    elif delta.kind == "hole_removed":
        out["hole"] = delta.hole
    elif delta.kind == "decal_added":
        d = delta.decal
        assert d is not None
        out["decal"] = {
            "id": d.id,
            "pos": [d.pos.x, d.pos.y],
            "radius": d.radius,
            **({"group": d.group} if d.group is not None else {}),
        }
    elif delta.kind == "decal_removed":
        out["id"] = delta.id
    else:
        out["id"] = delta.id
        out["pinned"] = delta.pinned
        if delta.pos is not None:
            out["pos"] = [delta.pos.x, delta.pos.y]
    return out


def apply_delta(scene: Scene, delta: SceneDelta) -> Scene:
    """Apply one edit and return the new scene; the input is never mutated.

    Raises DeltaError when the delta references a missing hole/decal or when
    the edited scene would no longer validate.
    """
    if delta.kind == "gamut_replaced":
        assert delta.display is not None
        new = replace(scene, gamut=delta.display)
    elif delta.kind == "hole_added":
        assert delta.polygon is not None
        new = replace(
            scene, gamut=GamutShape(scene.gamut.outer, scene.gamut.holes + (delta.polygon,))
        )
    elif delta.kind in ("hole_moved", "hole_removed"):
        idx = delta.hole
        if idx is None or not (0 <= idx < len(scene.gamut.holes)):
            raise DeltaError(f"hole {idx} does not exist (scene has {len(scene.gamut.holes)})")
        holes = list(scene.gamut.holes)
        if delta.kind == "hole_moved":
            assert delta.offset is not None
            holes[idx] = holes[idx].translated(delta.offset.x, delta.offset.y)
        else:
            del holes[idx]
        new = replace(scene, gamut=GamutShape(scene.gamut.outer, tuple(holes)))
    elif delta.kind == "decal_added":
        assert delta.decal is not None
        if any(d.id == delta.decal.id for d in scene.decals):
            raise DeltaError(f"decal id '{delta.decal.id}' already exists")
        decals = scene.decals + (delta.decal,)
        groups = scene.groups
        if delta.decal.group is not None:
            if not any(g.id == delta.decal.group for g in groups):
                raise DeltaError(f"decal group '{delta.decal.group}' does not exist")
            groups = tuple(
                replace(g, members=g.members + (delta.decal.id,))
                if g.id == delta.decal.group and delta.decal.id not in g.members
                else g
                for g in groups
            )
        new = replace(scene, decals=decals, groups=groups)
    elif delta.kind == "decal_removed":
        if delta.id not in {d.id for d in scene.decals}:
            raise DeltaError(f"decal '{delta.id}' does not exist")
        decals = tuple(d for d in scene.decals if d.id != delta.id)
        groups = tuple(
            replace(g, members=tuple(m for m in g.members if m != delta.id))
            for g in scene.groups
        )
        reference = scene.reference
        if reference is not None:
            reference = tuple((rid, pos) for rid, pos in reference if rid != delta.id)
        new = replace(scene, decals=decals, groups=groups, reference=reference)
    elif delta.kind == "decal_pinned":
        if delta.id not in {d.id for d in scene.decals}:
            raise DeltaError(f"decal '{delta.id}' does not exist")
        decals = tuple(
            replace(
                d,
                pinned=bool(delta.pinned),
                pos=delta.pos if delta.pos is not None else d.pos,
            )
            if d.id == delta.id
            else d
            for d in scene.decals
        )
        new = replace(scene, decals=decals)
    else:
        raise DeltaError(f"unknown delta kind '{delta.kind}'")

    violations = validate_scene(new)
    if violations:
        raise DeltaError(
            f"delta '{delta.kind}' produces an invalid scene: "
            + "; ".join(str(v) for v in violations)
        )
    return new


# --- baselines ----------------------------------------------------------------------------

class BaselineKind(str, Enum):
    WARP = "warp"
    COVER = "cover"


def baseline_cover(scene: Scene) -> np.ndarray:
    """Leave the content where it was designed: reference positions unchanged."""
    return scene.reference_positions()


def baseline_warp(scene: Scene) -> np.ndarray:
    """Affinely map the reference bounding box onto the display's bounding box.

    Holes are ignored, which is exactly the weakness this baseline exists to
    exhibit. A degenerate reference axis (zero extent) maps to the target
    axis midpoint.
    """
    ref = scene.reference_positions()
    xmin, ymin, xmax, ymax = scene.gamut.bounding_box
    out = np.empty_like(ref)
    for axis, (lo, hi) in enumerate(((xmin, xmax), (ymin, ymax))):
        src_lo = ref[:, axis].min()
        src_hi = ref[:, axis].max()
        span = src_hi - src_lo
        if span == 0.0:
            out[:, axis] = (lo + hi) / 2.0
        else:
            out[:, axis] = lo + (ref[:, axis] - src_lo) * (hi - lo) / span
    return out


def baseline_positions(scene: Scene, kind: BaselineKind) -> np.ndarray:
    if kind == BaselineKind.WARP:
        return baseline_warp(scene)
    return baseline_cover(scene)


# --- metrics -------------------------------------------------------------------------------

@dataclass(frozen=True)
class LayoutMetrics:
    visibility: float
    alignment_error: float
    grouping_violation: float
    displacement: float

    def as_dict(self) -> dict[str, float]:
        return {
            "visibility": self.visibility,
            "alignment_error": self.alignment_error,
            "grouping_violation": self.grouping_violation,
            "displacement": self.displacement,
        }


_STRATA = 16  # fixed stratified sample lattice per decal box: deterministic, no RNG


def compute_metrics(scene: Scene, positions: np.ndarray | None = None) -> LayoutMetrics:
    """Score a layout: visibility, alignment RMS, grouping violations, displacement."""
    pos = scene.positions() if positions is None else np.asarray(positions, dtype=np.float64)
    pos = pos.reshape(len(scene.decals), 2)
    n = len(scene.decals)
    radii = np.array([d.radius for d in scene.decals])

    if n == 0:
        return LayoutMetrics(1.0, 0.0, 0.0, 0.0)

    # visibility: fraction of each decal's box that is in gamut and not covered
    offs = (np.arange(_STRATA) + 0.5) / _STRATA * 2.0 - 1.0  # cell centres in [-1, 1]
    sx, sy = np.meshgrid(offs, offs)
    unit = np.column_stack([sx.ravel(), sy.ravel()])  # (256, 2)
    samples = pos[:, None, :] + radii[:, None, None] * unit[None, :, :]  # (n, 256, 2)
    flat = samples.reshape(-1, 2)
    in_gamut = (signed_distance_batch(scene.gamut, flat) < 0.0).reshape(n, -1)
    # covered if strictly inside any other decal's box
    dx = np.abs(flat[:, None, 0] - pos[None, :, 0])
    dy = np.abs(flat[:, None, 1] - pos[None, :, 1])
    inside = (dx < radii[None, :]) & (dy < radii[None, :])  # (n*256, n)
    owner = np.repeat(np.arange(n), unit.shape[0])
    inside[np.arange(len(flat)), owner] = False
    covered = inside.any(axis=1).reshape(n, -1)
    visibility = float(np.mean(np.mean(in_gamut & ~covered, axis=1)))

    # alignment: RMS of member offsets from each anchor line (floating re-fitted)
    terms: list[float] = []
    index = {d.id: i for i, d in enumerate(scene.decals)}
    for g in scene.groups:
        members = np.array([index[m] for m in g.members], dtype=np.int64)
        if len(members) == 0:
            continue
        for line in g.anchors:
            axis = 0 if line.axis == "vertical" else 1
            coords = pos[members, axis]
            c = float(np.mean(coords)) if line.mode == "floating" else line.coord
            terms.extend(np.abs(coords - c).tolist())
    alignment = float(np.sqrt(np.mean(np.square(terms)))) if terms else 0.0

    # grouping: fraction of same-group pairs stretched beyond their d_max
    pair_count = 0
    violated = 0
    for g in scene.groups:
        members = [index[m] for m in g.members]
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                pair_count += 1
                d = float(np.hypot(*(pos[members[a]] - pos[members[b]])))
                if d > g.d_max:
                    violated += 1
    grouping = violated / pair_count if pair_count else 0.0

    displacement = 0.0
    if scene.reference is not None:
        ref = scene.reference_positions()
        displacement = float(np.mean(np.hypot(pos[:, 0] - ref[:, 0], pos[:, 1] - ref[:, 1])))

    return LayoutMetrics(visibility, alignment, grouping, displacement)
