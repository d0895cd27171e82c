"""Command-line entry point: solve scenes, replay edit scripts, compare baselines.

Exit codes are stable: 0 for success (solver converged), 1 for any input
problem (unreadable file, schema or validation error, bad script step,
unknown baseline), 2 when the solver ran out of iterations.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Sequence

from .scene import (
    BaselineKind,
    Scene,
    SceneError,
    baseline_positions,
    compute_metrics,
    delta_from_dict,
    load_scene,
)
from .solver import SolveResult, WarmStartState, resolve_incremental, solve
from .svg import write_scene_svg

_CSV_COLUMNS = (
    "step",
    "total_cost",
    "cost_gamut",
    "cost_min_distance",
    "cost_max_distance",
    "cost_anchor",
    "iterations",
    "converged",
    "elapsed_ms",
    "visibility",
    "alignment_error",
    "grouping_violation",
    "displacement",
)

_COMPARE_COLUMNS = ("layout", "visibility", "alignment_error", "grouping_violation", "displacement")


class _InputError(Exception):
    """Anything that should terminate with exit code 1 and a message."""


def _load_scene_file(path: str) -> Scene:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise _InputError(f"cannot read scene file: {exc}") from exc
    try:
        return load_scene(data)
    except SceneError as exc:
        raise _InputError(f"{path}: {exc}") from exc


def _result_document(result: SolveResult) -> dict[str, Any]:
    return {
        "decals": [
            {"id": decal_id, "pos": [float(x), float(y)]}
            for decal_id, (x, y) in zip(result.ids, result.positions)
        ],
        "total_cost": result.total_cost,
        "per_kind_cost": result.per_kind_cost,
        "iterations": result.iterations,
        "converged": result.converged,
        "elapsed_ms": result.elapsed_ms,
        "cost_history": list(result.cost_history),
    }


def _write_json(path: str, document: dict[str, Any]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(document, fh, indent=2)
        fh.write("\n")


def _apply_overrides(scene: Scene, args: argparse.Namespace) -> Scene:
    weights = scene.weights
    for kind in ("gamut", "min_distance", "max_distance", "anchor"):
        value = getattr(args, f"weight_{kind}")
        if value is not None:
            weights = replace(weights, **{kind: value})
    config = scene.solver
    if args.max_iter is not None:
        config = replace(config, max_iterations=args.max_iter)
    if args.no_sdf_cache:
        config = replace(config, use_sdf_cache=False)
    return replace(scene, weights=weights, solver=config)


def _cmd_solve(args: argparse.Namespace) -> int:
    scene = _apply_overrides(_load_scene_file(args.scene), args)
    result = solve(scene)
    _write_json(args.out, _result_document(result))
    if args.svg:
        write_scene_svg(args.svg, scene, result.positions)
    return 0 if result.converged else 2


def _load_script(path: str) -> list[tuple[int, Any]]:
    """Script file → [(at, delta), …] with strictly increasing step indices."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _InputError(f"cannot read script file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, list):
        raise _InputError(f"{path}: script must be a JSON array of steps")
    steps = []
    previous = None
    for i, entry in enumerate(raw):
        label = f"script step {i}"
        if not isinstance(entry, dict) or set(entry) != {"at", "delta"}:
            raise _InputError(f'{label}: expected exactly the keys "at" and "delta"')
        at = entry["at"]
        if isinstance(at, bool) or not isinstance(at, int):
            raise _InputError(f"{label}: 'at' must be an integer")
        if previous is not None and at <= previous:
            raise _InputError(f"{label}: step indices must be strictly increasing ({at} after {previous})")
        previous = at
        try:
            steps.append((at, delta_from_dict(entry["delta"], path=f"{label}.delta")))
        except SceneError as exc:
            raise _InputError(f"{label}: {exc}") from exc
    return steps


def _metrics_row(step: int, scene: Scene, result: SolveResult) -> dict[str, Any]:
    metrics = compute_metrics(scene, result.positions)
    return {
        "step": step,
        "total_cost": result.total_cost,
        "cost_gamut": result.per_kind_cost["gamut"],
        "cost_min_distance": result.per_kind_cost["min_distance"],
        "cost_max_distance": result.per_kind_cost["max_distance"],
        "cost_anchor": result.per_kind_cost["anchor"],
        "iterations": result.iterations,
        "converged": result.converged,
        "elapsed_ms": result.elapsed_ms,
        **metrics.as_dict(),
    }


def _cmd_play(args: argparse.Namespace) -> int:
    scene = _load_scene_file(args.scene)
    steps = _load_script(args.script)
    frames_dir = Path(args.frames)
    frames_dir.mkdir(parents=True, exist_ok=True)

    state = WarmStartState()
    rows: list[dict[str, Any]] = []

    def emit(frame: int, step: int, current: Scene, result: SolveResult) -> None:
        write_scene_svg(frames_dir / f"frame_{frame:04d}.svg", current, result.positions)
        _write_json(frames_dir / f"frame_{frame:04d}.json", _result_document(result))
        rows.append(_metrics_row(step, current, result))

    scene, result = resolve_incremental(scene, None, state=state)
    emit(0, -1, scene, result)
    all_converged = result.converged
    for frame, (at, delta) in enumerate(steps, start=1):
        try:
            scene, result = resolve_incremental(scene, delta, state=state)
        except SceneError as exc:
            raise _InputError(f"script step {frame - 1} (at={at}): {exc}") from exc
        emit(frame, at, scene, result)
        all_converged = all_converged and result.converged

    with open(args.metrics, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    if args.plot:
        from .report import plot_play_report

        plot_play_report(rows, args.plot)
    return 0 if all_converged else 2


def _cmd_compare(args: argparse.Namespace) -> int:
    scene = _load_scene_file(args.scene)
    if scene.reference is None:
        raise _InputError(f"{args.scene}: compare needs a scene with a reference_layout")
    kinds = []
    for name in args.baselines.split(","):
        name = name.strip()
        try:
            kinds.append(BaselineKind(name))
        except ValueError:
            known = ", ".join(k.value for k in BaselineKind)
            raise _InputError(f"unknown baseline {name!r} (known: {known})") from None

    result = solve(scene)
    rows = [{"layout": "optimizer", **compute_metrics(scene, result.positions).as_dict()}]
    for kind in kinds:
        positions = baseline_positions(scene, kind)
        rows.append({"layout": kind.value, **compute_metrics(scene, positions).as_dict()})

    widths = [max(len(c), 12) for c in _COMPARE_COLUMNS]
    header = "  ".join(c.ljust(w) for c, w in zip(_COMPARE_COLUMNS, widths))
    print(header)
    print("-" * len(header))
    for row in rows:
        cells = [str(row["layout"]).ljust(widths[0])]
        cells += [f"{float(row[c]):.4f}".ljust(w) for c, w in zip(_COMPARE_COLUMNS[1:], widths[1:])]
        print("  ".join(cells))

    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=_COMPARE_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    if args.plot:
        from .report import plot_compare_report

        plot_compare_report(rows, args.plot)
    return 0 if result.converged else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freeform-layout",
        description="Constraint-based decal layout for freeform displays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one scene and write the result document")
    p_solve.add_argument("--scene", required=True, help="scene JSON file")
    p_solve.add_argument("--out", required=True, help="result JSON file to write")
    p_solve.add_argument("--svg", help="also render the solved layout to this SVG file")
    p_solve.add_argument("--no-sdf-cache", action="store_true", help="evaluate the exact SDF (no grid)")
    p_solve.add_argument("--max-iter", type=int, help="override the iteration budget")
    for kind in ("gamut", "min-distance", "max-distance", "anchor"):
        p_solve.add_argument(f"--weight-{kind}", type=float, dest=f"weight_{kind.replace('-', '_')}",
                             help=f"override the {kind.replace('-', ' ')} weight")
    p_solve.set_defaults(func=_cmd_solve)

    p_play = sub.add_parser(
        "play",
        help="replay an edit script with warm-started re-solves",
        description="Replays a JSON script of scene deltas. Writes one SVG and one result "
        "document per frame into --frames, and one CSV row per frame into --metrics "
        "(the pre-script solve is the first row, step=-1).",
    )
    p_play.add_argument("--scene", required=True)
    p_play.add_argument("--script", required=True, help='JSON array of {"at": k, "delta": {...}}')
    p_play.add_argument("--frames", required=True, help="directory for frame_NNNN.svg/.json")
    p_play.add_argument("--metrics", required=True, help="CSV file to write")
    p_play.add_argument("--plot", help="also render cost/metric curves to this PNG")
    p_play.set_defaults(func=_cmd_play)

    p_cmp = sub.add_parser("compare", help="metrics table: optimizer vs baselines")
    p_cmp.add_argument("--scene", required=True)
    p_cmp.add_argument("--baselines", default="warp,cover", help="comma-separated (warp, cover)")
    p_cmp.add_argument("--csv", help="also write the table to this CSV file")
    p_cmp.add_argument("--plot", help="also render a metrics bar chart to this PNG")
    p_cmp.set_defaults(func=_cmd_compare)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
