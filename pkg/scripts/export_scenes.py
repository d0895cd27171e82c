"""Snapshot the bundled scene corpus to scenes/*.json.

Run from the repository root after editing `freeform_layout.corpus`:

    python3 scripts/export_scenes.py

The test suite checks the snapshots against the corpus, so a stale
`scenes/` directory fails CI rather than shipping quietly.
"""
from __future__ import annotations

import json
import pathlib

from freeform_layout.corpus import bundled_scenes
from freeform_layout.scene import save_scene

DEMO_DRAG = [
    {"at": 2, "delta": {"kind": "hole_moved", "hole": 0, "offset": [12.0, 0.0]}},
    {"at": 4, "delta": {"kind": "hole_moved", "hole": 0, "offset": [12.0, 0.0]}},
    {"at": 6, "delta": {"kind": "hole_moved", "hole": 0, "offset": [12.0, 8.0]}},
    {"at": 8, "delta": {"kind": "hole_moved", "hole": 0, "offset": [0.0, 12.0]}},
    {"at": 10, "delta": {"kind": "decal_pinned", "id": "r1c0", "pinned": True, "pos": [30.0, 130.0]}},
    {"at": 12, "delta": {"kind": "decal_pinned", "id": "r1c0", "pinned": False}},
]


def main() -> None:
    root = pathlib.Path(__file__).resolve().parent.parent
    out = root / "scenes"
    out.mkdir(exist_ok=True)
    for name, scene in bundled_scenes().items():
        (out / f"{name}.json").write_bytes(save_scene(scene))
    script = json.dumps(DEMO_DRAG, indent=2) + "\n"
    (out / "demo-drag.script.json").write_text(script)
    print(f"wrote {len(bundled_scenes()) + 1} files to {out}")


if __name__ == "__main__":
    main()
