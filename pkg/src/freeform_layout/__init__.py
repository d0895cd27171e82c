"""Constraint-based placement of circular decals inside arbitrary display shapes."""
from .constraints import AnchorLine, ConstraintWeights, Decal, DecalGroup
from .geometry import GamutShape, Point2, Polygon
from .scene import (
    Scene,
    SceneDelta,
    apply_delta,
    compute_metrics,
    load_scene,
    save_scene,
    validate_scene,
)
from .solver import SolverConfig, SolveResult, WarmStartState, resolve_incremental, solve

__version__ = "0.1.0"

__all__ = [
    "AnchorLine",
    "ConstraintWeights",
    "Decal",
    "DecalGroup",
    "GamutShape",
    "Point2",
    "Polygon",
    "Scene",
    "SceneDelta",
    "SolveResult",
    "SolverConfig",
    "WarmStartState",
    "apply_delta",
    "compute_metrics",
    "load_scene",
    "resolve_incremental",
    "save_scene",
    "solve",
    "validate_scene",
]
