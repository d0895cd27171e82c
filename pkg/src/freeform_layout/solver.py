"""Damped least-squares layout solver with warm starts.

The solver minimises the squared residual stack from `constraints` over the
free decal coordinates using Levenberg-Marquardt with additive damping:
rejected steps multiply lambda by `lm_lambda_factor`, accepted steps divide
it. Floating anchor lines are re-fitted in closed form (the member mean) at
every residual evaluation, so they never enter the solve vector.

Everything here is deterministic: no RNG, no iteration over unordered
containers, and elapsed time is recorded but never branched on.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .constraints import DecalGroup, AnchorLine, ResidualSystem
from .geometry import GamutShape, Point2, SdfGrid, build_sdf_grid, signed_distance_batch

_LAMBDA_FLOOR = 1e-12
_LAMBDA_CEIL = 1e15


@dataclass(frozen=True)
class SolverConfig:
    e_step: float = 10.0
    max_iterations: int = 200
    step_tolerance: float = 1e-3
    cost_tolerance: float = 1e-6
    lm_lambda_init: float = 1e-3
    lm_lambda_factor: float = 10.0
    sdf_cell_size: float = 1.0
    use_sdf_cache: bool = True


@dataclass(eq=False)
class SolveResult:
    """Outcome of one solve; positions are row-aligned with the scene's decals."""

    ids: tuple[str, ...]
    positions: np.ndarray
    total_cost: float
    per_kind_cost: dict[str, float]
    iterations: int
    converged: bool
    elapsed_ms: float
    cost_history: list[float] = field(default_factory=list)
    lm_lambda: float = 0.0
    sdf_grid: SdfGrid | None = None

    def position_of(self, decal_id: str) -> Point2:
        i = self.ids.index(decal_id)
        return Point2(float(self.positions[i, 0]), float(self.positions[i, 1]))

    def positions_by_id(self) -> dict[str, Point2]:
        return {d: self.position_of(d) for d in self.ids}


@dataclass
class WarmStartState:
    """Carry-over between incremental solves of an evolving scene."""

    positions: dict[str, Point2] = field(default_factory=dict)
    lm_lambda: float | None = None
    sdf_grid: SdfGrid | None = None
    grid_gamut: GamutShape | None = None

    def absorb(self, scene, result: SolveResult) -> None:
        self.positions = result.positions_by_id()
        self.lm_lambda = result.lm_lambda
        if result.sdf_grid is not None:
            self.sdf_grid = result.sdf_grid
            self.grid_gamut = scene.gamut

    def grid_for(self, gamut: GamutShape) -> SdfGrid | None:
        """The cached grid, if it was built for exactly this gamut."""
        if self.sdf_grid is not None and self.grid_gamut == gamut:
            return self.sdf_grid
        return None


def line_refit(group: DecalGroup, positions: Mapping[str, Point2]) -> tuple[AnchorLine, ...]:
    """Anchor lines with floating coords re-fitted to the member mean.

    The mean is the least-squares optimum for the summed squared offsets;
    fixed lines are returned untouched. A floating line with no members keeps
    its stored coordinate.
    """
    out = []
    for line in group.anchors:
        if line.mode == "floating" and group.members:
            axis = 0 if line.axis == "vertical" else 1
            coord = float(np.mean([positions[m][axis] for m in group.members]))
            out.append(AnchorLine(line.axis, coord, line.mode))
        else:
            out.append(line)
    return tuple(out)


def _grid_for_scene(scene, config: SolverConfig, warm: WarmStartState | None) -> SdfGrid | None:
    if not config.use_sdf_cache:
        return None
    if warm is not None:
        cached = warm.grid_for(scene.gamut)
        if cached is not None:
            return cached
    padding = max((d.radius for d in scene.decals), default=0.0)
    return build_sdf_grid(scene.gamut, config.sdf_cell_size, padding=padding)


def solve(scene, config: SolverConfig | None = None, warm: WarmStartState | None = None) -> SolveResult:
    """Optimise the scene's free decal positions until convergence.

    `converged` is False only when the iteration budget runs out while steps
    are still being accepted; stalling (no acceptable step above the step
    tolerance) counts as converged at the reached local optimum.
    """
    t0 = time.perf_counter()
    config = config or scene.solver
    grid = _grid_for_scene(scene, config, warm)
    system = ResidualSystem(
        scene.gamut, scene.decals, scene.groups, scene.weights, e_step=config.e_step, grid=grid
    )
    pos = scene.positions()
    if warm is not None:
        for i, decal_id in enumerate(system.ids):
            if decal_id in warm.positions and not scene.decals[i].pinned:
                p = warm.positions[decal_id]
                pos[i, 0] = p.x
                pos[i, 1] = p.y

    lam = float(warm.lm_lambda) if warm is not None and warm.lm_lambda else config.lm_lambda_init
    r = system.residual_values(pos)
    cost = float(r @ r)
    history = [cost]
    iterations = 0
    converged = True

    if cost > config.cost_tolerance and system.n_free > 0:
        converged = False
        free = system.free_idx
        eye = np.eye(2 * system.n_free)
        while iterations < config.max_iterations and not converged:
            jac = system.jacobian(pos)
            gradient = jac.T @ r
            normal = jac.T @ jac
            accepted = False
            while not accepted:
                try:
                    step = np.linalg.solve(normal + lam * eye, -gradient)
                except np.linalg.LinAlgError:
                    step = np.zeros(2 * system.n_free)
                small = float(np.linalg.norm(step)) < config.step_tolerance
                trial = pos.copy()
                trial[free] += step.reshape(-1, 2)
                r_trial = system.residual_values(trial)
                cost_trial = float(r_trial @ r_trial)
                if cost_trial < cost:
                    drop = cost - cost_trial
                    pos, r, cost = trial, r_trial, cost_trial
                    lam = max(lam / config.lm_lambda_factor, _LAMBDA_FLOOR)
                    history.append(cost)
                    iterations += 1
                    accepted = True
                    # a sub-tolerance accepted step is the final polish
                    if small or cost <= config.cost_tolerance or drop < config.cost_tolerance:
                        converged = True
                elif small or lam > _LAMBDA_CEIL:
                    converged = True  # even smaller steps cannot improve: stalled
                    break
                else:
                    lam *= config.lm_lambda_factor

    elapsed = (time.perf_counter() - t0) * 1000.0
    return SolveResult(
        ids=system.ids,
        positions=pos,
        total_cost=cost,
        per_kind_cost=system.per_kind_cost(r),
        iterations=iterations,
        converged=converged,
        elapsed_ms=elapsed,
        cost_history=history,
        lm_lambda=lam,
        sdf_grid=grid,
    )


def resolve_incremental(
    scene,
    delta,
    config: SolverConfig | None = None,
    state: WarmStartState | None = None,
):
    """Apply one edit and re-solve warm; returns `(new_scene, result)`.

    The SDF grid is rebuilt only when the delta touched the gamut; decal
    positions from the previous solve seed the new one (new decals start at
    their scene position). `state`, when given, is updated in place.
    """
    from .scene import apply_delta  # local import: scene builds on this module

    new_scene = apply_delta(scene, delta) if delta is not None else scene
    config = config or new_scene.solver
    result = solve(new_scene, config, warm=state)
    if state is not None:
        state.absorb(new_scene, result)
    return new_scene, result


def brute_force_oracle(scene, grid_step: float) -> tuple[np.ndarray, float]:
    """Exhaustive global minimum over a position lattice, for 1-2 decal scenes.

    Independent of the solver: evaluates the cost terms directly from their
    definitions with the exact signed distance. Candidate positions per decal
    cover the outer bounding box padded by the largest radius plus two steps.
    Ties pick the first lattice point in row-major order.
    """
    if grid_step <= 0.0:
        raise ValueError("grid_step must be positive")
    n = len(scene.decals)
    if n == 0 or n > 2:
        raise ValueError(f"oracle supports 1 or 2 decals, scene has {n}")

    xmin, ymin, xmax, ymax = scene.gamut.bounding_box
    pad = max(d.radius for d in scene.decals) + 2.0 * grid_step
    xs = np.arange(xmin - pad, xmax + pad + grid_step / 2.0, grid_step)
    ys = np.arange(ymin - pad, ymax + pad + grid_step / 2.0, grid_step)
    gx, gy = np.meshgrid(xs, ys)
    lattice = np.column_stack([gx.ravel(), gy.ravel()])  # (P, 2)
    sdf = signed_distance_batch(scene.gamut, lattice)

    w = scene.weights
    e_step = scene.solver.e_step

    def gamut_cost(radius: float) -> np.ndarray:
        margin = sdf + radius
        raw = np.where(margin <= 0.0, 0.0, np.where(sdf <= 0.0, margin, e_step + margin))
        return (w.gamut * raw) ** 2

    # per-decal fixed-line anchor terms are separable; collect per decal
    def fixed_anchor_cost(decal_idx: int) -> np.ndarray:
        total = np.zeros(len(lattice))
        d = scene.decals[decal_idx]
        for g in scene.groups:
            if d.id not in g.members:
                continue
            for line in g.anchors:
                if line.mode != "fixed":
                    continue
                axis = 0 if line.axis == "vertical" else 1
                total += (w.anchor * np.abs(lattice[:, axis] - line.coord)) ** 2
        return total

    per_decal = [gamut_cost(d.radius) + fixed_anchor_cost(i) for i, d in enumerate(scene.decals)]

    if n == 1:
        best = int(np.argmin(per_decal[0]))
        return lattice[[best]].copy(), float(per_decal[0][best])

    # pairwise structure between the two decals
    a, b = scene.decals
    rsum = a.radius + b.radius
    shared = [g for g in scene.groups if a.id in g.members and b.id in g.members]
    d_maxes = [g.d_max for g in shared]
    floating: list[int] = []
    for g in shared:
        for line in g.anchors:
            if line.mode == "floating":
                floating.append(0 if line.axis == "vertical" else 1)

    best_cost = np.inf
    best_i = best_j = 0
    block = max(1, int(2_000_000 // max(len(lattice), 1)))
    for start in range(0, len(lattice), block):
        stop = min(start + block, len(lattice))
        pa = lattice[start:stop]
        dx = pa[:, None, 0] - lattice[None, :, 0]
        dy = pa[:, None, 1] - lattice[None, :, 1]
        l1 = np.abs(dx) + np.abs(dy)
        pair = (w.min_distance * np.minimum(0.0, l1 - rsum)) ** 2
        if d_maxes or floating:
            l2 = np.hypot(dx, dy)
            for d_max in d_maxes:
                pair += (w.max_distance * np.maximum(0.0, l2 - d_max)) ** 2
            for axis in floating:
                gap = np.abs(dx) if axis == 0 else np.abs(dy)
                # two members, fitted line at the midpoint: each sits gap/2 away
                pair += 2.0 * (w.anchor * gap / 2.0) ** 2
        total = pair + per_decal[0][start:stop, None] + per_decal[1][None, :]
        flat = int(np.argmin(total))
        i, j = divmod(flat, total.shape[1])
        if total[i, j] < best_cost:
            best_cost = float(total[i, j])
            best_i, best_j = start + i, j
    return np.array([lattice[best_i], lattice[best_j]]), best_cost
