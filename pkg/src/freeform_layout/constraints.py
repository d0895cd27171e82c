"""Residual terms that score a decal layout against its display shape.

Four soft-constraint kinds make up the objective, each contributing weighted
entries to one stacked residual vector (cost = sum of squared entries):

- ``gamut``: a decal must sit at least its radius inside the display area;
  out-of-gamut centres additionally pay a constant ``e_step``.
- ``min_distance``: every decal pair keeps an L1 separation of the summed
  radii (a cheap box approximation of circle overlap).
- ``max_distance``: members of a group stay within the group's euclidean
  diameter ``d_max``.
- ``anchor``: group members line up on shared vertical/horizontal lines;
  floating lines are re-fitted to the least-squares optimum (the member mean)
  at every evaluation, fixed lines never move.

All residuals are piecewise smooth. The analytic jacobian uses the
subgradient 0 exactly at kinks (clamp boundaries, coincident points, centres
on the boundary).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Literal, Sequence

import numpy as np

from .geometry import (
    GamutShape,
    Point2,
    SdfGrid,
    boundary_projection_batch,
    signed_distance_batch,
)

KINDS = ("gamut", "min_distance", "max_distance", "anchor")


@dataclass(frozen=True)
class Decal:
    """A circular content element; `pinned` excludes it from the solve vector."""

    id: str
    pos: Point2
    radius: float
    group: str | None = None
    pinned: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", Point2(float(self.pos[0]), float(self.pos[1])))
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class AnchorLine:
    """Axis-aligned alignment line; vertical lines pin x, horizontal pin y."""

    axis: Literal["vertical", "horizontal"]
    coord: float
    mode: Literal["fixed", "floating"] = "fixed"


@dataclass(frozen=True)
class DecalGroup:
    id: str
    members: tuple[str, ...]
    d_max: float
    anchors: tuple[AnchorLine, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "members", tuple(self.members))
        object.__setattr__(self, "anchors", tuple(self.anchors))


@dataclass(frozen=True)
class ConstraintWeights:
    gamut: float = 10.0
    min_distance: float = 5.0
    max_distance: float = 1.0
    anchor: float = 2.0

    def of(self, kind: str) -> float:
        return float(getattr(self, kind))


@dataclass(frozen=True)
class ResidualEntry:
    kind: str
    decal_ids: tuple[str, ...]
    value: float


@dataclass(frozen=True)
class ResidualVector:
    """Ordered stack of weighted residual entries."""

    entries: tuple[ResidualEntry, ...]

    @cached_property
    def values(self) -> np.ndarray:
        return np.array([e.value for e in self.entries], dtype=np.float64)

    @cached_property
    def total_cost(self) -> float:
        return float(self.values @ self.values)

    @cached_property
    def per_kind_cost(self) -> dict[str, float]:
        cost = {kind: 0.0 for kind in KINDS}
        for e in self.entries:
            cost[e.kind] += e.value * e.value
        return cost


def eval_gamut(signed_dist: float, radius: float, e_step: float) -> float:
    """Margin violation of one decal against the display boundary.

    Zero while the centre stays at least `radius` inside; grows linearly as it
    approaches the boundary; jumps by `e_step` once the centre leaves the
    display area so that any in-gamut position beats any out-of-gamut one.
    """
    if radius <= 0.0:
        raise ValueError(f"decal radius must be positive, got {radius}")
    if e_step < 0.0:
        raise ValueError(f"e_step must be non-negative, got {e_step}")
    margin = signed_dist + radius
    if margin <= 0.0:
        return 0.0
    if signed_dist <= 0.0:
        return margin
    return e_step + margin


def eval_min_distance(a: Decal, b: Decal) -> float:
    """Overlap depth (non-positive) of two decals under the L1 box metric."""
    l1 = abs(a.pos.x - b.pos.x) + abs(a.pos.y - b.pos.y)
    return min(0.0, l1 - (a.radius + b.radius))


def eval_max_distance(a: Decal, b: Decal, d_max: float) -> float:
    """Excess euclidean separation (non-negative) beyond the group diameter."""
    if d_max <= 0.0:
        raise ValueError(f"d_max must be positive, got {d_max}")
    return max(0.0, math.hypot(a.pos.x - b.pos.x, a.pos.y - b.pos.y) - d_max)


def eval_anchor(members: Iterable[Point2], line: AnchorLine) -> float:
    """Summed axis offsets of member centres from the line."""
    axis = 0 if line.axis == "vertical" else 1
    return float(sum(abs(p[axis] - line.coord) for p in members))


@dataclass(frozen=True)
class _AnchorTerm:
    axis: int
    coord: float
    floating: bool
    member_idx: np.ndarray = field(repr=False)
    member_ids: tuple[str, ...]


class ResidualSystem:
    """Vectorised residual/jacobian evaluation for one layout problem.

    Decals, groups and weights are fixed at construction; positions vary per
    call. Group members must reference existing decal ids (the scene layer
    validates this). When `grid` is given, gamut terms sample the cached SDF
    and fall back to the exact evaluator outside the grid's extent.
    """

    def __init__(
        self,
        gamut: GamutShape,
        decals: Sequence[Decal],
        groups: Sequence[DecalGroup] = (),
        weights: ConstraintWeights = ConstraintWeights(),
        e_step: float = 10.0,
        grid: SdfGrid | None = None,
    ) -> None:
        if e_step < 0.0:
            raise ValueError(f"e_step must be non-negative, got {e_step}")
        self.gamut = gamut
        self.decals = tuple(decals)
        self.groups = tuple(groups)
        self.weights = weights
        self.e_step = float(e_step)
        self.grid = grid

        self.ids = tuple(d.id for d in self.decals)
        self._index = {d.id: i for i, d in enumerate(self.decals)}
        n = len(self.decals)
        self.radii = np.array([d.radius for d in self.decals], dtype=np.float64)
        self.base_positions = np.array(
            [[d.pos.x, d.pos.y] for d in self.decals], dtype=np.float64
        ).reshape(n, 2)
        self.free_idx = np.array(
            [i for i, d in enumerate(self.decals) if not d.pinned], dtype=np.int64
        )
        self.n_free = len(self.free_idx)

        self.pair_i, self.pair_j = np.triu_indices(n, k=1)
        self.pair_rsum = self.radii[self.pair_i] + self.radii[self.pair_j]

        gi: list[int] = []
        gj: list[int] = []
        gd: list[float] = []
        for g in self.groups:
            idx = [self._index[m] for m in g.members]
            for a in range(len(idx)):
                for b in range(a + 1, len(idx)):
                    gi.append(idx[a])
                    gj.append(idx[b])
                    gd.append(g.d_max)
        self.group_i = np.array(gi, dtype=np.int64)
        self.group_j = np.array(gj, dtype=np.int64)
        self.group_dmax = np.array(gd, dtype=np.float64)

        self.anchor_terms: list[_AnchorTerm] = []
        for g in self.groups:
            idx = np.array([self._index[m] for m in g.members], dtype=np.int64)
            for line in g.anchors:
                self.anchor_terms.append(
                    _AnchorTerm(
                        axis=0 if line.axis == "vertical" else 1,
                        coord=float(line.coord),
                        floating=line.mode == "floating",
                        member_idx=idx,
                        member_ids=g.members,
                    )
                )

        self.n_rows = (
            n
            + len(self.pair_i)
            + len(self.group_i)
            + sum(len(t.member_idx) for t in self.anchor_terms)
        )
        # column index of each free coordinate in the jacobian
        self._col_of = np.full(n, -1, dtype=np.int64)
        self._col_of[self.free_idx] = np.arange(self.n_free)

    # -- evaluation ------------------------------------------------------------------

    def _positions(self, positions: np.ndarray | None) -> np.ndarray:
        if positions is None:
            return self.base_positions.copy()
        return np.asarray(positions, dtype=np.float64).reshape(len(self.decals), 2)

    def sdf_values(self, positions: np.ndarray | None = None) -> np.ndarray:
        """Signed distance per decal centre, via the grid cache when possible."""
        pos = self._positions(positions)
        if self.grid is None:
            return signed_distance_batch(self.gamut, pos)
        values, ok = self.grid.sample_batch(pos)
        if not np.all(ok):
            values[~ok] = signed_distance_batch(self.gamut, pos[~ok])
        return values

    def line_coord(self, term: _AnchorTerm, pos: np.ndarray) -> float:
        if term.floating:
            return float(np.mean(pos[term.member_idx, term.axis]))
        return term.coord

    def residual_values(self, positions: np.ndarray | None = None) -> np.ndarray:
        """Weighted residual stack: gamut rows, pair rows, group rows, anchor rows."""
        pos = self._positions(positions)
        out = np.empty(self.n_rows, dtype=np.float64)
        n = len(self.decals)

        margin = self.sdf_values(pos) + self.radii
        d = margin - self.radii
        raw = np.where(margin <= 0.0, 0.0, np.where(d <= 0.0, margin, self.e_step + margin))
        out[:n] = self.weights.gamut * raw

        delta = pos[self.pair_i] - pos[self.pair_j]
        l1 = np.abs(delta[:, 0]) + np.abs(delta[:, 1])
        out[n : n + len(self.pair_i)] = self.weights.min_distance * np.minimum(
            0.0, l1 - self.pair_rsum
        )

        at = n + len(self.pair_i)
        gdelta = pos[self.group_i] - pos[self.group_j]
        l2 = np.hypot(gdelta[:, 0], gdelta[:, 1])
        out[at : at + len(self.group_i)] = self.weights.max_distance * np.maximum(
            0.0, l2 - self.group_dmax
        )

        at += len(self.group_i)
        for term in self.anchor_terms:
            c = self.line_coord(term, pos)
            k = len(term.member_idx)
            out[at : at + k] = self.weights.anchor * np.abs(
                pos[term.member_idx, term.axis] - c
            )
            at += k
        return out

    def assemble(self, positions: np.ndarray | None = None) -> ResidualVector:
        """Residuals with their kind and participant tags, for reporting."""
        values = self.residual_values(positions)
        entries: list[ResidualEntry] = []
        n = len(self.decals)
        for i in range(n):
            entries.append(ResidualEntry("gamut", (self.ids[i],), float(values[i])))
        at = n
        for i, j in zip(self.pair_i, self.pair_j):
            entries.append(
                ResidualEntry("min_distance", (self.ids[i], self.ids[j]), float(values[at]))
            )
            at += 1
        for i, j in zip(self.group_i, self.group_j):
            entries.append(
                ResidualEntry("max_distance", (self.ids[i], self.ids[j]), float(values[at]))
            )
            at += 1
        for term in self.anchor_terms:
            for i in term.member_idx:
                entries.append(ResidualEntry("anchor", (self.ids[i],), float(values[at])))
                at += 1
        return ResidualVector(tuple(entries))

    # -- derivatives -----------------------------------------------------------------

    def _gamut_gradients(self, pos: np.ndarray, active: np.ndarray) -> np.ndarray:
        """d(signed distance)/d(position) rows for the active decals."""
        grads = np.zeros((len(pos), 2), dtype=np.float64)
        if not np.any(active):
            return grads
        idx = np.flatnonzero(active)
        if self.grid is not None:
            h = self.grid.cell_size
            inner = np.array(
                [self.grid.contains(pos[i, 0], pos[i, 1], margin_cells=1.0) for i in idx]
            )
            gidx = idx[inner]
            if len(gidx):
                probes = np.repeat(pos[gidx], 4, axis=0)
                probes[0::4, 0] += h
                probes[1::4, 0] -= h
                probes[2::4, 1] += h
                probes[3::4, 1] -= h
                v, _ = self.grid.sample_batch(probes)
                grads[gidx, 0] = (v[0::4] - v[1::4]) / (2.0 * h)
                grads[gidx, 1] = (v[2::4] - v[3::4]) / (2.0 * h)
                # centred differences cancel exactly at symmetric ridges (e.g.
                # the middle of a hole); use the exact tie-broken direction
                # there so an active decal is never left without a descent row
                degenerate = gidx[np.hypot(grads[gidx, 0], grads[gidx, 1]) < 1e-9]
                idx = np.concatenate([idx[~inner], degenerate])
            else:
                idx = idx[~inner]  # too close to the grid border: exact fallback
        if len(idx):
            proj, _ = boundary_projection_batch(self.gamut, pos[idx])
            d = signed_distance_batch(self.gamut, pos[idx])
            safe = d != 0.0
            grads[idx[safe]] = (pos[idx[safe]] - proj[safe]) / d[safe, None]
        return grads

    def jacobian(self, positions: np.ndarray | None = None) -> np.ndarray:
        """Analytic d(residual)/d(free coordinates), shape (rows, 2 * n_free)."""
        pos = self._positions(positions)
        n = len(self.decals)
        jac = np.zeros((self.n_rows, 2 * self.n_free), dtype=np.float64)

        def put(row: int, decal: int, gx: float, gy: float) -> None:
            col = self._col_of[decal]
            if col >= 0:
                jac[row, 2 * col] = gx
                jac[row, 2 * col + 1] = gy

        margin = self.sdf_values(pos) + self.radii
        active = margin > 0.0
        grads = self._gamut_gradients(pos, active)
        for i in np.flatnonzero(active):
            put(i, i, self.weights.gamut * grads[i, 0], self.weights.gamut * grads[i, 1])

        at = n
        delta = pos[self.pair_i] - pos[self.pair_j]
        l1 = np.abs(delta[:, 0]) + np.abs(delta[:, 1])
        for k in np.flatnonzero(l1 < self.pair_rsum):
            sx = self.weights.min_distance * np.sign(delta[k, 0])
            sy = self.weights.min_distance * np.sign(delta[k, 1])
            put(at + k, self.pair_i[k], sx, sy)
            put(at + k, self.pair_j[k], -sx, -sy)

        at += len(self.pair_i)
        gdelta = pos[self.group_i] - pos[self.group_j]
        l2 = np.hypot(gdelta[:, 0], gdelta[:, 1])
        for k in np.flatnonzero(l2 > self.group_dmax):
            ux = self.weights.max_distance * gdelta[k, 0] / l2[k]
            uy = self.weights.max_distance * gdelta[k, 1] / l2[k]
            put(at + k, self.group_i[k], ux, uy)
            put(at + k, self.group_j[k], -ux, -uy)

        at += len(self.group_i)
        for term in self.anchor_terms:
            c = self.line_coord(term, pos)
            members = term.member_idx
            m = len(members)
            signs = np.sign(pos[members, term.axis] - c)
            for row_k, i in enumerate(members):
                s = signs[row_k]
                if s != 0.0:
                    if term.floating:
                        # the fitted coordinate is the member mean, so every
                        # member's motion drags the line along by 1/m
                        for col_k, j in enumerate(members):
                            coef = self.weights.anchor * s * ((i == j) - 1.0 / m)
                            if coef != 0.0:
                                g = (coef, 0.0) if term.axis == 0 else (0.0, coef)
                                put(at + row_k, j, *g)
                    else:
                        coef = self.weights.anchor * s
                        g = (coef, 0.0) if term.axis == 0 else (0.0, coef)
                        put(at + row_k, i, *g)
            at += m
        return jac

    def numeric_jacobian(
        self, positions: np.ndarray | None = None, step: float = 1e-6
    ) -> np.ndarray:
        """Central differences of the residual stack, the analytic oracle."""
        pos = self._positions(positions)
        jac = np.zeros((self.n_rows, 2 * self.n_free), dtype=np.float64)
        for col in range(2 * self.n_free):
            decal = self.free_idx[col // 2]
            axis = col % 2
            forward = pos.copy()
            forward[decal, axis] += step
            backward = pos.copy()
            backward[decal, axis] -= step
            jac[:, col] = (
                self.residual_values(forward) - self.residual_values(backward)
            ) / (2.0 * step)
        return jac

    # -- cost reporting ----------------------------------------------------------------

    def per_kind_cost(self, values: np.ndarray) -> dict[str, float]:
        n = len(self.decals)
        b1 = n + len(self.pair_i)
        b2 = b1 + len(self.group_i)
        sq = values * values
        return {
            "gamut": float(sq[:n].sum()),
            "min_distance": float(sq[n:b1].sum()),
            "max_distance": float(sq[b1:b2].sum()),
            "anchor": float(sq[b2:].sum()),
        }

    @classmethod
    def from_scene(cls, scene, grid: SdfGrid | None = None) -> "ResidualSystem":
        """Build from any object exposing gamut/decals/groups/weights/solver."""
        return cls(
            scene.gamut,
            scene.decals,
            scene.groups,
            scene.weights,
            e_step=scene.solver.e_step,
            grid=grid,
        )


def assemble_residuals(scene, positions: np.ndarray | None = None, grid: SdfGrid | None = None) -> ResidualVector:
    """Weighted residual stack for a scene at the given (or stored) positions."""
    return ResidualSystem.from_scene(scene, grid=grid).assemble(positions)


def jacobian(scene, positions: np.ndarray | None = None, grid: SdfGrid | None = None) -> np.ndarray:
    """Analytic jacobian of the scene's residual stack."""
    return ResidualSystem.from_scene(scene, grid=grid).jacobian(positions)


def numeric_jacobian(
    scene, positions: np.ndarray | None = None, step: float = 1e-6, grid: SdfGrid | None = None
) -> np.ndarray:
    """Finite-difference jacobian; slow, for verification only."""
    return ResidualSystem.from_scene(scene, grid=grid).numeric_jacobian(positions, step=step)
