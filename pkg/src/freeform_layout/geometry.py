"""Exact signed-distance geometry for display shapes with holes.

Distances are negative inside the usable display area, positive outside of it
(hole interiors count as outside). All coordinates are pixels, y grows
downward. The polygon evaluator is exact; `SdfGrid` is a sampled cache of the
same evaluator for hot solver loops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

try:  # pragma: no cover - exercised implicitly by every distance call
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):  # type: ignore[misc]
        def wrap(fn):
            return fn

        return wrap

    prange = range  # type: ignore[assignment]


class Point2(NamedTuple):
    x: float
    y: float


class SdfExtentError(ValueError):
    """Raised when a query point falls outside a grid's sampled extent."""


@dataclass(frozen=True)
class Polygon:
    """Closed polygon given by its vertex ring (implicitly closed)."""

    vertices: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        norm = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", norm)

    @cached_property
    def coords(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=np.float64).reshape(-1, 2)

    @cached_property
    def area(self) -> float:
        """Unsigned shoelace area."""
        c = self.coords
        if len(c) < 3:
            return 0.0
        x, y = c[:, 0], c[:, 1]
        return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))) / 2.0

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def validate(self) -> list[str]:
        """Return a list of problems; empty means the polygon is usable."""
        problems: list[str] = []
        if len(self.vertices) < 3:
            problems.append(f"needs at least 3 vertices, has {len(self.vertices)}")
            return problems
        if not np.all(np.isfinite(self.coords)):
            problems.append("has non-finite vertex coordinates")
            return problems
        if self.area <= 1e-12:
            problems.append("has zero area")
        if _self_intersects(self.coords):
            problems.append("edges intersect each other")
        return problems


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _segments_cross(p1, p2, q1, q2) -> bool:
    """Proper crossing test; shared endpoints do not count."""
    d1 = _orient(*q1, *q2, *p1)
    d2 = _orient(*q1, *q2, *p2)
    d3 = _orient(*p1, *p2, *q1)
    d4 = _orient(*p1, *p2, *q2)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0))


def _self_intersects(coords: np.ndarray) -> bool:
    n = len(coords)
    for i in range(n):
        a1, a2 = coords[i], coords[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue  # adjacent edges share a vertex
            if _segments_cross(a1, a2, coords[j], coords[(j + 1) % n]):
                return True
    return False


def _edges_cross_polygon(poly: np.ndarray, other: np.ndarray) -> bool:
    n, m = len(poly), len(other)
    for i in range(n):
        for j in range(m):
            if _segments_cross(poly[i], poly[(i + 1) % n], other[j], other[(j + 1) % m]):
                return True
    return False


def _point_in_ring(x: float, y: float, ring: np.ndarray) -> bool:
    inside = False
    n = len(ring)
    for i in range(n):
        ax, ay = ring[i]
        bx, by = ring[(i + 1) % n]
        if (ay > y) != (by > y):
            xint = ax + (y - ay) * (bx - ax) / (by - ay)
            if x < xint:
                inside = not inside
    return inside


@dataclass(frozen=True)
class GamutShape:
    """Usable display region: an outer outline minus zero or more holes."""

    outer: Polygon
    holes: tuple[Polygon, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "holes", tuple(self.holes))

    @cached_property
    def segments(self) -> np.ndarray:
        """(S, 4) array of [ax, ay, bx, by], outer ring first, then holes in order."""
        rows: list[np.ndarray] = []
        for poly in (self.outer, *self.holes):
            c = poly.coords
            rows.append(np.concatenate([c, np.roll(c, -1, axis=0)], axis=1))
        return np.concatenate(rows, axis=0)

    @cached_property
    def bounding_box(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) of the outer outline."""
        c = self.outer.coords
        return (
            float(c[:, 0].min()),
            float(c[:, 1].min()),
            float(c[:, 0].max()),
            float(c[:, 1].max()),
        )

    def translated(self, dx: float, dy: float) -> "GamutShape":
        return GamutShape(
            self.outer.translated(dx, dy),
            tuple(h.translated(dx, dy) for h in self.holes),
        )

    def validate(self) -> list[str]:
        problems = [f"outer polygon {p}" for p in self.outer.validate()]
        for i, hole in enumerate(self.holes):
            problems.extend(f"hole {i} {p}" for p in hole.validate())
        if problems:
            return problems
        outer = self.outer.coords
        for i, hole in enumerate(self.holes):
            ok = all(_point_in_ring(x, y, outer) for x, y in hole.coords)
            if not ok or _edges_cross_polygon(hole.coords, outer):
                problems.append(f"hole {i} is not strictly inside the outer polygon")
        for i in range(len(self.holes)):
            for j in range(i + 1, len(self.holes)):
                a, b = self.holes[i].coords, self.holes[j].coords
                touching = (
                    _edges_cross_polygon(a, b)
                    or any(_point_in_ring(x, y, b) for x, y in a)
                    or any(_point_in_ring(x, y, a) for x, y in b)
                )
                if touching:
                    problems.append(f"holes {i} and {j} are not disjoint")
        return problems


@njit(cache=True, parallel=True)
def _sdf_kernel(px: np.ndarray, py: np.ndarray, segs: np.ndarray) -> np.ndarray:
    out = np.empty(px.shape[0], dtype=np.float64)
    for i in prange(px.shape[0]):
        x = px[i]
        y = py[i]
        best = np.inf
        inside = False
        for s in range(segs.shape[0]):
            ax = segs[s, 0]
            ay = segs[s, 1]
            bx = segs[s, 2]
            by = segs[s, 3]
            ex = bx - ax
            ey = by - ay
            wx = x - ax
            wy = y - ay
            denom = ex * ex + ey * ey
            t = 0.0
            if denom > 0.0:
                t = (wx * ex + wy * ey) / denom
                if t < 0.0:
                    t = 0.0
                elif t > 1.0:
                    t = 1.0
            dx = wx - t * ex
            dy = wy - t * ey
            d2 = dx * dx + dy * dy
            if d2 < best:
                best = d2
            # even-odd ray toward +x; hole crossings flip parity back out
            if (ay > y) != (by > y):
                xint = ax + (y - ay) * ex / ey
                if x < xint:
                    inside = not inside
        d = math.sqrt(best)
        out[i] = -d if inside else d
    return out


def _sdf_kernel_numpy(px: np.ndarray, py: np.ndarray, segs: np.ndarray) -> np.ndarray:
    best = np.full(px.shape[0], np.inf)
    inside = np.zeros(px.shape[0], dtype=bool)
    for s in range(segs.shape[0]):
        ax, ay, bx, by = segs[s]
        ex, ey = bx - ax, by - ay
        wx, wy = px - ax, py - ay
        denom = ex * ex + ey * ey
        if denom > 0.0:
            t = np.clip((wx * ex + wy * ey) / denom, 0.0, 1.0)
        else:
            t = np.zeros_like(wx)
        dx, dy = wx - t * ex, wy - t * ey
        np.minimum(best, dx * dx + dy * dy, out=best)
        if (ay > by) or (by > ay):
            crosses = (ay > py) != (by > py)
            xint = ax + (py - ay) * ex / ey
            inside ^= crosses & (px < xint)
    d = np.sqrt(best)
    return np.where(inside, -d, d)


def signed_distance_batch(shape: GamutShape, points: np.ndarray) -> np.ndarray:
    """Exact signed distance for an (N, 2) array of query points."""
    pts = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    kernel = _sdf_kernel if _HAVE_NUMBA else _sdf_kernel_numpy
    return kernel(np.ascontiguousarray(pts[:, 0]), np.ascontiguousarray(pts[:, 1]), shape.segments)


def signed_distance(shape: GamutShape, point: Point2) -> float:
    """Exact signed distance from `point` to the gamut boundary (negative inside)."""
    return float(signed_distance_batch(shape, np.array([[point.x, point.y]]))[0])


def boundary_projection_batch(shape: GamutShape, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest boundary point and unsigned distance for each query point.

    Distance ties resolve to the earliest segment in traversal order (outer
    ring first, then holes in declaration order), which keeps the result
    deterministic for symmetric inputs.
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    px, py = pts[:, 0], pts[:, 1]
    best = np.full(len(pts), np.inf)
    proj = np.zeros_like(pts)
    for s in range(shape.segments.shape[0]):
        ax, ay, bx, by = shape.segments[s]
        ex, ey = bx - ax, by - ay
        wx, wy = px - ax, py - ay
        denom = ex * ex + ey * ey
        if denom > 0.0:
            t = np.clip((wx * ex + wy * ey) / denom, 0.0, 1.0)
        else:
            t = np.zeros_like(wx)
        cx, cy = ax + t * ex, ay + t * ey
        d2 = (px - cx) ** 2 + (py - cy) ** 2
        better = d2 < best  # strict: first segment keeps ties
        best = np.where(better, d2, best)
        proj[better, 0] = cx[better]
        proj[better, 1] = cy[better]
    return proj, np.sqrt(best)


def project_to_boundary(shape: GamutShape, point: Point2) -> Point2:
    """Closest point on the gamut boundary (ties go to the first segment)."""
    proj, _ = boundary_projection_batch(shape, np.array([[point.x, point.y]]))
    return Point2(float(proj[0, 0]), float(proj[0, 1]))


@dataclass(frozen=True)
class SdfGrid:
    """Row-major cache of signed distances on a regular node lattice."""

    origin: Point2
    cell_size: float
    values: np.ndarray = field(repr=False)

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """(xmin, ymin, xmax, ymax) covered by grid nodes."""
        return (
            self.origin.x,
            self.origin.y,
            self.origin.x + (self.nx - 1) * self.cell_size,
            self.origin.y + (self.ny - 1) * self.cell_size,
        )

    def value_at_node(self, ix: int, iy: int) -> float:
        return float(self.values[iy, ix])

    def contains(self, x: float, y: float, margin_cells: float = 0.0) -> bool:
        xmin, ymin, xmax, ymax = self.extent
        m = margin_cells * self.cell_size
        return xmin + m <= x <= xmax - m and ymin + m <= y <= ymax - m

    def sample_batch(self, points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Bilinear values plus an in-extent mask; out-of-extent rows are NaN."""
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
        xmin, ymin, xmax, ymax = self.extent
        ok = (
            (pts[:, 0] >= xmin)
            & (pts[:, 0] <= xmax)
            & (pts[:, 1] >= ymin)
            & (pts[:, 1] <= ymax)
        )
        out = np.full(len(pts), np.nan)
        if np.any(ok):
            fx = (pts[ok, 0] - self.origin.x) / self.cell_size
            fy = (pts[ok, 1] - self.origin.y) / self.cell_size
            ix = np.clip(np.floor(fx).astype(np.int64), 0, self.nx - 2)
            iy = np.clip(np.floor(fy).astype(np.int64), 0, self.ny - 2)
            tx, ty = fx - ix, fy - iy
            v00 = self.values[iy, ix]
            v01 = self.values[iy, ix + 1]
            v10 = self.values[iy + 1, ix]
            v11 = self.values[iy + 1, ix + 1]
            top = (1.0 - tx) * v00 + tx * v01
            bot = (1.0 - tx) * v10 + tx * v11
            out[ok] = (1.0 - ty) * top + ty * bot
        return out, ok


def build_sdf_grid(shape: GamutShape, cell_size: float, padding: float = 0.0) -> SdfGrid:
    """Sample the exact SDF over the outer bounding box plus `padding` + 2 cells.

    Every node stores exactly what `signed_distance` returns at the node
    position, so the cache never disagrees with the exact evaluator where both
    are defined.
    """
    if cell_size <= 0.0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    if padding < 0.0:
        raise ValueError(f"padding must be non-negative, got {padding}")
    xmin, ymin, xmax, ymax = shape.bounding_box
    pad = padding + 2.0 * cell_size
    ox, oy = xmin - pad, ymin - pad
    nx = int(math.ceil((xmax + pad - ox) / cell_size - 1e-12)) + 1
    ny = int(math.ceil((ymax + pad - oy) / cell_size - 1e-12)) + 1
    xs = ox + np.arange(nx) * cell_size
    ys = oy + np.arange(ny) * cell_size
    gx, gy = np.meshgrid(xs, ys)
    nodes = np.column_stack([gx.ravel(), gy.ravel()])
    values = signed_distance_batch(shape, nodes).reshape(ny, nx)
    return SdfGrid(Point2(ox, oy), float(cell_size), values)


def sample_sdf(grid: SdfGrid, point: Point2) -> float:
    """Bilinear SDF lookup; raises SdfExtentError outside the node lattice."""
    values, ok = grid.sample_batch(np.array([[point.x, point.y]]))
    if not ok[0]:
        raise SdfExtentError(
            f"point ({point.x}, {point.y}) is outside the grid extent {grid.extent}"
        )
    return float(values[0])


def sdf_gradient(grid: SdfGrid, point: Point2) -> Point2:
    """Central-difference gradient with step = one cell.

    The query must sit at least one cell inside the grid border so both
    neighbours of each difference are sampleable.
    """
    h = grid.cell_size
    if not grid.contains(point.x, point.y, margin_cells=1.0):
        raise SdfExtentError(
            f"gradient at ({point.x}, {point.y}) needs one cell of margin inside {grid.extent}"
        )
    pts = np.array(
        [
            [point.x + h, point.y],
            [point.x - h, point.y],
            [point.x, point.y + h],
            [point.x, point.y - h],
        ]
    )
    v, _ = grid.sample_batch(pts)
    return Point2(float((v[0] - v[1]) / (2.0 * h)), float((v[2] - v[3]) / (2.0 * h)))
