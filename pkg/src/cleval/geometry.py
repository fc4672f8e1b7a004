"""Planar geometry for word-box matching.

Pure-float polygon primitives: boundary-inclusive containment, shoelace
areas, convex clipping, and intersection/union-of-intersection areas built
from triangulated simple polygons. Coordinates are pixels; tolerances are
absolute and sized for pixel-scale inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

# Points closer than this to a boundary count as lying on it.
BOUNDARY_TOL = 1e-9
# Regions (or clipped pieces) below this area are treated as empty.
_DEGENERATE_AREA = 1e-12
_CLIP_TOL = 1e-9

_RawPoint = tuple[float, float]


class GeometryError(ValueError):
    """A region is degenerate or unusable for the requested operation."""


@dataclass(frozen=True)
class Point:
    """Planar point in pixel coordinates."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x!r}, {self.y!r})")

    def __iter__(self):
        yield self.x
        yield self.y


@dataclass(frozen=True)
class Region:
    """Simple polygonal region; ``quad`` is the 4-vertex word-box case."""

    vertices: tuple[Point, ...]
    kind: str = "quad"

    def __post_init__(self) -> None:
        object.__setattr__(self, "vertices", tuple(self.vertices))
        if self.kind not in ("quad", "polygon"):
            raise GeometryError(f"unknown region kind {self.kind!r}")
        if len(self.vertices) < 3:
            raise GeometryError("a region needs at least 3 vertices")
        if self.kind == "quad" and len(self.vertices) != 4:
            raise GeometryError("a quad region needs exactly 4 vertices")


def make_region(points: Iterable[Sequence[float] | Point], kind: str | None = None) -> Region:
    """Build a Region from (x, y) pairs; kind defaults to quad for 4 points."""
    pts = tuple(
        p if isinstance(p, Point) else Point(float(p[0]), float(p[1])) for p in points
    )
    if kind is None:
        kind = "quad" if len(pts) == 4 else "polygon"
    return Region(pts, kind)


def _raw(region: Region) -> list[_RawPoint]:
    return [(p.x, p.y) for p in region.vertices]


def _signed_area(pts: Sequence[_RawPoint]) -> float:
    total = 0.0
    n = len(pts)
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        total += x0 * y1 - x1 * y0
    return 0.5 * total


def _cross3(a: _RawPoint, b: _RawPoint, c: _RawPoint) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def area(region: Region) -> float:
    """Positive enclosed area, independent of vertex winding."""
    if len(region.vertices) < 3:
        raise GeometryError("area needs at least 3 vertices")
    value = abs(_signed_area(_raw(region)))
    if value <= _DEGENERATE_AREA:
        raise GeometryError("degenerate region: zero area")
    return value


def bounding_box(region: Region) -> tuple[float, float, float, float]:
    """Axis-aligned (min_x, min_y, max_x, max_y) of the vertices."""
    xs = [p.x for p in region.vertices]
    ys = [p.y for p in region.vertices]
    return min(xs), min(ys), max(xs), max(ys)


def _near_segment(px: float, py: float, ax: float, ay: float,
                  bx: float, by: float, tol: float) -> bool:
    dx, dy = bx - ax, by - ay
    length_sq = dx * dx + dy * dy
    if length_sq <= tol * tol:
        return (px - ax) ** 2 + (py - ay) ** 2 <= tol * tol
    t = ((px - ax) * dx + (py - ay) * dy) / length_sq
    t = 0.0 if t < 0.0 else (1.0 if t > 1.0 else t)
    qx, qy = ax + t * dx, ay + t * dy
    return (px - qx) ** 2 + (py - qy) ** 2 <= tol * tol


def contains(region: Region, point: Point, tol: float = BOUNDARY_TOL) -> bool:
    """True when the point is inside the region or on its boundary."""
    pts = _raw(region)
    if abs(_signed_area(pts)) <= _DEGENERATE_AREA:
        raise GeometryError("degenerate region: zero area")
    x, y = point.x, point.y
    n = len(pts)
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if _near_segment(x, y, ax, ay, bx, by, tol):
            return True
    inside = False
    for i in range(n):
        ax, ay = pts[i]
        bx, by = pts[(i + 1) % n]
        if (ay > y) != (by > y):
            x_hit = ax + (y - ay) * (bx - ax) / (by - ay)
            if x_hit > x:
                inside = not inside
    return inside


def _ensure_ccw(pts: list[_RawPoint]) -> list[_RawPoint]:
    return pts if _signed_area(pts) >= 0.0 else pts[::-1]


def _clean_ring(pts: list[_RawPoint]) -> list[_RawPoint]:
    """Drop repeated vertices and exactly-collinear middles from a ring."""
    out: list[_RawPoint] = []
    for p in pts:
        if out and p == out[-1]:
            continue
        out.append(p)
    if len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) > 3:
        changed = False
        n = len(out)
        for i in range(n):
            if _cross3(out[i - 1], out[i], out[(i + 1) % n]) == 0.0:
                out.pop(i)
                changed = True
                break
    return out


def _is_convex(pts: Sequence[_RawPoint]) -> bool:
    n = len(pts)
    sign = 0
    for i in range(n):
        c = _cross3(pts[i], pts[(i + 1) % n], pts[(i + 2) % n])
        if c == 0.0:
            continue
        s = 1 if c > 0.0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def _point_in_triangle(p: _RawPoint, a: _RawPoint, b: _RawPoint, c: _RawPoint) -> bool:
    # CCW triangle assumed; boundary points block an ear.
    return _cross3(a, b, p) >= 0.0 and _cross3(b, c, p) >= 0.0 and _cross3(c, a, p) >= 0.0


def _triangulate(ring: list[_RawPoint]) -> list[tuple[_RawPoint, _RawPoint, _RawPoint]]:
    n = len(ring)
    if n < 3:
        return []
    if _is_convex(ring):
        return [(ring[0], ring[i], ring[i + 1]) for i in range(1, n - 1)]
    indices = list(range(n))
    triangles: list[tuple[_RawPoint, _RawPoint, _RawPoint]] = []
    while len(indices) > 3:
        count = len(indices)
        clipped = False
        for ii in range(count):
            i0 = indices[(ii - 1) % count]
            i1 = indices[ii]
            i2 = indices[(ii + 1) % count]
            a, b, c = ring[i0], ring[i1], ring[i2]
            if _cross3(a, b, c) <= 0.0:
                continue
            if any(
                _point_in_triangle(ring[j], a, b, c)
                for j in indices
                if j not in (i0, i1, i2)
            ):
                continue
            triangles.append((a, b, c))
            indices.pop(ii)
            clipped = True
            break
        if not clipped:
            raise GeometryError("cannot triangulate region; boundary may self-intersect")
    triangles.append((ring[indices[0]], ring[indices[1]], ring[indices[2]]))
    return triangles


def _convex_parts(region: Region) -> list[list[_RawPoint]]:
    """Decompose into CCW convex pieces that tile the region."""
    ring = _ensure_ccw(_clean_ring(_raw(region)))
    if len(ring) < 3 or abs(_signed_area(ring)) <= _DEGENERATE_AREA:
        raise GeometryError("degenerate region: zero area")
    if _is_convex(ring):
        return [ring]
    return [list(t) for t in _triangulate(ring)]


def _line_hit(x1: float, y1: float, x2: float, y2: float,
              x3: float, y3: float, x4: float, y4: float) -> _RawPoint:
    denom = (x1 - x2) * (y3 - y4) - (y1 - y2) * (x3 - x4)
    if denom == 0.0:
        return (x2, y2)
    t = ((x1 - x3) * (y3 - y4) - (y1 - y3) * (x3 - x4)) / denom
    return (x1 + t * (x2 - x1), y1 + t * (y2 - y1))


def _clip_convex(subject: Sequence[_RawPoint], clip_ccw: Sequence[_RawPoint]) -> list[_RawPoint]:
    """Sutherland-Hodgman clip of a convex subject by a CCW convex window."""
    output = list(subject)
    m = len(clip_ccw)
    for i in range(m):
        if not output:
            return []
        ax, ay = clip_ccw[i]
        bx, by = clip_ccw[(i + 1) % m]
        ex, ey = bx - ax, by - ay
        current = output
        output = []
        sx, sy = current[-1]
        s_in = ex * (sy - ay) - ey * (sx - ax) >= -_CLIP_TOL
        for px, py in current:
            p_in = ex * (py - ay) - ey * (px - ax) >= -_CLIP_TOL
            if p_in:
                if not s_in:
                    output.append(_line_hit(sx, sy, px, py, ax, ay, bx, by))
                output.append((px, py))
            elif s_in:
                output.append(_line_hit(sx, sy, px, py, ax, ay, bx, by))
            sx, sy, s_in = px, py, p_in
    return output


def _pieces_area(pieces: Iterable[Sequence[_RawPoint]]) -> float:
    return sum(abs(_signed_area(p)) for p in pieces if len(p) >= 3)


def intersection_area(a: Region, b: Region) -> float:
    """Area of the geometric intersection; 0 for disjoint regions."""
    area_a = area(a)
    area_b = area(b)
    # Canonical argument order keeps the result bitwise symmetric.
    if _raw(b) < _raw(a):
        a, b = b, a
    parts_a = _convex_parts(a)
    parts_b = _convex_parts(b)
    total = 0.0
    for pa in parts_a:
        for pb in parts_b:
            piece = _clip_convex(pa, pb)
            if len(piece) >= 3:
                total += abs(_signed_area(piece))
    return max(0.0, min(total, area_a, area_b))


def union_intersection_area(d: Region, gs: Sequence[Region]) -> float:
    """Area of ``d`` covered by the union of ``gs``, without double counting.

    Inclusion-exclusion over the candidate regions; branches whose running
    intersection is empty are pruned, so the usual few-overlaps case stays
    cheap even though the worst case is exponential in ``len(gs)``.
    """
    area_d = area(d)
    if not gs:
        return 0.0
    parts_d = _convex_parts(d)
    parts_gs = [_convex_parts(g) for g in gs]
    total = 0.0

    def visit(start: int, pieces: list[list[_RawPoint]], sign: float) -> None:
        nonlocal total
        for idx in range(start, len(parts_gs)):
            inter: list[list[_RawPoint]] = []
            for pa in pieces:
                for pb in parts_gs[idx]:
                    piece = _clip_convex(pa, pb)
                    if len(piece) >= 3:
                        inter.append(piece)
            piece_area = _pieces_area(inter)
            if piece_area <= _DEGENERATE_AREA:
                continue
            total += sign * piece_area
            visit(idx + 1, inter, -sign)

    visit(0, parts_d, 1.0)
    return max(0.0, min(total, area_d))


def _convex_hull(pts: Sequence[_RawPoint]) -> list[_RawPoint]:
    unique = sorted(set(pts))
    if len(unique) <= 2:
        return unique
    lower: list[_RawPoint] = []
    for p in unique:
        while len(lower) >= 2 and _cross3(lower[-2], lower[-1], p) <= 0.0:
            lower.pop()
        lower.append(p)
    upper: list[_RawPoint] = []
    for p in reversed(unique):
        while len(upper) >= 2 and _cross3(upper[-2], upper[-1], p) <= 0.0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def min_max_side(region: Region) -> tuple[float, float]:
    """(short, long) side lengths of the minimum-area bounding rectangle."""
    area(region)  # degenerate guard
    hull = _convex_hull(_raw(region))
    if len(hull) < 3:
        raise GeometryError("degenerate region: collinear vertices")
    best: tuple[float, float, float] | None = None
    m = len(hull)
    for i in range(m):
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % m]
        norm = math.hypot(bx - ax, by - ay)
        if norm == 0.0:
            continue
        ux, uy = (bx - ax) / norm, (by - ay) / norm
        along = [px * ux + py * uy for px, py in hull]
        across = [py * ux - px * uy for px, py in hull]
        w = max(along) - min(along)
        h = max(across) - min(across)
        if best is None or w * h < best[0]:
            best = (w * h, min(w, h), max(w, h))
    if best is None or best[1] <= 0.0:
        raise GeometryError("degenerate region: zero-width bounding rectangle")
    return best[1], best[2]


def _between(a: _RawPoint, b: _RawPoint, p: _RawPoint) -> bool:
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segments_intersect(a: _RawPoint, b: _RawPoint, c: _RawPoint, d: _RawPoint) -> bool:
    o1 = _cross3(a, b, c)
    o2 = _cross3(a, b, d)
    o3 = _cross3(c, d, a)
    o4 = _cross3(c, d, b)
    if o1 * o2 < 0.0 and o3 * o4 < 0.0:
        return True
    if o1 == 0.0 and _between(a, b, c):
        return True
    if o2 == 0.0 and _between(a, b, d):
        return True
    if o3 == 0.0 and _between(c, d, a):
        return True
    if o4 == 0.0 and _between(c, d, b):
        return True
    return False


def is_simple(obj: Region | Sequence[_RawPoint]) -> bool:
    """True when the boundary neither self-intersects nor folds onto itself."""
    pts = _raw(obj) if isinstance(obj, Region) else [(float(x), float(y)) for x, y in obj]
    n = len(pts)
    if n < 3:
        return False
    for i in range(n):
        if pts[i] == pts[(i + 1) % n]:
            return False
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            c, d = pts[j], pts[(j + 1) % n]
            shares_b = (i + 1) % n == j
            shares_a = (j + 1) % n == i
            if shares_b or shares_a:
                # Consecutive edges may only touch at the shared vertex.
                if shares_b:
                    tail, shared, head = a, b, d
                else:
                    tail, shared, head = c, d, b
                folds = (_cross3(tail, shared, head) == 0.0
                         and ((tail[0] - shared[0]) * (head[0] - shared[0])
                              + (tail[1] - shared[1]) * (head[1] - shared[1])) > 0.0)
                if folds:
                    return False
                continue
            if _segments_intersect(a, b, c, d):
                return False
    return True
