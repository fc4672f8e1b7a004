"""Pseudo-character centers: estimated per-character points for a word box.

Characters are assumed evenly spaced along the reading direction, so a box
plus a transcription length is enough to place one center per character.
Quads use the midpoints of their left and right edges; polygon annotations
(equal-length top and bottom chains, vertices listed clockwise from the top
left) are subdivided into per-character quads first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .geometry import Point, Region


@dataclass(frozen=True)
class PccSet:
    """Character-center points for one ground-truth word, in reading order."""

    centers: tuple[Point, ...]
    source: object | None = None

    def __len__(self) -> int:
        return len(self.centers)

    def __iter__(self):
        return iter(self.centers)

    def __getitem__(self, index: int) -> Point:
        return self.centers[index]


def _lerp(a: Point, b: Point, t: float) -> Point:
    return Point((1.0 - t) * a.x + t * b.x, (1.0 - t) * a.y + t * b.y)


def _midpoint(a: Point, b: Point) -> Point:
    return Point((a.x + b.x) / 2.0, (a.y + b.y) / 2.0)


def pcc_quad(quad: Region, length: int, source: object | None = None) -> PccSet:
    """Centers for a 4-vertex box, evenly spaced from left edge to right edge.

    The k-th of ``length`` centers sits at fraction (2k - 1) / (2 * length)
    of the way from the left-edge midpoint to the right-edge midpoint, so
    center order follows reading order.
    """
    if len(quad.vertices) != 4:
        raise ValueError("pcc_quad needs a 4-vertex region")
    if length < 1:
        raise ValueError("transcription length must be at least 1")
    v1, v2, v3, v4 = quad.vertices
    left = _midpoint(v1, v4)
    right = _midpoint(v2, v3)
    centers = tuple(
        _lerp(left, right, (2 * k - 1) / (2 * length)) for k in range(1, length + 1)
    )
    return PccSet(centers, source)


def interpolate_polyline(top: Sequence[Point], bottom: Sequence[Point],
                         length: int) -> tuple[list[Point], list[Point]]:
    """Subdivide every top/bottom segment into ``length`` equal parts.

    Both chains must already run left to right and have the same point
    count n >= 2; each output chain has (n - 1) * length + 1 points and
    keeps the original endpoints.
    """
    if len(top) != len(bottom):
        raise ValueError("top and bottom chains must have the same length")
    if len(top) < 2:
        raise ValueError("chains need at least 2 points")
    if length < 1:
        raise ValueError("length must be at least 1")
    new_top: list[Point] = []
    new_bottom: list[Point] = []
    for i in range(len(top) - 1):
        new_top.append(top[i])
        new_bottom.append(bottom[i])
        for k in range(1, length):
            t = k / length
            new_top.append(_lerp(top[i], top[i + 1], t))
            new_bottom.append(_lerp(bottom[i], bottom[i + 1], t))
    new_top.append(top[-1])
    new_bottom.append(bottom[-1])
    return new_top, new_bottom


def pcc_polygon(poly: Region, length: int, source: object | None = None) -> PccSet:
    """Centers for a polygon annotation with 2n vertices.

    The first n vertices form the top chain (left to right), the last n the
    bottom chain (right to left). Both chains are interpolated, consecutive
    interpolated points with stride n - 1 bound one character quad, and each
    center is the mean of that quad's four corners.
    """
    pts = poly.vertices
    if len(pts) % 2 != 0:
        raise ValueError("polygon annotation needs an even vertex count")
    if len(pts) < 4:
        raise ValueError("polygon annotation needs at least 4 vertices")
    if length < 1:
        raise ValueError("transcription length must be at least 1")
    n = len(pts) // 2
    top = list(pts[:n])
    bottom = list(reversed(pts[n:]))
    char_size = n - 1
    new_top, new_bottom = interpolate_polyline(top, bottom, length)
    centers = []
    for k in range(1, length + 1):
        i0 = char_size * (k - 1)
        i1 = char_size * k
        corners = (new_top[i0], new_top[i1], new_bottom[i0], new_bottom[i1])
        centers.append(Point(
            sum(p.x for p in corners) / 4.0,
            sum(p.y for p in corners) / 4.0,
        ))
    return PccSet(tuple(centers), source)


def pcc_for_region(region: Region, length: int, source: object | None = None) -> PccSet:
    """Dispatch on region kind: quads and polygons use their own scheme."""
    if region.kind == "quad":
        return pcc_quad(region, length, source)
    return pcc_polygon(region, length, source)
