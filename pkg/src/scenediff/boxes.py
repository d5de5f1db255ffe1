"""Axis-aligned bounding-box geometry.

Coordinates are real-valued pixels, origin at the image's top-left corner,
x to the right and y down. A pixel at integer grid position (col c, row r)
counts as inside a box iff its center (c + 0.5, r + 0.5) lies in
[x_min, x_max) x [y_min, y_max); this is the rasterization convention used
by the mask builders and the pixel-count oracles in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundingBox:
    """Closed rectangle with strictly positive area."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        for v in (self.x_min, self.y_min, self.x_max, self.y_max):
            if not math.isfinite(v):
                raise ValueError(f"bounding box has non-finite coordinate: {self.as_tuple()}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"bounding box must have positive area: {self.as_tuple()}")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x_min, self.y_min, self.x_max, self.y_max)


def area(b: BoundingBox) -> float:
    return b.width * b.height


def intersection_area(a: BoundingBox, b: BoundingBox) -> float:
    """Overlap area; exactly 0.0 when the x or y intervals do not strictly overlap."""
    w = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    h = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if w <= 0.0 or h <= 0.0:
        return 0.0
    return w * h


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection over union, in [0, 1]."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (area(a) + area(b) - inter)


def center(b: BoundingBox) -> tuple[float, float]:
    return ((b.x_min + b.x_max) / 2.0, (b.y_min + b.y_max) / 2.0)


def displacement(a: BoundingBox, b: BoundingBox) -> float:
    """Euclidean distance between box centers."""
    (ax, ay), (bx, by) = center(a), center(b)
    return math.hypot(bx - ax, by - ay)


def union_box(a: BoundingBox, b: BoundingBox) -> BoundingBox:
    """Smallest box containing both inputs."""
    return BoundingBox(
        min(a.x_min, b.x_min),
        min(a.y_min, b.y_min),
        max(a.x_max, b.x_max),
        max(a.y_max, b.y_max),
    )


def contains(outer: BoundingBox, inner: BoundingBox) -> bool:
    """True iff inner lies strictly inside outer."""
    return (
        outer.x_min < inner.x_min
        and outer.y_min < inner.y_min
        and inner.x_max < outer.x_max
        and inner.y_max < outer.y_max
    )


def containment(a: BoundingBox, b: BoundingBox) -> float:
    """Fraction of a's area that overlaps b."""
    return intersection_area(a, b) / area(a)


def clamp_box(b: BoundingBox, width: float, height: float) -> BoundingBox:
    """Clip a box to the image rectangle [0, width] x [0, height].

    Raises ValueError when clipping would leave zero area.
    """
    x0 = min(max(b.x_min, 0.0), width)
    y0 = min(max(b.y_min, 0.0), height)
    x1 = min(max(b.x_max, 0.0), width)
    y1 = min(max(b.y_max, 0.0), height)
    if not (x0 < x1 and y0 < y1):
        raise ValueError(
            f"bounding box {b.as_tuple()} clamps to zero area within {width}x{height} image"
        )
    return BoundingBox(x0, y0, x1, y1)


def pixel_span(lo: float, hi: float, n: int) -> tuple[int, int]:
    """Integer index range [start, stop) of pixels whose centers fall in [lo, hi).

    The range is clipped to [0, n).
    """
    start = max(0, math.ceil(lo - 0.5))
    stop = min(n, math.ceil(hi - 0.5))
    return start, max(start, stop)
