"""Independent brute-force oracles used to derive expected test values.

Everything here is deliberately naive and shares no code with the library
paths it checks.
"""

from __future__ import annotations

import itertools

import numpy as np


def iou_pixel_count(a, b, grid: int) -> float:
    """IoU by rasterizing both boxes on an integer pixel grid and counting.

    Exact for integer-coordinate boxes: pixel (c, r) belongs to a box iff
    its center (c + 0.5, r + 0.5) is inside.
    """
    mask_a = _raster(a, grid)
    mask_b = _raster(b, grid)
    inter = int(np.logical_and(mask_a, mask_b).sum())
    union = int(np.logical_or(mask_a, mask_b).sum())
    return inter / union if union else 0.0


def _raster(box, grid: int) -> np.ndarray:
    x_min, y_min, x_max, y_max = box
    mask = np.zeros((grid, grid), dtype=bool)
    for r in range(grid):
        for c in range(grid):
            if x_min <= c + 0.5 < x_max and y_min <= r + 0.5 < y_max:
                mask[r, c] = True
    return mask


def _raster_fast(boxes: np.ndarray, grid: int) -> np.ndarray:
    """(N, grid, grid) rasterization of integer boxes, vectorized over pixels."""
    centers = np.arange(grid) + 0.5
    in_x = (boxes[:, 0:1] <= centers) & (centers < boxes[:, 2:3])  # (N, grid)
    in_y = (boxes[:, 1:2] <= centers) & (centers < boxes[:, 3:4])
    return in_y[:, :, None] & in_x[:, None, :]


def iou_pixel_count_batch(boxes_a: np.ndarray, boxes_b: np.ndarray, grid: int) -> np.ndarray:
    """Vectorized pixel-count IoU for many integer box pairs at once."""
    mask_a = _raster_fast(boxes_a, grid)
    mask_b = _raster_fast(boxes_b, grid)
    inter = np.logical_and(mask_a, mask_b).sum(axis=(1, 2))
    union = np.logical_or(mask_a, mask_b).sum(axis=(1, 2))
    out = np.zeros(len(boxes_a), dtype=float)
    nz = union > 0
    out[nz] = inter[nz] / union[nz]
    return out


def rasterized_area(box, width: int, height: int) -> int:
    """Count of pixels whose centers fall inside the box (double loop)."""
    x_min, y_min, x_max, y_max = box
    count = 0
    for r in range(height):
        for c in range(width):
            if x_min <= c + 0.5 < x_max and y_min <= r + 0.5 < y_max:
                count += 1
    return count


def best_assignment(cost: list[list[float]]) -> tuple[float, list[tuple[int, int]]]:
    """Minimum-total-cost one-to-one assignment by exhaustive enumeration."""
    n_rows, n_cols = len(cost), len(cost[0])
    k = min(n_rows, n_cols)
    best_total, best_pairs = float("inf"), []
    for rows in itertools.permutations(range(n_rows), k):
        for cols in itertools.permutations(range(n_cols), k):
            total = sum(cost[r][c] for r, c in zip(rows, cols))
            if total < best_total:
                best_total = total
                best_pairs = sorted(zip(rows, cols))
    return best_total, best_pairs


def overlapping_pairs_bruteforce(scene) -> set[tuple[str, str]]:
    """All unordered id pairs whose boxes overlap with positive area."""
    out = set()
    dets = scene.detections
    for a in dets:
        for b in dets:
            if a.id >= b.id:
                continue
            w = min(a.bbox.x_max, b.bbox.x_max) - max(a.bbox.x_min, b.bbox.x_min)
            h = min(a.bbox.y_max, b.bbox.y_max) - max(a.bbox.y_min, b.bbox.y_min)
            if w > 0 and h > 0:
                out.add((a.id, b.id))
    return out
