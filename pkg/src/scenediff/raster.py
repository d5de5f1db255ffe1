"""Shape rasterization kernels and scene rendering.

Rendering is the hot path of bulk dataset generation, so the three fill
kernels (rectangle, ellipse, capsule) exist twice: a numba @njit version and
a pure-numpy version computing the exact same pixel predicate. The backend
is chosen once at import:

* ``SCENEDIFF_BACKEND=numpy`` forces the numpy path,
* ``SCENEDIFF_BACKEND=numba`` requires numba (ImportError otherwise),
* unset: numba when importable, numpy fallback otherwise.

Both backends produce bit-identical images; ``benchmarks/bench_render.py``
compares their throughput.

A pixel (col c, row r) is colored when its center (c + 0.5, r + 0.5) lies
inside the shape inscribed in the detection's bounding box.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .boxes import pixel_span
from .scene import Scene
from .styles import BACKGROUND, CAPSULE, ELLIPSE, style_for

_ENV_FLAG = "SCENEDIFF_BACKEND"


def _pick_backend() -> str:
    choice = os.environ.get(_ENV_FLAG, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        import numba  # noqa: F401  (raises if unavailable)

        return "numba"
    if choice:
        raise ValueError(f"{_ENV_FLAG} must be 'numpy' or 'numba', got {choice!r}")
    try:
        import numba  # noqa: F401

        return "numba"
    except ImportError:
        return "numpy"


BACKEND = _pick_backend()


def active_backend() -> str:
    return BACKEND


# -- numpy kernels ----------------------------------------------------------


def _fill_rect_np(img, x_min, y_min, x_max, y_max, color):
    h, w = img.shape[:2]
    x0, x1 = pixel_span(x_min, x_max, w)
    y0, y1 = pixel_span(y_min, y_max, h)
    img[y0:y1, x0:x1] = color


def _fill_ellipse_np(img, x_min, y_min, x_max, y_max, color):
    h, w = img.shape[:2]
    x0, x1 = pixel_span(x_min, x_max, w)
    y0, y1 = pixel_span(y_min, y_max, h)
    if x0 >= x1 or y0 >= y1:
        return
    cx = (x_min + x_max) / 2.0
    cy = (y_min + y_max) / 2.0
    rx = (x_max - x_min) / 2.0
    ry = (y_max - y_min) / 2.0
    nx = (np.arange(x0, x1, dtype=np.float64) + 0.5 - cx) / rx
    ny = (np.arange(y0, y1, dtype=np.float64) + 0.5 - cy) / ry
    inside = nx[None, :] * nx[None, :] + ny[:, None] * ny[:, None] <= 1.0
    img[y0:y1, x0:x1][inside] = color


def _fill_capsule_np(img, x_min, y_min, x_max, y_max, color):
    h, w = img.shape[:2]
    x0, x1 = pixel_span(x_min, x_max, w)
    y0, y1 = pixel_span(y_min, y_max, h)
    if x0 >= x1 or y0 >= y1:
        return
    ax, ay, bx, by, r = _capsule_axis(x_min, y_min, x_max, y_max)
    px = np.arange(x0, x1, dtype=np.float64) + 0.5
    py = np.arange(y0, y1, dtype=np.float64) + 0.5
    dx = bx - ax
    dy = by - ay
    len2 = dx * dx + dy * dy
    if len2 == 0.0:
        t = np.zeros((y1 - y0, x1 - x0))
    else:
        t = ((px[None, :] - ax) * dx + (py[:, None] - ay) * dy) / len2
        t = np.minimum(np.maximum(t, 0.0), 1.0)
    ex = px[None, :] - (ax + t * dx)
    ey = py[:, None] - (ay + t * dy)
    inside = ex * ex + ey * ey <= r * r
    img[y0:y1, x0:x1][inside] = color


def _capsule_axis(x_min, y_min, x_max, y_max):
    """Capsule inscribed in a box: axis along the longer side, caps inside."""
    w = x_max - x_min
    h = y_max - y_min
    if w >= h:
        r = h / 2.0
        cy = (y_min + y_max) / 2.0
        return x_min + r, cy, x_max - r, cy, r
    r = w / 2.0
    cx = (x_min + x_max) / 2.0
    return cx, y_min + r, cx, y_max - r, r


# -- numba kernels ----------------------------------------------------------

if BACKEND == "numba":
    from numba import njit

    @njit(cache=True)
    def _fill_rect_nb(img, x0, y0, x1, y1, r, g, b):
        for yy in range(y0, y1):
            for xx in range(x0, x1):
                img[yy, xx, 0] = r
                img[yy, xx, 1] = g
                img[yy, xx, 2] = b

    @njit(cache=True)
    def _fill_ellipse_nb(img, x0, y0, x1, y1, cx, cy, rx, ry, r, g, b):
        for yy in range(y0, y1):
            ny = (yy + 0.5 - cy) / ry
            for xx in range(x0, x1):
                nx = (xx + 0.5 - cx) / rx
                if nx * nx + ny * ny <= 1.0:
                    img[yy, xx, 0] = r
                    img[yy, xx, 1] = g
                    img[yy, xx, 2] = b

    @njit(cache=True)
    def _fill_capsule_nb(img, x0, y0, x1, y1, ax, ay, bx, by, rad, r, g, b):
        dx = bx - ax
        dy = by - ay
        len2 = dx * dx + dy * dy
        r2 = rad * rad
        for yy in range(y0, y1):
            py = yy + 0.5
            for xx in range(x0, x1):
                px = xx + 0.5
                if len2 == 0.0:
                    t = 0.0
                else:
                    t = ((px - ax) * dx + (py - ay) * dy) / len2
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                ex = px - (ax + t * dx)
                ey = py - (ay + t * dy)
                if ex * ex + ey * ey <= r2:
                    img[yy, xx, 0] = r
                    img[yy, xx, 1] = g
                    img[yy, xx, 2] = b


def fill_rect(img: np.ndarray, x_min, y_min, x_max, y_max, color) -> None:
    if BACKEND == "numba":
        h, w = img.shape[:2]
        x0, x1 = pixel_span(x_min, x_max, w)
        y0, y1 = pixel_span(y_min, y_max, h)
        _fill_rect_nb(img, x0, y0, x1, y1, color[0], color[1], color[2])
    else:
        _fill_rect_np(img, x_min, y_min, x_max, y_max, color)


def fill_ellipse(img: np.ndarray, x_min, y_min, x_max, y_max, color) -> None:
    if BACKEND == "numba":
        h, w = img.shape[:2]
        x0, x1 = pixel_span(x_min, x_max, w)
        y0, y1 = pixel_span(y_min, y_max, h)
        cx = (x_min + x_max) / 2.0
        cy = (y_min + y_max) / 2.0
        _fill_ellipse_nb(
            img, x0, y0, x1, y1, cx, cy, (x_max - x_min) / 2.0, (y_max - y_min) / 2.0,
            color[0], color[1], color[2],
        )
    else:
        _fill_ellipse_np(img, x_min, y_min, x_max, y_max, color)


def fill_capsule(img: np.ndarray, x_min, y_min, x_max, y_max, color) -> None:
    if BACKEND == "numba":
        h, w = img.shape[:2]
        x0, x1 = pixel_span(x_min, x_max, w)
        y0, y1 = pixel_span(y_min, y_max, h)
        ax, ay, bx, by, r = _capsule_axis(x_min, y_min, x_max, y_max)
        _fill_capsule_nb(img, x0, y0, x1, y1, ax, ay, bx, by, r, color[0], color[1], color[2])
    else:
        _fill_capsule_np(img, x_min, y_min, x_max, y_max, color)


def render_scene(scene: Scene) -> np.ndarray:
    """Draw every detection as its class shape on a flat background.

    Draw order is bottom-up by stacking: support-like classes (boards,
    plates, pots) first, then by descending bbox area, so contained and
    placed objects end up on top of whatever they sit in or on.
    """
    img = np.empty((scene.image_height, scene.image_width, 3), dtype=np.uint8)
    img[:] = BACKGROUND
    order = sorted(
        scene.detections,
        key=lambda d: (
            -style_for(d.label).support_rank,
            -(d.bbox.width * d.bbox.height),
            d.id,
        ),
    )
    for det in order:
        style = style_for(det.label)
        b = det.bbox
        if style.shape == ELLIPSE:
            fill_ellipse(img, b.x_min, b.y_min, b.x_max, b.y_max, style.color)
        elif style.shape == CAPSULE:
            fill_capsule(img, b.x_min, b.y_min, b.x_max, b.y_max, style.color)
        else:
            fill_rect(img, b.x_min, b.y_min, b.x_max, b.y_max, style.color)
    return img


def warmup() -> None:
    """Trigger JIT compilation outside any timed region."""
    img = np.zeros((8, 8, 3), dtype=np.uint8)
    fill_rect(img, 1, 1, 7, 7, (1, 2, 3))
    fill_ellipse(img, 1, 1, 7, 7, (1, 2, 3))
    fill_capsule(img, 1, 1, 7, 5, (1, 2, 3))


def png_bytes(img: np.ndarray) -> bytes:
    """Deterministic PNG encoding (no timestamps or ancillary chunks)."""
    from io import BytesIO

    from PIL import Image

    buf = BytesIO()
    Image.fromarray(img, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def load_png(path) -> np.ndarray:
    from PIL import Image

    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))
