"""Schematic per-class drawing styles and size ranges for the simulator.

Sizes are fractions of the image's smaller dimension; aspect is height/width
before a random 90-degree flip. Colors are fixed so renders are deterministic
and classes stay visually distinguishable.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

ELLIPSE = "ellipse"
CAPSULE = "capsule"
RECT = "rect"

BACKGROUND = (120, 122, 125)


@dataclass(frozen=True)
class ClassStyle:
    shape: str
    color: tuple[int, int, int]
    width_frac: tuple[float, float]
    aspect: tuple[float, float]
    # Higher rank objects act as supports/containers; the higher-ranked
    # member of a simulated task is always the target.
    support_rank: float


CLASS_STYLES: dict[str, ClassStyle] = {
    "bottle": ClassStyle(RECT, (70, 130, 180), (0.06, 0.09), (2.2, 3.0), 1.5),
    "pan": ClassStyle(ELLIPSE, (80, 80, 85), (0.20, 0.27), (0.85, 1.0), 2.6),
    "plate": ClassStyle(ELLIPSE, (238, 238, 242), (0.20, 0.28), (0.90, 1.0), 2.8),
    "pot": ClassStyle(ELLIPSE, (105, 115, 125), (0.17, 0.24), (0.85, 1.0), 2.4),
    "spoon": ClassStyle(CAPSULE, (175, 175, 190), (0.13, 0.19), (0.18, 0.28), 1.0),
    "whisk": ClassStyle(CAPSULE, (150, 105, 60), (0.14, 0.20), (0.22, 0.32), 1.2),
    "knife": ClassStyle(CAPSULE, (60, 60, 70), (0.15, 0.21), (0.12, 0.20), 1.1),
    "bowl": ClassStyle(ELLIPSE, (205, 130, 60), (0.15, 0.21), (0.90, 1.0), 2.2),
    "cup": ClassStyle(ELLIPSE, (170, 45, 45), (0.09, 0.13), (0.90, 1.1), 1.8),
    "cutting_board": ClassStyle(RECT, (185, 140, 90), (0.26, 0.36), (0.60, 0.75), 3.0),
    "fork": ClassStyle(CAPSULE, (120, 190, 150), (0.13, 0.19), (0.14, 0.22), 1.05),
}


def style_for(label: str) -> ClassStyle:
    """Style lookup with a deterministic fallback for user-extended classes."""
    style = CLASS_STYLES.get(label)
    if style is not None:
        return style
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    color = (60 + digest[0] % 160, 60 + digest[1] % 160, 60 + digest[2] % 160)
    return ClassStyle(RECT, color, (0.10, 0.18), (0.6, 1.0), 1.5)
