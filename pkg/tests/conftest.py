import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from scenediff.boxes import BoundingBox
from scenediff.scene import Detection, Scene, ScenePair


def box(x0, y0, x1, y1) -> BoundingBox:
    return BoundingBox(x0, y0, x1, y1)


def det(det_id: str, b: BoundingBox, label: str | None = None, confidence: float = 0.95) -> Detection:
    return Detection(det_id, label or det_id.rsplit("-", 1)[0], confidence, b)


def scene(*dets: Detection, width: int = 640, height: int = 480) -> Scene:
    return Scene(width, height, tuple(dets))


def pair(initial: Scene, final: Scene) -> ScenePair:
    return ScenePair(initial, final)


@pytest.fixture
def make_scene():
    return scene
