"""Scene data model: detections, scenes, scene pairs, and pick-and-place tasks."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from .boxes import BoundingBox

# Household object classes recognized by the upstream detector. The list is
# closed by default but every parser/generator accepts a custom class list.
DEFAULT_CLASSES: tuple[str, ...] = (
    "bottle",
    "pan",
    "plate",
    "pot",
    "spoon",
    "whisk",
    "knife",
    "bowl",
    "cup",
    "cutting_board",
    "fork",
)


class TaskKind(enum.Enum):
    IN = "in"
    ON = "on"
    REMOVED = "removed"


class Method(enum.Enum):
    """Provenance of a task: which inference path (or ground truth) produced it."""

    GEOMETRIC = "geometric"
    TRANSITION = "transition"
    TRUTH = "truth"


@dataclass(frozen=True)
class Detection:
    """One detected object in one image."""

    id: str
    label: str
    confidence: float
    bbox: BoundingBox

    def __post_init__(self):
        if not self.id:
            raise ValueError("detection id must be non-empty")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0, 1] for {self.id!r}")


@dataclass(frozen=True)
class Scene:
    """All detections for one image. Detections keep their input order."""

    image_width: int
    image_height: int
    detections: tuple[Detection, ...]
    image_path: str | None = None

    def __post_init__(self):
        if self.image_width <= 0 or self.image_height <= 0:
            raise ValueError("image dimensions must be positive")
        seen: set[str] = set()
        for det in self.detections:
            if det.id in seen:
                raise ValueError(f"duplicate detection id {det.id!r}")
            seen.add(det.id)
            b = det.bbox
            if b.x_min < 0 or b.y_min < 0 or b.x_max > self.image_width or b.y_max > self.image_height:
                raise ValueError(
                    f"detection {det.id!r} bbox {b.as_tuple()} outside "
                    f"{self.image_width}x{self.image_height} image"
                )

    def get(self, det_id: str) -> Detection:
        for det in self.detections:
            if det.id == det_id:
                return det
        raise KeyError(f"no detection with id {det_id!r}")

    def ids(self) -> list[str]:
        return [d.id for d in self.detections]


@dataclass(frozen=True)
class ScenePair:
    """Initial and final captures of the same tabletop."""

    initial: Scene
    final: Scene

    def __post_init__(self):
        if (self.initial.image_width, self.initial.image_height) != (
            self.final.image_width,
            self.final.image_height,
        ):
            raise ValueError("initial and final scenes must share image dimensions")


@dataclass(frozen=True)
class PickPlaceTask:
    """One inferred (or ground-truth) operation: pick `picked_id`, place it
    in/on `target_id`, or remove it from `target_id`."""

    picked_id: str
    target_id: str
    kind: TaskKind
    method: Method

    def __post_init__(self):
        if self.picked_id == self.target_id:
            raise ValueError(f"task cannot pick and target the same object {self.picked_id!r}")
        if self.method is Method.GEOMETRIC and self.kind is TaskKind.REMOVED:
            raise ValueError("the geometric method cannot produce REMOVED tasks")

    def key(self) -> tuple[str, str, str]:
        return (self.picked_id, self.target_id, self.kind.value)
