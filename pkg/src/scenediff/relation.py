"""Spatial-relation layer: candidate pairs, classifier inputs, heuristic classifier.

A relation is a 5-way label over an ordered detection pair (A, B). Pairs are
canonicalized so A is the lexicographically smaller id; both scenes of a pair
are always queried in the same orientation.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

import numpy as np

from .boxes import BoundingBox, area, intersection_area, iou, pixel_span, union_box
from .scene import Detection, Scene


class RelationLabel(enum.Enum):
    A_IN_B = "A_IN_B"
    B_IN_A = "B_IN_A"
    A_ON_B = "A_ON_B"
    B_ON_A = "B_ON_A"
    UNRELATED = "UNRELATED"

    def swapped(self) -> "RelationLabel":
        """The same relation with the pair order reversed."""
        return _SWAP[self]


_SWAP = {
    RelationLabel.A_IN_B: RelationLabel.B_IN_A,
    RelationLabel.B_IN_A: RelationLabel.A_IN_B,
    RelationLabel.A_ON_B: RelationLabel.B_ON_A,
    RelationLabel.B_ON_A: RelationLabel.A_ON_B,
    RelationLabel.UNRELATED: RelationLabel.UNRELATED,
}

RELATION_ORDER = (
    RelationLabel.A_IN_B,
    RelationLabel.B_IN_A,
    RelationLabel.A_ON_B,
    RelationLabel.B_ON_A,
    RelationLabel.UNRELATED,
)


@dataclass(frozen=True)
class PairCandidate:
    """Unordered detection pair in canonical (lexicographic) order."""

    a_id: str
    b_id: str

    def __post_init__(self):
        if self.a_id == self.b_id:
            raise ValueError(f"pair must reference two distinct detections, got {self.a_id!r}")
        if self.a_id > self.b_id:
            raise ValueError(
                f"pair ids must be in canonical order: {self.a_id!r} > {self.b_id!r}"
            )

    @classmethod
    def of(cls, id1: str, id2: str) -> "PairCandidate":
        return cls(min(id1, id2), max(id1, id2))

    def as_tuple(self) -> tuple[str, str]:
        return (self.a_id, self.b_id)


def candidate_pairs(scene: Scene) -> list[PairCandidate]:
    """All unordered detection pairs with strictly positive IoU, sorted."""
    dets = scene.detections
    out = []
    for i in range(len(dets)):
        for j in range(i + 1, len(dets)):
            if iou(dets[i].bbox, dets[j].bbox) > 0.0:
                out.append(PairCandidate.of(dets[i].id, dets[j].id))
    return sorted(out, key=PairCandidate.as_tuple)


@dataclass(frozen=True)
class ClassifierInput:
    """Five-channel classifier input: RGB crop of the pair's union box plus
    one filled-bbox binary mask per object, all in crop coordinates."""

    width: int
    height: int
    rgb: np.ndarray  # (height, width, 3) uint8
    mask_a: np.ndarray  # (height, width) uint8 in {0, 1}
    mask_b: np.ndarray
    bbox_a: BoundingBox  # crop coordinates
    bbox_b: BoundingBox

    def __post_init__(self):
        if self.rgb.shape != (self.height, self.width, 3):
            raise ValueError("rgb channel shape mismatch")
        for name, mask in (("mask_a", self.mask_a), ("mask_b", self.mask_b)):
            if mask.shape != (self.height, self.width):
                raise ValueError(f"{name} shape mismatch")
            if not np.isin(mask, (0, 1)).all():
                raise ValueError(f"{name} must be binary")
            if not mask.any():
                raise ValueError(f"{name} has no set pixels")

    def stacked(self) -> np.ndarray:
        """(5, height, width) float32 array: RGB scaled to [0, 1] + masks."""
        rgb = self.rgb.astype(np.float32).transpose(2, 0, 1) / 255.0
        return np.concatenate(
            [rgb, self.mask_a[None].astype(np.float32), self.mask_b[None].astype(np.float32)]
        )


def rasterize_bbox_mask(box: BoundingBox, width: int, height: int) -> np.ndarray:
    """Binary (height, width) mask of pixels whose centers fall inside the box."""
    x0, x1 = pixel_span(box.x_min, box.x_max, width)
    y0, y1 = pixel_span(box.y_min, box.y_max, height)
    mask = np.zeros((height, width), dtype=np.uint8)
    mask[y0:y1, x0:x1] = 1
    return mask


def build_classifier_input(
    image: np.ndarray, det_a: Detection, det_b: Detection
) -> ClassifierInput:
    """Crop the pair's union box out of the image and attach both bbox masks.

    The crop is rounded outward to integer pixels and clipped to the image;
    crops under 2 px on a side are rejected.
    """
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) image, got shape {image.shape}")
    img_h, img_w = image.shape[:2]
    union = union_box(det_a.bbox, det_b.bbox)
    x0 = max(0, int(np.floor(union.x_min)))
    y0 = max(0, int(np.floor(union.y_min)))
    x1 = min(img_w, int(np.ceil(union.x_max)))
    y1 = min(img_h, int(np.ceil(union.y_max)))
    width, height = x1 - x0, y1 - y0
    if width < 2 or height < 2:
        raise ValueError(
            f"degenerate crop {width}x{height} for pair ({det_a.id!r}, {det_b.id!r})"
        )
    rgb = np.ascontiguousarray(image[y0:y1, x0:x1])
    box_a = _shift_into_crop(det_a.bbox, x0, y0, width, height)
    box_b = _shift_into_crop(det_b.bbox, x0, y0, width, height)
    return ClassifierInput(
        width=width,
        height=height,
        rgb=rgb,
        mask_a=rasterize_bbox_mask(box_a, width, height),
        mask_b=rasterize_bbox_mask(box_b, width, height),
        bbox_a=box_a,
        bbox_b=box_b,
    )


def _shift_into_crop(box: BoundingBox, x0: int, y0: int, w: int, h: int) -> BoundingBox:
    return BoundingBox(
        min(max(box.x_min - x0, 0.0), w),
        min(max(box.y_min - y0, 0.0), h),
        min(max(box.x_max - x0, 0.0), w),
        min(max(box.y_max - y0, 0.0), h),
    )


@dataclass(frozen=True)
class HeuristicConfig:
    """Thresholds for the geometry-only relation heuristic."""

    relate_threshold: float = 0.2
    inside_threshold: float = 0.9


def heuristic_classify(
    det_a: Detection, det_b: Detection, config: HeuristicConfig = HeuristicConfig()
) -> RelationLabel:
    """Classify a pair from box geometry alone.

    The subject is the more-contained box (ties: smaller area, then smaller
    id); subjects contained below the relate threshold are UNRELATED, above
    the inside threshold IN, otherwise ON.
    """
    inter = intersection_area(det_a.bbox, det_b.bbox)
    area_a, area_b = area(det_a.bbox), area(det_b.bbox)
    f_a, f_b = inter / area_a, inter / area_b
    if max(f_a, f_b) < config.relate_threshold:
        return RelationLabel.UNRELATED
    if f_a != f_b:
        subject_is_a = f_a > f_b
    elif area_a != area_b:
        subject_is_a = area_a < area_b
    else:
        subject_is_a = det_a.id < det_b.id
    subject_frac = f_a if subject_is_a else f_b
    if subject_frac >= config.inside_threshold:
        return RelationLabel.A_IN_B if subject_is_a else RelationLabel.B_IN_A
    return RelationLabel.A_ON_B if subject_is_a else RelationLabel.B_ON_A


@runtime_checkable
class RelationClassifier(Protocol):
    """Anything that labels the spatial relation of an ordered detection pair.

    `scene` identifies which capture is being asked about; `image` is that
    scene's raster, or None for classifiers that work from geometry alone.
    """

    def classify(
        self, scene: Scene, image: np.ndarray | None, det_a: Detection, det_b: Detection
    ) -> RelationLabel: ...


class HeuristicClassifier:
    """RelationClassifier adapter around heuristic_classify."""

    def __init__(self, config: HeuristicConfig = HeuristicConfig()):
        self.config = config

    def classify(self, scene, image, det_a, det_b) -> RelationLabel:
        return heuristic_classify(det_a, det_b, self.config)
