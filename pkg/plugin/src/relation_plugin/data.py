"""Crop loading and 5-channel tensor construction.

A crop record is one row of the generator's ``crops/labels.csv``:
``file`` (PNG path relative to the dataset root), ``bbox_a``/``bbox_b``
("x0 y0 x1 y1" in crop coordinates), and ``label``.

Tensors are 5x128x128 float32: RGB scaled to [0, 1] resized bilinearly,
then one binary mask per box built at native crop resolution and resized
with nearest-neighbor.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import INPUT_SIZE, LABELS


@dataclass(frozen=True)
class CropRecord:
    path: Path
    bbox_a: tuple[float, float, float, float]
    bbox_b: tuple[float, float, float, float]
    label: int


def _parse_box(cell: str) -> tuple[float, float, float, float]:
    parts = [float(v) for v in cell.split()]
    if len(parts) != 4:
        raise ValueError(f"bbox cell must hold four numbers, got {cell!r}")
    return tuple(parts)


def read_manifest(crops_dir: str | Path) -> list[CropRecord]:
    """Read labels.csv; the file column is resolved against the dataset root."""
    crops_dir = Path(crops_dir)
    labels_csv = crops_dir / "labels.csv"
    if not labels_csv.is_file():
        # Accept either the dataset root or the crops/ directory itself.
        alt = crops_dir / "crops" / "labels.csv"
        if alt.is_file():
            labels_csv = alt
        else:
            raise FileNotFoundError(f"no labels.csv under {crops_dir}")
    root = labels_csv.parent.parent
    records = []
    with open(labels_csv, newline="", encoding="utf-8") as fh:
        for i, row in enumerate(csv.DictReader(fh)):
            try:
                records.append(
                    CropRecord(
                        path=root / row["file"],
                        bbox_a=_parse_box(row["bbox_a"]),
                        bbox_b=_parse_box(row["bbox_b"]),
                        label=LABELS.index(row["label"]),
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValueError(f"labels.csv row {i}: {exc}") from exc
    return records


def bbox_mask(box, width: int, height: int) -> np.ndarray:
    """Binary mask of pixels whose centers fall inside the box."""
    x0, y0, x1, y1 = box
    mask = np.zeros((height, width), dtype=np.uint8)
    cs = max(0, math.ceil(x0 - 0.5))
    ce = min(width, math.ceil(x1 - 0.5))
    rs = max(0, math.ceil(y0 - 0.5))
    re = min(height, math.ceil(y1 - 0.5))
    mask[rs:re, cs:ce] = 1
    return mask


def build_input(rgb: np.ndarray, bbox_a, bbox_b) -> np.ndarray:
    """(5, 128, 128) float32 tensor from an (H, W, 3) uint8 crop and two boxes.

    The crop keeps its aspect ratio: it is scaled so the longer side is 128
    (RGB bilinear, masks nearest) and zero-padded to the square, so thin
    crops are not stretched out of shape.
    """
    h, w = rgb.shape[:2]
    scale = INPUT_SIZE / max(w, h)
    tw = max(1, round(w * scale))
    th = max(1, round(h * scale))
    out = np.zeros((5, INPUT_SIZE, INPUT_SIZE), dtype=np.float32)
    im = Image.fromarray(rgb, mode="RGB").resize((tw, th), Image.BILINEAR)
    out[:3, :th, :tw] = np.asarray(im, dtype=np.float32).transpose(2, 0, 1) / 255.0
    for channel, box in ((3, bbox_a), (4, bbox_b)):
        mask = bbox_mask(box, w, h)
        mask_im = Image.fromarray(mask * 255).resize((tw, th), Image.NEAREST)
        out[channel, :th, :tw] = np.asarray(mask_im, dtype=np.float32) / 255.0
    return out


def load_crop(record: CropRecord) -> np.ndarray | None:
    """Tensor for one record, or None when the file is unreadable."""
    try:
        with Image.open(record.path) as im:
            rgb = np.asarray(im.convert("RGB"))
    except OSError:
        return None
    return build_input(rgb, record.bbox_a, record.bbox_b)


SWAPPED_LABEL = {0: 1, 1: 0, 2: 3, 3: 2, 4: 4}


def swap_pair(tensor: np.ndarray, label: int) -> tuple[np.ndarray, int]:
    """Exchange the two mask channels and relabel accordingly."""
    swapped = tensor[[0, 1, 2, 4, 3]]
    return swapped, SWAPPED_LABEL[label]
