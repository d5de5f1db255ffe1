"""NDJSON serving loop.

Emits ``{"ready": true, "protocol": 1}`` then answers one request per line:
decode the crop PNG, rebuild the two bbox masks, classify, respond with the
label and softmax probabilities. Malformed requests get a per-id error
response; the session keeps running.
"""

from __future__ import annotations

import base64
import json
import sys
from io import BytesIO

import numpy as np
import torch
from PIL import Image

from . import LABELS
from .data import build_input
from .model import load_model


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc) + "\n")
    sys.stdout.flush()


def _parse_request(line: str) -> tuple[int, np.ndarray, tuple, tuple]:
    doc = json.loads(line)
    rid = doc["id"]
    if not isinstance(rid, int):
        raise ValueError("id must be an integer")
    png = base64.b64decode(doc["image_png_b64"])
    with Image.open(BytesIO(png)) as im:
        rgb = np.asarray(im.convert("RGB"))
    bbox_a = tuple(float(v) for v in doc["bbox_a"])
    bbox_b = tuple(float(v) for v in doc["bbox_b"])
    for name, box in (("bbox_a", bbox_a), ("bbox_b", bbox_b)):
        if len(box) != 4 or box[0] >= box[2] or box[1] >= box[3]:
            raise ValueError(f"{name} is not a valid box: {box}")
    return rid, rgb, bbox_a, bbox_b


@torch.no_grad()
def serve(model_path, stdin=None, emit=_emit) -> None:
    model = load_model(model_path)
    emit({"ready": True, "protocol": 1})
    stdin = stdin if stdin is not None else sys.stdin
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        rid = None
        try:
            doc = json.loads(line)
            rid = doc.get("id") if isinstance(doc, dict) else None
            request_id, rgb, bbox_a, bbox_b = _parse_request(line)
            tensor = torch.from_numpy(build_input(rgb, bbox_a, bbox_b)[None])
            probs = torch.softmax(model(tensor)[0], dim=0)
            idx = int(probs.argmax())
            emit(
                {
                    "id": request_id,
                    "label": LABELS[idx],
                    "probs": {name: float(p) for name, p in zip(LABELS, probs.tolist())},
                }
            )
        except Exception as exc:  # per-request errors keep the session alive
            emit({"id": rid if isinstance(rid, int) else 0, "error": str(exc)})
