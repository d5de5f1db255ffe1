"""Scene and task file I/O.

Two scene input formats are supported:

* ``scene_json`` — the native format::

      {"image": {"width": W, "height": H, "path": "optional.png"},
       "detections": [{"id": "cup-0", "class": "cup", "confidence": 0.97,
                       "bbox": [x_min, y_min, x_max, y_max]}]}

* ``detector_txt`` — one detection per line, ``class_index cx cy w h`` with
  all five values normalized to [0, 1] in center-size form. Requires the
  image dimensions and a class-name list (one name per line in a sidecar
  file, or any sequence of strings).

Task files (``tasks_json``)::

      {"tasks": [{"picked": "spoon-0", "target": "bowl-0",
                  "kind": "on", "method": "geometric"}]}

Detection ids missing from the input are assigned as ``<class>-<k>`` with
``k`` counting per class in reading order. All writers are deterministic:
records are sorted where the format says so and no timestamps are emitted.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .boxes import BoundingBox, clamp_box
from .errors import SceneParseError
from .scene import DEFAULT_CLASSES, Detection, Method, PickPlaceTask, Scene, TaskKind

SCENE_JSON = "scene_json"
DETECTOR_TXT = "detector_txt"


def parse_scene(
    text: str,
    fmt: str = SCENE_JSON,
    *,
    image_size: tuple[int, int] | None = None,
    class_names: Sequence[str] | None = None,
) -> Scene:
    """Parse scene text in the given format into a Scene with clamped boxes."""
    if fmt == SCENE_JSON:
        return _parse_scene_json(text)
    if fmt == DETECTOR_TXT:
        if image_size is None:
            raise SceneParseError("detector_txt input requires image dimensions")
        return _parse_detector_txt(text, image_size, class_names or DEFAULT_CLASSES)
    raise SceneParseError(f"unknown scene format {fmt!r}")


def load_scene(
    path: str | Path,
    fmt: str = SCENE_JSON,
    *,
    image_size: tuple[int, int] | None = None,
    class_names: Sequence[str] | None = None,
) -> Scene:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneParseError(f"cannot read scene file {path}: {exc}") from exc
    return parse_scene(text, fmt, image_size=image_size, class_names=class_names)


def _parse_scene_json(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneParseError(f"invalid scene JSON: {exc}") from exc
    if not isinstance(doc, dict) or "image" not in doc:
        raise SceneParseError("scene JSON must be an object with an 'image' field")
    image = doc["image"]
    try:
        width = int(image["width"])
        height = int(image["height"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneParseError(f"scene JSON image field malformed: {exc}") from exc
    path = image.get("path")

    detections: list[Detection] = []
    counters: dict[str, int] = {}
    used_ids: set[str] = set()
    for i, rec in enumerate(doc.get("detections", [])):
        where = f"detection #{i}"
        if not isinstance(rec, dict):
            raise SceneParseError(f"{where}: expected an object")
        try:
            label = str(rec["class"])
            raw = rec["bbox"]
        except KeyError as exc:
            raise SceneParseError(f"{where}: missing field {exc}") from exc
        if not isinstance(raw, (list, tuple)) or len(raw) != 4:
            raise SceneParseError(f"{where}: bbox must be [x_min, y_min, x_max, y_max]")
        try:
            box = BoundingBox(*(float(v) for v in raw))
            box = clamp_box(box, width, height)
        except (TypeError, ValueError) as exc:
            raise SceneParseError(f"{where} ({label}): {exc}") from exc
        confidence = rec.get("confidence", 1.0)
        det_id = rec.get("id") or _auto_id(label, counters, used_ids)
        used_ids.add(det_id)
        try:
            detections.append(Detection(str(det_id), label, float(confidence), box))
        except ValueError as exc:
            raise SceneParseError(f"{where}: {exc}") from exc
    try:
        return Scene(width, height, tuple(detections), path)
    except ValueError as exc:
        raise SceneParseError(str(exc)) from exc


def _parse_detector_txt(
    text: str, image_size: tuple[int, int], class_names: Sequence[str]
) -> Scene:
    width, height = image_size
    detections: list[Detection] = []
    counters: dict[str, int] = {}
    used_ids: set[str] = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 5:
            raise SceneParseError(
                f"line {lineno}: expected 'class_index cx cy w h', got {len(fields)} fields"
            )
        try:
            cls_idx = int(fields[0])
            cx, cy, w, h = (float(v) for v in fields[1:])
        except ValueError as exc:
            raise SceneParseError(f"line {lineno}: {exc}") from exc
        if not 0 <= cls_idx < len(class_names):
            raise SceneParseError(
                f"line {lineno}: class index {cls_idx} outside class list "
                f"of {len(class_names)} names"
            )
        label = class_names[cls_idx]
        box = BoundingBox(
            (cx - w / 2.0) * width,
            (cy - h / 2.0) * height,
            (cx + w / 2.0) * width,
            (cy + h / 2.0) * height,
        )
        try:
            box = clamp_box(box, width, height)
        except ValueError as exc:
            raise SceneParseError(f"line {lineno} ({label}): {exc}") from exc
        det_id = _auto_id(label, counters, used_ids)
        used_ids.add(det_id)
        detections.append(Detection(det_id, label, 1.0, box))
    return Scene(width, height, tuple(detections))


def _auto_id(label: str, counters: dict[str, int], used: set[str]) -> str:
    k = counters.get(label, 0)
    candidate = f"{label}-{k}"
    while candidate in used:
        k += 1
        candidate = f"{label}-{k}"
    counters[label] = k + 1
    return candidate


def scene_to_dict(scene: Scene) -> dict:
    image: dict = {"width": scene.image_width, "height": scene.image_height}
    if scene.image_path is not None:
        image["path"] = scene.image_path
    return {
        "image": image,
        "detections": [
            {
                "id": d.id,
                "class": d.label,
                "confidence": d.confidence,
                "bbox": list(d.bbox.as_tuple()),
            }
            for d in scene.detections
        ],
    }


def serialize_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2, sort_keys=True) + "\n"


def serialize_tasks(tasks: Iterable[PickPlaceTask]) -> str:
    """Deterministic tasks document: sorted by (picked, target, kind)."""
    records = [
        {
            "picked": t.picked_id,
            "target": t.target_id,
            "kind": t.kind.value,
            "method": t.method.value,
        }
        for t in sorted(tasks, key=PickPlaceTask.key)
    ]
    return json.dumps({"tasks": records}, indent=2, sort_keys=True) + "\n"


def parse_tasks(text: str) -> list[PickPlaceTask]:
    try:
        doc = json.loads(text)
        records = doc["tasks"]
    except (json.JSONDecodeError, TypeError, KeyError) as exc:
        raise SceneParseError(f"invalid tasks JSON: {exc}") from exc
    tasks = []
    for i, rec in enumerate(records):
        try:
            tasks.append(
                PickPlaceTask(
                    picked_id=str(rec["picked"]),
                    target_id=str(rec["target"]),
                    kind=TaskKind(rec["kind"]),
                    method=Method(rec["method"]),
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise SceneParseError(f"task #{i}: {exc}") from exc
    return tasks


def load_tasks(path: str | Path) -> list[PickPlaceTask]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SceneParseError(f"cannot read tasks file {path}: {exc}") from exc
    return parse_tasks(text)


def write_atomic(path: str | Path, data: str | bytes) -> None:
    """Write via a temp file in the target directory plus rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
