"""Synthetic scene-pair generator with ground-truth tasks and relations.

Each sample is deterministic in (seed, index): an initial layout of
disjoint objects, a set of pick-and-place tasks applied geometrically to
produce the final scene, per-scene ground-truth relation labels, and
(optionally) rendered images.

Two generation modes exist:

* ``standard`` — tasks are IN/ON/REMOVED with the configured mix. With
  ``detectability`` set, samples additionally satisfy the geometric
  method's working assumptions: picked objects travel more than twice the
  default movement threshold, placements overlap their target with IoU
  above 0.4, non-moved objects only jitter, and no task participant shares
  a class with any other object in the scene.
* ``adversarial`` — tasks are traps the geometric method gets wrong while
  the relation-transition method does not: direction traps (the target
  slides under a static picked object), sub-threshold placements (the
  picked object nudges into overlap without crossing the movement
  threshold), and removals.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .boxes import BoundingBox, center, containment, iou
from .errors import GenerationError, SceneParseError
from .raster import png_bytes, render_scene
from .relation import PairCandidate, RelationLabel, build_classifier_input
from .scene import (
    DEFAULT_CLASSES,
    Detection,
    Method,
    PickPlaceTask,
    Scene,
    ScenePair,
    TaskKind,
)
from .sceneio import parse_tasks, serialize_scene, serialize_tasks, write_atomic
from .styles import style_for

STANDARD = "standard"
ADVERSARIAL = "adversarial"

# Reference movement threshold the detectability contract is stated against
# (the geometric method's default fraction of the image diagonal).
DEFAULT_MOVEMENT_FRAC = 0.05

_MAX_RESTARTS = 40
_PLACE_TRIES = 200


@dataclass(frozen=True)
class SimConfig:
    image_width: int = 640
    image_height: int = 480
    n_objects: tuple[int, int] = (3, 6)
    n_tasks: tuple[int, int] = (1, 3)
    kind_probs: tuple[float, float, float] = (0.4, 0.4, 0.2)  # IN, ON, REMOVED
    jitter_px: float = 5.0
    detectability: bool = True
    seed: int = 0
    mode: str = STANDARD
    classes: tuple[str, ...] = DEFAULT_CLASSES
    class_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.image_width < 64 or self.image_height < 64:
            raise ValueError("image dimensions must be at least 64 px")
        for name, rng in (("n_objects", self.n_objects), ("n_tasks", self.n_tasks)):
            if len(rng) != 2 or rng[0] > rng[1] or rng[0] < 0:
                raise ValueError(f"{name} must be a (lo, hi) range with 0 <= lo <= hi")
        if self.n_objects[0] < 1:
            raise ValueError("scenes need at least one object")
        if len(self.kind_probs) != 3 or any(p < 0 for p in self.kind_probs):
            raise ValueError("kind_probs must be three non-negative values")
        if abs(sum(self.kind_probs) - 1.0) > 1e-9:
            raise ValueError("kind_probs must sum to 1")
        if self.jitter_px < 0:
            raise ValueError("jitter_px must be non-negative")
        if self.mode not in (STANDARD, ADVERSARIAL):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.detectability:
            thr = DEFAULT_MOVEMENT_FRAC * math.hypot(self.image_width, self.image_height)
            if self.jitter_px >= thr:
                raise ValueError(
                    f"jitter_px {self.jitter_px} must stay below the movement "
                    f"threshold {thr:.1f} when detectability is set"
                )
        if not self.classes:
            raise ValueError("class list must be non-empty")
        if self.class_weights is not None:
            if len(self.class_weights) != len(self.classes):
                raise ValueError("class_weights must align with classes")
            if any(w < 0 for w in self.class_weights) or sum(self.class_weights) <= 0:
                raise ValueError("class_weights must be non-negative with positive sum")

    def weights(self) -> np.ndarray:
        if self.class_weights is None:
            return np.full(len(self.classes), 1.0 / len(self.classes))
        w = np.asarray(self.class_weights, dtype=float)
        return w / w.sum()


@dataclass(frozen=True)
class TruthRelations:
    """Ground-truth relation labels per scene, keyed by canonical pair."""

    initial: dict[PairCandidate, RelationLabel]
    final: dict[PairCandidate, RelationLabel]

    def for_scene(self, key: str) -> dict[PairCandidate, RelationLabel]:
        return self.initial if key == "initial" else self.final


@dataclass(frozen=True)
class ScenePairSample:
    pair: ScenePair
    images: tuple[np.ndarray, np.ndarray] | None
    truth_tasks: tuple[PickPlaceTask, ...]
    truth_relations: TruthRelations


class OracleClassifier:
    """Relation classifier that answers from a sample's ground truth.

    Queries for a scene other than the sample's two scenes, or for detection
    ids the sample does not contain, are errors. Pairs without a stored label
    are UNRELATED.
    """

    def __init__(
        self,
        initial_scene: Scene,
        final_scene: Scene,
        initial_relations: dict[PairCandidate, RelationLabel],
        final_relations: dict[PairCandidate, RelationLabel],
    ):
        self._scenes = (initial_scene, final_scene)
        self._relations = (initial_relations, final_relations)
        self._ids = (set(initial_scene.ids()), set(final_scene.ids()))

    def classify(self, scene, image, det_a, det_b) -> RelationLabel:
        for known, relations, ids in zip(self._scenes, self._relations, self._ids):
            if scene is known or scene == known:
                for det in (det_a, det_b):
                    if det.id not in ids:
                        raise KeyError(f"detection {det.id!r} is not part of this sample")
                pair = PairCandidate.of(det_a.id, det_b.id)
                label = relations.get(pair, RelationLabel.UNRELATED)
                return label if det_a.id == pair.a_id else label.swapped()
        raise ValueError("queried scene is not part of this sample")


def oracle_classifier(sample: ScenePairSample) -> OracleClassifier:
    return OracleClassifier(
        sample.pair.initial,
        sample.pair.final,
        sample.truth_relations.initial,
        sample.truth_relations.final,
    )


# -- generation --------------------------------------------------------------


class _LayoutFailure(Exception):
    pass


@dataclass
class _TaskSpec:
    picked: int
    target: int
    kind: str  # in / on / removed / direction / subthreshold
    sub_kind: str | None = None  # removed only: the initial relation
    side: int = 0  # subthreshold only: 0 left, 1 right, 2 top, 3 bottom


@dataclass
class _Obj:
    label: str
    det_id: str
    w: float = 0.0
    h: float = 0.0
    initial: BoundingBox | None = None
    final: BoundingBox | None = None


def generate_scene_pair(config: SimConfig, index: int, *, render: bool = True) -> ScenePairSample:
    """Generate one deterministic sample for (config.seed, index)."""
    rng = np.random.default_rng([config.seed, index])
    last = "no attempt"
    for _ in range(_MAX_RESTARTS):
        try:
            return _generate_once(config, rng, render)
        except _LayoutFailure as exc:
            last = str(exc)
    raise GenerationError(
        f"sample {index}: could not place a valid scene after {_MAX_RESTARTS} attempts "
        f"({last}); try fewer or smaller objects"
    )


def _generate_once(config: SimConfig, rng: np.random.Generator, render: bool) -> ScenePairSample:
    W, H = config.image_width, config.image_height
    m = float(min(W, H))
    thr = DEFAULT_MOVEMENT_FRAC * math.hypot(W, H)
    margin = 2.0 * config.jitter_px + 4.0
    border = config.jitter_px + 2.0

    n_obj = int(rng.integers(config.n_objects[0], config.n_objects[1] + 1))
    nt = int(rng.integers(config.n_tasks[0], config.n_tasks[1] + 1))
    nt = min(nt, n_obj // 2)

    labels = _sample_labels(config, rng, n_obj, nt)
    objs = _make_objects(labels)
    for obj in objs:
        style = style_for(obj.label)
        w = rng.uniform(*style.width_frac) * m
        h = w * rng.uniform(*style.aspect)
        if style.shape != "ellipse" and rng.random() < 0.5:
            w, h = h, w
        obj.w, obj.h = w, h
    tasks = _assign_tasks(config, rng, objs, nt)
    _shape_task_dims(config, rng, objs, tasks, m)

    _place_initial(config, rng, objs, tasks, W, H, border, margin)
    _place_final(config, rng, objs, tasks, W, H, border, margin, thr)

    initial_scene = _build_scene(rng, objs, W, H, "initial")
    final_scene = _build_scene(rng, objs, W, H, "final")
    truth_tasks, relations = _build_truth(objs, tasks)

    sample = ScenePairSample(
        pair=ScenePair(initial_scene, final_scene),
        images=None,
        truth_tasks=truth_tasks,
        truth_relations=relations,
    )
    _validate_sample(sample, config, objs, tasks, thr)
    if render:
        images = (render_scene(initial_scene), render_scene(final_scene))
        sample = ScenePairSample(sample.pair, images, truth_tasks, relations)
    return sample


def _sample_labels(config: SimConfig, rng, n_obj: int, nt: int) -> list[str]:
    classes = np.asarray(config.classes, dtype=object)
    weights = config.weights()
    n_part = 2 * nt
    if n_part > len(classes):
        raise _LayoutFailure("more task participants than distinct classes")
    participants = list(rng.choice(classes, size=n_part, replace=False, p=weights))
    pool_mask = np.array([c not in participants for c in classes])
    fillers: list[str] = []
    n_fill = n_obj - n_part
    if n_fill > 0:
        if pool_mask.any():
            pool_w = weights[pool_mask]
            fillers = list(
                rng.choice(classes[pool_mask], size=n_fill, replace=True, p=pool_w / pool_w.sum())
            )
        else:
            fillers = list(rng.choice(classes, size=n_fill, replace=True, p=weights))
    return [str(c) for c in participants + fillers]


def _make_objects(labels: list[str]) -> list[_Obj]:
    counters: dict[str, int] = {}
    objs = []
    for label in labels:
        k = counters.get(label, 0)
        counters[label] = k + 1
        objs.append(_Obj(label=label, det_id=f"{label}-{k}"))
    return objs


# Containment placements need some room inside the target box.
_MIN_CONTAINER_DIM = 48.0


def _assign_tasks(config: SimConfig, rng, objs: list[_Obj], nt: int) -> list[_TaskSpec]:
    tasks = []
    for t in range(nt):
        i_a, i_b = 2 * t, 2 * t + 1
        rank_a = style_for(objs[i_a].label).support_rank
        rank_b = style_for(objs[i_b].label).support_rank
        if rank_a == rank_b:
            target_is_a = rng.random() < 0.5
        else:
            target_is_a = rank_a > rank_b
        picked, target = (i_b, i_a) if target_is_a else (i_a, i_b)
        if config.mode == ADVERSARIAL:
            kind = ("direction", "subthreshold", "removed")[int(rng.integers(3))]
        else:
            kind = ("in", "on", "removed")[int(rng.choice(3, p=config.kind_probs))]
        sub_kind = None
        fits_in = min(objs[target].w, objs[target].h) >= _MIN_CONTAINER_DIM
        if kind == "in" and not fits_in:
            kind = "on"
        if kind == "removed":
            sub_kind = "in" if (rng.random() < 0.5 and fits_in) else "on"
        tasks.append(
            _TaskSpec(picked, target, kind, sub_kind, side=int(rng.integers(4)))
        )
    return tasks


def _shape_task_dims(config: SimConfig, rng, objs: list[_Obj], tasks: list[_TaskSpec], m: float):
    for task in tasks:
        picked, target = objs[task.picked], objs[task.target]
        if task.kind == "subthreshold":
            # Small picked object so the slide into overlap stays well under
            # the movement threshold.
            cap = 0.10 * m
            scale = min(1.0, cap / max(picked.w, picked.h))
            picked.w *= scale
            picked.h *= scale
            limit = 0.8
            if picked.w > limit * target.w or picked.h > limit * target.h:
                s = min(limit * target.w / picked.w, limit * target.h / picked.h)
                picked.w *= s
                picked.h *= s
        elif task.kind == "direction":
            # Target slightly larger than the (static) picked object so the
            # final overlap clears the IoU threshold.
            target.w = picked.w * rng.uniform(1.15, 1.5)
            target.h = picked.h * rng.uniform(1.15, 1.5)


def _boxes_clear(box: BoundingBox, others: list[BoundingBox], margin: float) -> bool:
    for o in others:
        if not (
            box.x_max + margin <= o.x_min
            or o.x_max + margin <= box.x_min
            or box.y_max + margin <= o.y_min
            or o.y_max + margin <= box.y_min
        ):
            return False
    return True


def _in_bounds(box: BoundingBox, W: float, H: float, border: float) -> bool:
    return (
        box.x_min >= border
        and box.y_min >= border
        and box.x_max <= W - border
        and box.y_max <= H - border
    )


def _place_free(
    rng, w: float, h: float, W: float, H: float, border: float,
    others: list[BoundingBox], margin: float,
) -> BoundingBox:
    x_span = W - 2 * border - w
    y_span = H - 2 * border - h
    if x_span <= 0 or y_span <= 0:
        raise _LayoutFailure(f"object {w:.0f}x{h:.0f} does not fit the image")
    for _ in range(_PLACE_TRIES):
        x0 = border + rng.uniform(0.0, x_span)
        y0 = border + rng.uniform(0.0, y_span)
        box = BoundingBox(x0, y0, x0 + w, y0 + h)
        if _boxes_clear(box, others, margin):
            return box
    raise _LayoutFailure("no free slot found (scene too crowded)")


def _place_inside(
    rng, picked: _Obj, target_box: BoundingBox, detectability: bool
) -> BoundingBox:
    """Strictly-inside placement; resizes the picked box when needed."""
    inner = 2.0
    if detectability:
        # Keep the contained box large relative to the target so the pair's
        # IoU clears the detectability floor.
        alpha = rng.uniform(0.68, 0.85)
        w = target_box.width * alpha
        h = target_box.height * alpha
    else:
        w, h = picked.w, picked.h
        avail_w = target_box.width - 2 * inner
        avail_h = target_box.height - 2 * inner
        if avail_w <= 2 or avail_h <= 2:
            raise _LayoutFailure("target too small to contain anything")
        if w > avail_w or h > avail_h:
            s = min(avail_w / w, avail_h / h) * rng.uniform(0.85, 0.98)
            w *= s
            h *= s
    span_x = target_box.width - 2 * inner - w
    span_y = target_box.height - 2 * inner - h
    if span_x <= 0 or span_y <= 0:
        raise _LayoutFailure("target too small for a contained placement")
    x0 = target_box.x_min + inner + rng.uniform(0.0, span_x)
    y0 = target_box.y_min + inner + rng.uniform(0.0, span_y)
    return BoundingBox(x0, y0, x0 + w, y0 + h)


def _place_on(
    rng, w_p: float, h_p: float, target_box: BoundingBox, frac_range: tuple[float, float],
    W: float, H: float, border: float, others: list[BoundingBox], margin: float,
) -> BoundingBox:
    """Overlapping placement with containment(picked, target) in frac_range.

    The picked box hangs off a corner: it protrudes on the slide axis and
    partially on the cross axis, so neither box's visible remainder
    degenerates to a sliver.
    """
    for _ in range(_PLACE_TRIES):
        f = rng.uniform(*frac_range)
        side = int(rng.integers(4))
        cross = rng.uniform(0.72, 0.92)
        above = rng.random() < 0.5
        if side in (0, 1):
            dh = cross * min(h_p, target_box.height)
            y0 = target_box.y_min - (h_p - dh) if above else target_box.y_max - dh
            dw = f * w_p * h_p / dh
            if dw > min(w_p, target_box.width):
                continue
            x0 = target_box.x_min + dw - w_p if side == 0 else target_box.x_max - dw
        else:
            dw = cross * min(w_p, target_box.width)
            x0 = target_box.x_min - (w_p - dw) if above else target_box.x_max - dw
            dh = f * w_p * h_p / dw
            if dh > min(h_p, target_box.height):
                continue
            y0 = target_box.y_min + dh - h_p if side == 2 else target_box.y_max - dh
        box = BoundingBox(x0, y0, x0 + w_p, y0 + h_p)
        if not _in_bounds(box, W, H, border):
            continue
        if not _boxes_clear(box, others, margin):
            continue
        got = containment(box, target_box)
        if not frac_range[0] - 1e-9 <= got < 0.895:
            continue
        return box
    raise _LayoutFailure("could not realize an overlapping placement")


def _place_adjacent(
    rng, picked: _Obj, target_box: BoundingBox, side: int,
    W: float, H: float, border: float, others: list[BoundingBox], margin: float,
) -> BoundingBox:
    """Disjoint placement a few pixels off one target side (sub-threshold traps)."""
    w_p, h_p = picked.w, picked.h
    for _ in range(_PLACE_TRIES):
        gap = rng.uniform(3.0, 6.0)
        if side in (0, 1):
            y0 = rng.uniform(target_box.y_min, target_box.y_max - h_p)
            x0 = target_box.x_min - gap - w_p if side == 0 else target_box.x_max + gap
        else:
            x0 = rng.uniform(target_box.x_min, target_box.x_max - w_p)
            y0 = target_box.y_min - gap - h_p if side == 2 else target_box.y_max + gap
        box = BoundingBox(x0, y0, x0 + w_p, y0 + h_p)
        if _in_bounds(box, W, H, border) and _boxes_clear(box, others, margin):
            return box
    raise _LayoutFailure("no room next to the trap target")


def _place_initial(config, rng, objs, tasks, W, H, border, margin):
    dependent = {t.picked for t in tasks if t.kind in ("removed", "subthreshold")}
    order = sorted(
        (i for i in range(len(objs)) if i not in dependent),
        key=lambda i: -(objs[i].w * objs[i].h),
    )
    placed: list[BoundingBox] = []
    for i in order:
        objs[i].initial = _place_free(rng, objs[i].w, objs[i].h, W, H, border, placed, margin)
        placed.append(objs[i].initial)

    for task in tasks:
        if task.picked not in dependent:
            continue
        picked, target = objs[task.picked], objs[task.target]
        target_box = target.initial
        others = [o.initial for j, o in enumerate(objs) if o.initial is not None and j != task.target]
        if task.kind == "subthreshold":
            picked.initial = _place_adjacent(
                rng, picked, target_box, task.side, W, H, border, others, margin
            )
        elif task.sub_kind == "in":
            box = _place_inside(rng, picked, target_box, config.detectability)
            picked.w, picked.h = box.width, box.height
            picked.initial = box
        else:
            w_p, h_p = _resize_for_on(config, rng, picked, target)
            picked.w, picked.h = w_p, h_p
            frac = (0.7, 0.88) if config.detectability else (0.3, 0.88)
            picked.initial = _place_on(
                rng, w_p, h_p, target_box, frac, W, H, border, others, margin
            )
            if config.detectability and iou(picked.initial, target_box) <= 0.4:
                raise _LayoutFailure("removed-task initial overlap too small")


def _resize_for_on(config, rng, picked: _Obj, target: _Obj) -> tuple[float, float]:
    """Detectability ON placements need comparable areas for the IoU floor."""
    if not config.detectability:
        return picked.w, picked.h
    return target.w * rng.uniform(0.95, 1.15), target.h * rng.uniform(0.95, 1.15)


def _place_final(config, rng, objs, tasks, W, H, border, margin, thr):
    # Everything the task loop will position: picked objects always, plus the
    # target of a direction trap (there the target is what moves).
    assigned = {t.picked for t in tasks}
    assigned |= {t.target for t in tasks if t.kind == "direction"}

    for idx, obj in enumerate(objs):  # statics keep their slot up to jitter
        if idx in assigned:
            continue
        dx = rng.uniform(-config.jitter_px, config.jitter_px)
        dy = rng.uniform(-config.jitter_px, config.jitter_px)
        b = obj.initial
        obj.final = BoundingBox(b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy)

    for task in tasks:
        picked, target = objs[task.picked], objs[task.target]
        others = [
            o.final for j, o in enumerate(objs)
            if o.final is not None and j not in (task.picked, task.target)
        ]
        if task.kind == "direction":
            _final_direction_trap(config, rng, picked, target, W, H, border, others, margin, thr)
            continue
        target_box = target.final
        if task.kind == "in":
            picked.final = _place_final_in(config, rng, picked, target_box, thr)
        elif task.kind == "on":
            picked.final = _place_final_on(
                config, rng, picked, target, target_box, W, H, border, others, margin, thr
            )
        elif task.kind == "subthreshold":
            picked.final = _final_subthreshold(config, rng, picked, target, task.side, W, H, border, others, margin, thr)
        else:  # removed
            picked.final = _relocate_away(config, rng, picked, objs, W, H, border, margin, thr)


def _displacement_ok(config, box_i: BoundingBox, box_f: BoundingBox, thr: float) -> bool:
    if not config.detectability:
        return True
    (xi, yi), (xf, yf) = center(box_i), center(box_f)
    return math.hypot(xf - xi, yf - yi) > 2.0 * thr * 1.01


def _place_final_in(config, rng, picked: _Obj, target_box: BoundingBox, thr: float) -> BoundingBox:
    for _ in range(_PLACE_TRIES):
        box = _place_inside(rng, picked, target_box, config.detectability)
        if _displacement_ok(config, picked.initial, box, thr):
            return box
    raise _LayoutFailure("contained placement lands too close to the initial slot")


def _place_final_on(
    config, rng, picked: _Obj, target: _Obj, target_box, W, H, border, others, margin, thr
) -> BoundingBox:
    w_p, h_p = _resize_for_on(config, rng, picked, target)
    frac = (0.7, 0.88) if config.detectability else (0.3, 0.88)
    for _ in range(_PLACE_TRIES):
        box = _place_on(rng, w_p, h_p, target_box, frac, W, H, border, others, margin)
        if config.detectability and iou(box, target_box) <= 0.4:
            continue
        if _displacement_ok(config, picked.initial, box, thr):
            return box
    raise _LayoutFailure("overlapping placement lands too close to the initial slot")


def _final_subthreshold(
    config, rng, picked: _Obj, target: _Obj, side, W, H, border, others, margin, thr
):
    """Slide the picked box into overlap along its adjacency axis only."""
    t_i, t_f = target.initial, target.final
    p = picked.initial
    # Track the target's jitter on the cross axis to keep displacement tiny.
    dx_t, dy_t = t_f.x_min - t_i.x_min, t_f.y_min - t_i.y_min
    for _ in range(_PLACE_TRIES):
        f = rng.uniform(0.30, 0.42)
        if side in (0, 1):
            dw = f * picked.w
            x0 = t_f.x_min + dw - picked.w if side == 0 else t_f.x_max - dw
            y0 = p.y_min + dy_t
        else:
            dh = f * picked.h
            y0 = t_f.y_min + dh - picked.h if side == 2 else t_f.y_max - dh
            x0 = p.x_min + dx_t
        box = BoundingBox(x0, y0, x0 + picked.w, y0 + picked.h)
        if not _in_bounds(box, W, H, border) or not _boxes_clear(box, others, margin):
            continue
        (xi, yi), (xf, yf) = center(p), center(box)
        if math.hypot(xf - xi, yf - yi) >= 0.9 * thr:
            continue
        got = containment(box, t_f)
        if not 0.25 <= got < 0.895:
            continue
        return box
    raise _LayoutFailure("sub-threshold slide failed")


def _final_direction_trap(config, rng, picked: _Obj, target: _Obj, W, H, border, others, margin, thr):
    """The target relocates under the static picked object."""
    dx = rng.uniform(-config.jitter_px, config.jitter_px)
    dy = rng.uniform(-config.jitter_px, config.jitter_px)
    b = picked.initial
    picked.final = BoundingBox(b.x_min + dx, b.y_min + dy, b.x_max + dx, b.y_max + dy)
    p = picked.final
    for _ in range(_PLACE_TRIES):
        f = rng.uniform(0.45, 0.75)
        side = int(rng.integers(4))
        if side in (0, 1):
            dw = f * picked.w * picked.h / min(picked.h, target.h)
            if dw > min(picked.w, target.w):
                continue
            y0 = rng.uniform(p.y_max - target.h, p.y_min) if target.h >= picked.h else rng.uniform(p.y_min, p.y_max - target.h)
            x0 = p.x_min + dw - target.w if side == 0 else p.x_max - dw
        else:
            dh = f * picked.w * picked.h / min(picked.w, target.w)
            if dh > min(picked.h, target.h):
                continue
            x0 = rng.uniform(p.x_max - target.w, p.x_min) if target.w >= picked.w else rng.uniform(p.x_min, p.x_max - target.w)
            y0 = p.y_min + dh - target.h if side == 2 else p.y_max - dh
        box = BoundingBox(x0, y0, x0 + target.w, y0 + target.h)
        if not _in_bounds(box, W, H, border) or not _boxes_clear(box, others, margin):
            continue
        got = containment(p, box)
        if not 0.4 <= got < 0.895:
            continue
        if iou(p, box) <= 0.22:
            continue
        (xi, yi), (xf, yf) = center(target.initial), center(box)
        if math.hypot(xf - xi, yf - yi) <= 1.2 * thr:
            continue
        target.final = box
        return
    raise _LayoutFailure("direction trap placement failed")


def _relocate_away(config, rng, picked: _Obj, objs, W, H, border, margin, thr) -> BoundingBox:
    others = [o.final for o in objs if o.final is not None and o is not picked]
    min_disp = 2.0 * thr * 1.01 if config.detectability else 1.2 * thr
    for _ in range(_PLACE_TRIES):
        box = _place_free(rng, picked.w, picked.h, W, H, border, others, margin)
        (xi, yi), (xf, yf) = center(picked.initial), center(box)
        if math.hypot(xf - xi, yf - yi) > min_disp:
            return box
    raise _LayoutFailure("removed object found no distant free slot")


def _build_scene(rng, objs: list[_Obj], W: int, H: int, which: str) -> Scene:
    dets = []
    for obj in objs:
        box = obj.initial if which == "initial" else obj.final
        dets.append(
            Detection(obj.det_id, obj.label, float(rng.uniform(0.85, 0.999)), box)
        )
    return Scene(W, H, tuple(dets))


_KIND_FOR_SPEC = {
    "in": TaskKind.IN,
    "on": TaskKind.ON,
    "removed": TaskKind.REMOVED,
    "direction": TaskKind.ON,
    "subthreshold": TaskKind.ON,
}


def _oriented(pair: PairCandidate, subject_id: str, base: str) -> RelationLabel:
    if base == "in":
        return RelationLabel.A_IN_B if subject_id == pair.a_id else RelationLabel.B_IN_A
    return RelationLabel.A_ON_B if subject_id == pair.a_id else RelationLabel.B_ON_A


def _build_truth(objs, tasks) -> tuple[tuple[PickPlaceTask, ...], TruthRelations]:
    truth = []
    rel_initial: dict[PairCandidate, RelationLabel] = {}
    rel_final: dict[PairCandidate, RelationLabel] = {}
    for task in tasks:
        picked_id = objs[task.picked].det_id
        target_id = objs[task.target].det_id
        truth.append(PickPlaceTask(picked_id, target_id, _KIND_FOR_SPEC[task.kind], Method.TRUTH))
        pair = PairCandidate.of(picked_id, target_id)
        if task.kind == "removed":
            rel_initial[pair] = _oriented(pair, picked_id, task.sub_kind)
        elif task.kind == "in":
            rel_final[pair] = _oriented(pair, picked_id, "in")
        else:
            rel_final[pair] = _oriented(pair, picked_id, "on")
    return tuple(sorted(truth, key=PickPlaceTask.key)), TruthRelations(rel_initial, rel_final)


def _validate_sample(sample, config, objs, tasks, thr):
    """Cheap structural checks; failures restart generation."""
    for which in ("initial", "final"):
        scene = getattr(sample.pair, which)
        relations = sample.truth_relations.for_scene(which)
        dets = {d.id: d for d in scene.detections}
        for pair, label in relations.items():
            a, b = dets[pair.a_id].bbox, dets[pair.b_id].bbox
            subject, obj = (a, b) if label in (RelationLabel.A_IN_B, RelationLabel.A_ON_B) else (b, a)
            frac = containment(subject, obj)
            if label in (RelationLabel.A_IN_B, RelationLabel.B_IN_A):
                if not (
                    obj.x_min < subject.x_min and subject.x_max < obj.x_max
                    and obj.y_min < subject.y_min and subject.y_max < obj.y_max
                ):
                    raise _LayoutFailure(f"{which}: IN pair {pair.as_tuple()} not strictly contained")
            else:
                if not 0.2 <= frac < 0.9:
                    raise _LayoutFailure(
                        f"{which}: ON pair {pair.as_tuple()} containment {frac:.3f} out of range"
                    )
        ids = sorted(dets)
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                pair = PairCandidate.of(ids[i], ids[j])
                if pair not in relations and iou(dets[ids[i]].bbox, dets[ids[j]].bbox) > 0:
                    raise _LayoutFailure(
                        f"{which}: incidental overlap between {ids[i]} and {ids[j]}"
                    )


# -- dataset output -----------------------------------------------------------


def serialize_truth(sample: ScenePairSample) -> str:
    doc = json.loads(serialize_tasks(sample.truth_tasks))
    doc["relations"] = {
        which: [
            {"a": pair.a_id, "b": pair.b_id, "label": label.value}
            for pair, label in sorted(
                sample.truth_relations.for_scene(which).items(),
                key=lambda kv: kv[0].as_tuple(),
            )
        ]
        for which in ("initial", "final")
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_truth(text: str) -> tuple[list[PickPlaceTask], TruthRelations]:
    tasks = parse_tasks(text)
    try:
        doc = json.loads(text)
        rel = doc.get("relations", {"initial": [], "final": []})
        maps = {}
        for which in ("initial", "final"):
            maps[which] = {
                PairCandidate(rec["a"], rec["b"]): RelationLabel(rec["label"])
                for rec in rel.get(which, [])
            }
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneParseError(f"invalid truth relations: {exc}") from exc
    return tasks, TruthRelations(maps["initial"], maps["final"])


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _config_dict(config: SimConfig) -> dict:
    return {
        "image_width": config.image_width,
        "image_height": config.image_height,
        "n_objects": list(config.n_objects),
        "n_tasks": list(config.n_tasks),
        "kind_probs": list(config.kind_probs),
        "jitter_px": config.jitter_px,
        "detectability": config.detectability,
        "seed": config.seed,
        "mode": config.mode,
        "classes": list(config.classes),
        "class_weights": list(config.class_weights) if config.class_weights else None,
    }


def _emit_sample(config: SimConfig, k: int, out_dir: str, render: bool, emit_crops: bool):
    """Worker for one sample; returns (manifest entry, crop rows)."""
    out = Path(out_dir)
    sample = generate_scene_pair(config, k, render=render or emit_crops)
    sample_dir = out / f"sample_{k}"
    sample_dir.mkdir(parents=True, exist_ok=True)
    files: dict[str, str] = {}

    def emit(name: str, data: str | bytes):
        raw = data.encode("utf-8") if isinstance(data, str) else data
        files[name] = _sha256(raw)
        write_atomic(sample_dir / name, data)

    emit("initial.json", serialize_scene(sample.pair.initial))
    emit("final.json", serialize_scene(sample.pair.final))
    emit("truth.json", serialize_truth(sample))
    if render:
        emit("initial.png", png_bytes(sample.images[0]))
        emit("final.png", png_bytes(sample.images[1]))

    crop_rows: list[tuple] = []
    if emit_crops:
        crop_rows = _emit_crops_for_sample(config, k, sample, out)
    entry = {"dir": f"sample_{k}", "files": files}
    return entry, crop_rows


def _emit_crops_for_sample(config: SimConfig, k: int, sample: ScenePairSample, out: Path):
    """Write per-pair training crops: every related pair plus a few unrelated ones."""
    rng = np.random.default_rng([config.seed, k, 1])
    crops_dir = out / "crops"
    crops_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for which, image in zip(("initial", "final"), sample.images):
        scene = getattr(sample.pair, which)
        relations = sample.truth_relations.for_scene(which)
        ids = sorted(d.id for d in scene.detections)
        all_pairs = [
            PairCandidate.of(ids[i], ids[j])
            for i in range(len(ids))
            for j in range(i + 1, len(ids))
        ]
        # Keep the label mix trainable: roughly one unrelated crop per
        # related one (at least one per scene).
        unrelated = [p for p in all_pairs if p not in relations]
        cap = max(1, len(relations))
        if len(unrelated) > cap:
            sel = rng.choice(len(unrelated), size=cap, replace=False)
            unrelated = [unrelated[i] for i in sorted(sel)]
        chosen = [(p, relations[p]) for p in sorted(relations, key=PairCandidate.as_tuple)]
        chosen += [(p, RelationLabel.UNRELATED) for p in unrelated]
        for pair, label in chosen:
            det_a, det_b = scene.get(pair.a_id), scene.get(pair.b_id)
            inp = build_classifier_input(image, det_a, det_b)
            name = f"{k}_{pair.a_id}+{pair.b_id}_{which}.png"
            write_atomic(crops_dir / name, png_bytes(inp.rgb))
            rows.append(
                (
                    f"crops/{name}",
                    _fmt_box(inp.bbox_a),
                    _fmt_box(inp.bbox_b),
                    label.value,
                )
            )
    return rows


def _fmt_box(box: BoundingBox) -> str:
    return " ".join(f"{v:.3f}" for v in box.as_tuple())


def generate_dataset(
    config: SimConfig,
    n: int,
    out_dir: str | Path,
    *,
    render: bool = False,
    emit_crops: bool = False,
    jobs: int = 1,
) -> dict:
    """Write n samples plus a manifest; returns the manifest dict.

    Layout: ``sample_<k>/{initial,final}.json, truth.json`` (+ PNGs with
    render), ``crops/*.png`` + ``crops/labels.csv`` with emit_crops, and
    ``manifest.json`` hashing every emitted file.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    if jobs > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(_emit_sample, config, k, str(out), render, emit_crops)
                for k in range(n)
            ]
            results = [f.result() for f in futures]
    else:
        results = [_emit_sample(config, k, str(out), render, emit_crops) for k in range(n)]

    manifest: dict = {"config": _config_dict(config), "n": n, "samples": [r[0] for r in results]}
    crop_rows = [row for r in results for row in r[1]]
    if emit_crops:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["file", "bbox_a", "bbox_b", "label"])
        writer.writerows(crop_rows)
        labels_csv = buf.getvalue()
        (out / "crops").mkdir(parents=True, exist_ok=True)
        write_atomic(out / "crops" / "labels.csv", labels_csv)
        manifest["crops"] = {
            "count": len(crop_rows),
            "labels": "crops/labels.csv",
            "labels_sha256": _sha256(labels_csv.encode("utf-8")),
        }
    write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
