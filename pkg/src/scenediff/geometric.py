"""Geometric pick-and-place inference.

Objects are matched across the two scenes within each class label by
minimum total center displacement. An object counts as moved when its
displacement exceeds a fraction of the image diagonal; a moved object
overlapping another object in the final scene above the IoU threshold
forms a task, and the pair member that traveled farther is the picked one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .boxes import displacement as box_displacement
from .boxes import iou
from .scene import Detection, Method, PickPlaceTask, ScenePair, TaskKind

HUNGARIAN = "hungarian"
GREEDY = "greedy"


@dataclass(frozen=True)
class GeoConfig:
    movement_threshold_frac: float = 0.05
    iou_threshold: float = 0.20
    same_class_matching: str = HUNGARIAN

    def __post_init__(self):
        if not 0.0 < self.movement_threshold_frac < 1.0:
            raise ValueError("movement_threshold_frac must be in (0, 1)")
        if not 0.0 < self.iou_threshold < 1.0:
            raise ValueError("iou_threshold must be in (0, 1)")
        if self.same_class_matching not in (HUNGARIAN, GREEDY):
            raise ValueError(f"unknown matching strategy {self.same_class_matching!r}")


@dataclass(frozen=True)
class ObjectMatch:
    """Correspondence between one initial and one final detection of the same class."""

    initial_id: str
    final_id: str
    displacement_px: float


@dataclass
class GeometricDiagnostics:
    matches: list[ObjectMatch] = field(default_factory=list)
    appeared: list[str] = field(default_factory=list)
    disappeared: list[str] = field(default_factory=list)
    moved: list[str] = field(default_factory=list)
    candidates: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "matches": [
                {"initial": m.initial_id, "final": m.final_id, "displacement_px": m.displacement_px}
                for m in self.matches
            ],
            "appeared": self.appeared,
            "disappeared": self.disappeared,
            "moved": self.moved,
            "candidates": self.candidates,
        }


def movement_threshold_px(pair: ScenePair, config: GeoConfig) -> float:
    diag = math.hypot(pair.initial.image_width, pair.initial.image_height)
    return config.movement_threshold_frac * diag


def match_objects(
    pair: ScenePair, config: GeoConfig = GeoConfig()
) -> tuple[list[ObjectMatch], list[str], list[str]]:
    """Match same-class detections across the pair.

    Returns (matches, appeared_final_ids, disappeared_initial_ids). Matches
    minimize the total center displacement within each class; leftovers on
    the final side are `appeared`, on the initial side `disappeared`.
    """
    by_class_initial: dict[str, list[Detection]] = {}
    by_class_final: dict[str, list[Detection]] = {}
    for det in pair.initial.detections:
        by_class_initial.setdefault(det.label, []).append(det)
    for det in pair.final.detections:
        by_class_final.setdefault(det.label, []).append(det)

    matches: list[ObjectMatch] = []
    appeared: list[str] = []
    disappeared: list[str] = []
    for label in sorted(set(by_class_initial) | set(by_class_final)):
        init = by_class_initial.get(label, [])
        fin = by_class_final.get(label, [])
        if not init:
            appeared.extend(d.id for d in fin)
            continue
        if not fin:
            disappeared.extend(d.id for d in init)
            continue
        cost = [[box_displacement(a.bbox, b.bbox) for b in fin] for a in init]
        if config.same_class_matching == HUNGARIAN:
            assigned = _assign_hungarian(cost)
        else:
            assigned = _assign_greedy(cost)
        taken_rows = {r for r, _ in assigned}
        taken_cols = {c for _, c in assigned}
        for r, c in sorted(assigned):
            matches.append(ObjectMatch(init[r].id, fin[c].id, cost[r][c]))
        disappeared.extend(init[r].id for r in range(len(init)) if r not in taken_rows)
        appeared.extend(fin[c].id for c in range(len(fin)) if c not in taken_cols)
    return matches, sorted(appeared), sorted(disappeared)


def _assign_hungarian(cost: list[list[float]]) -> list[tuple[int, int]]:
    import numpy as np
    from scipy.optimize import linear_sum_assignment

    rows, cols = linear_sum_assignment(np.asarray(cost))
    return list(zip(rows.tolist(), cols.tolist()))


def _assign_greedy(cost: list[list[float]]) -> list[tuple[int, int]]:
    """Repeatedly take the globally cheapest remaining (row, col) pair."""
    cells = sorted(
        ((cost[r][c], r, c) for r in range(len(cost)) for c in range(len(cost[0]))),
    )
    used_r: set[int] = set()
    used_c: set[int] = set()
    out: list[tuple[int, int]] = []
    for _, r, c in cells:
        if r in used_r or c in used_c:
            continue
        used_r.add(r)
        used_c.add(c)
        out.append((r, c))
    return out


def moved_objects(
    matches: list[ObjectMatch], pair: ScenePair, config: GeoConfig = GeoConfig()
) -> list[ObjectMatch]:
    """Matches whose displacement strictly exceeds the movement threshold."""
    threshold = movement_threshold_px(pair, config)
    return [m for m in matches if m.displacement_px > threshold]


def infer_tasks_geometric(
    pair: ScenePair,
    config: GeoConfig = GeoConfig(),
    diagnostics: GeometricDiagnostics | None = None,
) -> list[PickPlaceTask]:
    """Derive pick-and-place tasks from movement plus final-scene overlap.

    Tasks are always reported with kind ON: overlap alone cannot separate
    "in" from "on". Appeared/disappeared objects never take part; tasks
    reference final-scene detection ids.
    """
    matches, appeared, disappeared = match_objects(pair, config)
    moved = moved_objects(matches, pair, config)
    if diagnostics is not None:
        diagnostics.matches = matches
        diagnostics.appeared = appeared
        diagnostics.disappeared = disappeared
        diagnostics.moved = [m.final_id for m in moved]

    disp_by_final = {m.final_id: m.displacement_px for m in matches}
    final_dets = {m.final_id: pair.final.get(m.final_id) for m in matches}

    emitted: dict[tuple[str, str], PickPlaceTask] = {}
    for mover in moved:
        det_m = final_dets[mover.final_id]
        for other_id, det_o in final_dets.items():
            if other_id == mover.final_id:
                continue
            key = tuple(sorted((mover.final_id, other_id)))
            if key in emitted:
                continue
            overlap = iou(det_m.bbox, det_o.bbox)
            if overlap <= config.iou_threshold:
                continue
            # Larger displacement means picked; deterministic id tie-break.
            d_m = disp_by_final[mover.final_id]
            d_o = disp_by_final[other_id]
            if (d_m, other_id) > (d_o, mover.final_id):
                picked, target = mover.final_id, other_id
            else:
                picked, target = other_id, mover.final_id
            emitted[key] = PickPlaceTask(picked, target, TaskKind.ON, Method.GEOMETRIC)
            if diagnostics is not None:
                diagnostics.candidates.append(
                    {"picked": picked, "target": target, "iou": overlap}
                )
    return sorted(emitted.values(), key=PickPlaceTask.key)
