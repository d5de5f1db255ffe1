"""Relation-transition pick-and-place inference.

Every candidate pair (non-zero IoU in either scene) is classified in both
scenes; a label change yields a task. The final scene has authority: a final
IN/ON relation names the placement, while a final UNRELATED after an initial
relation means the subject was picked and placed out of the object.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boxes import iou
from .geometric import GeoConfig, match_objects
from .relation import PairCandidate, RelationClassifier, RelationLabel, candidate_pairs
from .scene import Method, PickPlaceTask, Scene, ScenePair, TaskKind


@dataclass(frozen=True)
class PairTransition:
    pair: PairCandidate
    initial_rel: RelationLabel
    final_rel: RelationLabel


@dataclass
class TransitionDiagnostics:
    transitions: list[PairTransition] = field(default_factory=list)
    skipped_pairs: list[tuple[str, str]] = field(default_factory=list)
    appeared: list[str] = field(default_factory=list)
    disappeared: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "transitions": [
                {
                    "a": t.pair.a_id,
                    "b": t.pair.b_id,
                    "initial": t.initial_rel.value,
                    "final": t.final_rel.value,
                }
                for t in self.transitions
            ],
            "skipped_pairs": [list(p) for p in self.skipped_pairs],
            "appeared": self.appeared,
            "disappeared": self.disappeared,
        }


def relation_for_pair(
    scene: Scene,
    image: np.ndarray | None,
    pair: PairCandidate,
    classifier: RelationClassifier,
) -> RelationLabel:
    """Label one pair in one scene; zero overlap short-circuits to UNRELATED."""
    det_a = scene.get(pair.a_id)
    det_b = scene.get(pair.b_id)
    if iou(det_a.bbox, det_b.bbox) == 0.0:
        return RelationLabel.UNRELATED
    return classifier.classify(scene, image, det_a, det_b)


def task_for_transition(
    initial_rel: RelationLabel, final_rel: RelationLabel, a_id: str, b_id: str
) -> PickPlaceTask | None:
    """Map one pair's (initial, final) labels to a task, or None for no change.

    The final relation decides placements; a transition into UNRELATED is a
    removal of the initial subject from the initial object.
    """
    if initial_rel == final_rel:
        return None
    if final_rel is not RelationLabel.UNRELATED:
        subject, obj = _subject_object(final_rel, a_id, b_id)
        kind = (
            TaskKind.IN
            if final_rel in (RelationLabel.A_IN_B, RelationLabel.B_IN_A)
            else TaskKind.ON
        )
        return PickPlaceTask(subject, obj, kind, Method.TRANSITION)
    subject, obj = _subject_object(initial_rel, a_id, b_id)
    return PickPlaceTask(subject, obj, TaskKind.REMOVED, Method.TRANSITION)


def _subject_object(rel: RelationLabel, a_id: str, b_id: str) -> tuple[str, str]:
    if rel in (RelationLabel.A_IN_B, RelationLabel.A_ON_B):
        return a_id, b_id
    if rel in (RelationLabel.B_IN_A, RelationLabel.B_ON_A):
        return b_id, a_id
    raise ValueError(f"relation {rel} has no subject")


def infer_tasks_transition(
    pair: ScenePair,
    images: tuple[np.ndarray, np.ndarray] | None,
    classifier: RelationClassifier,
    geo_config: GeoConfig = GeoConfig(),
    diagnostics: TransitionDiagnostics | None = None,
) -> list[PickPlaceTask]:
    """Classify every candidate pair in both scenes and emit tasks for changes.

    The candidate universe is the union of both scenes' non-zero-IoU pairs,
    with objects matched across scenes by class and proximity. Pairs whose
    members appeared or disappeared are skipped (reported in diagnostics).
    Emitted tasks reference final-scene ids.
    """
    image_initial = images[0] if images else None
    image_final = images[1] if images else None
    matches, appeared, disappeared = match_objects(pair, geo_config)
    final_by_initial = {m.initial_id: m.final_id for m in matches}
    initial_by_final = {m.final_id: m.initial_id for m in matches}
    if diagnostics is not None:
        diagnostics.appeared = appeared
        diagnostics.disappeared = disappeared

    universe: set[PairCandidate] = set(candidate_pairs(pair.final))
    for cand in candidate_pairs(pair.initial):
        fa = final_by_initial.get(cand.a_id)
        fb = final_by_initial.get(cand.b_id)
        if fa is None or fb is None:
            if diagnostics is not None:
                diagnostics.skipped_pairs.append(cand.as_tuple())
            continue
        universe.add(PairCandidate.of(fa, fb))

    tasks: list[PickPlaceTask] = []
    for cand in sorted(universe, key=PairCandidate.as_tuple):
        ia = initial_by_final.get(cand.a_id)
        ib = initial_by_final.get(cand.b_id)
        if ia is None or ib is None:
            if diagnostics is not None:
                diagnostics.skipped_pairs.append(cand.as_tuple())
            continue
        final_rel = relation_for_pair(pair.final, image_final, cand, classifier)
        initial_cand = PairCandidate.of(ia, ib)
        initial_rel = relation_for_pair(pair.initial, image_initial, initial_cand, classifier)
        if initial_cand.a_id != ia:
            # The initial-scene canonical order flips the pair: re-express the
            # label in the final pair's (A, B) orientation.
            initial_rel = initial_rel.swapped()
        if diagnostics is not None:
            diagnostics.transitions.append(PairTransition(cand, initial_rel, final_rel))
        task = task_for_transition(initial_rel, final_rel, cand.a_id, cand.b_id)
        if task is not None:
            tasks.append(task)
    return sorted(tasks, key=PickPlaceTask.key)
