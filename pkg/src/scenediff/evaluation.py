"""Scoring of predicted task sets against ground truth.

Every candidate pair is assigned a 3-way class in both the prediction and
the truth: class 0 when the pair's canonical-first object was picked onto
or into the second, class 1 for the opposite direction, class 2 when the
pair carries no task. REMOVED tasks fold into the direction classes; a
separate removal tally is reported alongside.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import SceneParseError
from .geometric import GeoConfig, match_objects
from .relation import RELATION_ORDER, PairCandidate, RelationLabel, candidate_pairs
from .scene import PickPlaceTask, ScenePair, TaskKind
from .sceneio import load_scene, load_tasks

NO_TASK = 2


@dataclass(frozen=True)
class PairOutcome:
    pair: PairCandidate
    predicted_class: int
    truth_class: int

    def __post_init__(self):
        for v in (self.predicted_class, self.truth_class):
            if v not in (0, 1, 2):
                raise ValueError(f"pair class must be 0, 1, or 2, got {v}")


@dataclass
class EvaluationReport:
    confusion: np.ndarray  # 3x3, rows = truth, cols = predicted
    accuracy: float
    precision: dict[int, float | None]
    recall: dict[int, float | None]
    n_pairs: int

    def to_dict(self) -> dict:
        return {
            "confusion": self.confusion.tolist(),
            "accuracy": self.accuracy,
            "per_class": {
                str(c): {"precision": self.precision[c], "recall": self.recall[c]}
                for c in (0, 1, 2)
            },
            "n_pairs": self.n_pairs,
        }


def task_class(task: PickPlaceTask, pair: PairCandidate) -> int:
    """0 when the pair's first member is the picked object, else 1."""
    return 0 if task.picked_id == pair.a_id else 1


def _tasks_by_pair(
    tasks: list[PickPlaceTask], universe: set[PairCandidate], who: str
) -> dict[PairCandidate, PickPlaceTask]:
    out: dict[PairCandidate, PickPlaceTask] = {}
    for task in tasks:
        pair = PairCandidate.of(task.picked_id, task.target_id)
        if pair not in universe:
            raise ValueError(
                f"{who} task {task.picked_id}->{task.target_id} references a pair "
                f"outside the evaluation universe"
            )
        if pair in out:
            raise ValueError(f"{who} tasks contain pair {pair.as_tuple()} twice")
        out[pair] = task
    return out


def pair_outcomes(
    predicted: list[PickPlaceTask],
    truth: list[PickPlaceTask],
    universe: list[PairCandidate],
) -> list[PairOutcome]:
    """Classify every universe pair in both task sets."""
    uni = set(universe)
    pred_by = _tasks_by_pair(predicted, uni, "predicted")
    truth_by = _tasks_by_pair(truth, uni, "truth")
    outcomes = []
    for pair in sorted(uni, key=PairCandidate.as_tuple):
        p = pred_by.get(pair)
        t = truth_by.get(pair)
        outcomes.append(
            PairOutcome(
                pair,
                task_class(p, pair) if p else NO_TASK,
                task_class(t, pair) if t else NO_TASK,
            )
        )
    return outcomes


def compute_report(outcomes: list[PairOutcome]) -> EvaluationReport:
    """Confusion matrix, accuracy, and per-class precision/recall.

    Ratios with a zero denominator are reported as None rather than 0.
    """
    if not outcomes:
        raise ValueError("cannot evaluate an empty outcome list")
    confusion = np.zeros((3, 3), dtype=np.int64)
    for o in outcomes:
        confusion[o.truth_class, o.predicted_class] += 1
    total = int(confusion.sum())
    accuracy = float(np.trace(confusion)) / total
    precision: dict[int, float | None] = {}
    recall: dict[int, float | None] = {}
    for c in (0, 1, 2):
        tp = int(confusion[c, c])
        pred_c = int(confusion[:, c].sum())
        truth_c = int(confusion[c, :].sum())
        precision[c] = tp / pred_c if pred_c else None
        recall[c] = tp / truth_c if truth_c else None
    return EvaluationReport(confusion, accuracy, precision, recall, total)


def relation_confusion(
    predicted: dict[PairCandidate, RelationLabel],
    truth: dict[PairCandidate, RelationLabel],
) -> np.ndarray:
    """5x5 counts over the union of both maps' pairs (rows = truth).

    Pairs missing from one side count as UNRELATED there.
    """
    index = {label: i for i, label in enumerate(RELATION_ORDER)}
    counts = np.zeros((5, 5), dtype=np.int64)
    for pair in set(predicted) | set(truth):
        t = truth.get(pair, RelationLabel.UNRELATED)
        p = predicted.get(pair, RelationLabel.UNRELATED)
        counts[index[t], index[p]] += 1
    return counts


def removal_stats(predicted: list[PickPlaceTask], truth: list[PickPlaceTask]) -> dict:
    """How many ground-truth removals were predicted as removals of the same object."""
    truth_removed = {
        (t.picked_id, t.target_id) for t in truth if t.kind is TaskKind.REMOVED
    }
    pred_removed = {
        (t.picked_id, t.target_id) for t in predicted if t.kind is TaskKind.REMOVED
    }
    n_correct = len(truth_removed & pred_removed)
    return {
        "n_truth": len(truth_removed),
        "n_predicted": len(pred_removed),
        "n_correct": n_correct,
        "accuracy": n_correct / len(truth_removed) if truth_removed else None,
    }


def _predicted_by_pair(predicted: list[PickPlaceTask]) -> dict[PairCandidate, PickPlaceTask]:
    return {PairCandidate.of(t.picked_id, t.target_id): t for t in predicted}


def direction_stats(predicted: list[PickPlaceTask], truth: list[PickPlaceTask]) -> dict:
    """Direction accuracy over transitioned pairs: of the pairs carrying a
    ground-truth task, how many predictions picked the same object (a missing
    prediction counts as wrong)."""
    pred_by = _predicted_by_pair(predicted)
    n_correct = 0
    for t in truth:
        p = pred_by.get(PairCandidate.of(t.picked_id, t.target_id))
        if p is not None and p.picked_id == t.picked_id:
            n_correct += 1
    return {
        "n_truth": len(truth),
        "n_correct": n_correct,
        "accuracy": n_correct / len(truth) if truth else None,
    }


def in_on_stats(predicted: list[PickPlaceTask], truth: list[PickPlaceTask]) -> dict:
    """IN-versus-ON accuracy over ground-truth placement tasks: a prediction
    must exist on the pair and carry the same placement kind."""
    pred_by = _predicted_by_pair(predicted)
    placements = [t for t in truth if t.kind in (TaskKind.IN, TaskKind.ON)]
    n_correct = 0
    for t in placements:
        p = pred_by.get(PairCandidate.of(t.picked_id, t.target_id))
        if p is not None and p.kind is t.kind:
            n_correct += 1
    return {
        "n_truth": len(placements),
        "n_correct": n_correct,
        "accuracy": n_correct / len(placements) if placements else None,
    }


def evaluation_universe(
    pair: ScenePair,
    truth: list[PickPlaceTask],
    geo_config: GeoConfig = GeoConfig(),
) -> list[PairCandidate]:
    """Both scenes' candidate pairs (final-scene ids) plus all truth-task pairs."""
    matches, _, _ = match_objects(pair, geo_config)
    final_by_initial = {m.initial_id: m.final_id for m in matches}
    universe: set[PairCandidate] = set(candidate_pairs(pair.final))
    for cand in candidate_pairs(pair.initial):
        fa = final_by_initial.get(cand.a_id)
        fb = final_by_initial.get(cand.b_id)
        if fa is not None and fb is not None:
            universe.add(PairCandidate.of(fa, fb))
    for task in truth:
        universe.add(PairCandidate.of(task.picked_id, task.target_id))
    return sorted(universe, key=PairCandidate.as_tuple)


def _sum_stats(stats: list[dict]) -> dict:
    """Reduce per-sample count dicts; accuracy is recomputed from the totals."""
    out = {k: sum(s[k] for s in stats) for k in stats[0] if k != "accuracy"}
    out["accuracy"] = out["n_correct"] / out["n_truth"] if out["n_truth"] else None
    return out


def _load_predicted(pred_dir: Path, sample_name: str):
    """Accept either <pred>/<sample>.json or <pred>/<sample>/tasks.json."""
    flat = pred_dir / f"{sample_name}.json"
    nested = pred_dir / sample_name / "tasks.json"
    for path in (flat, nested):
        if path.is_file():
            return load_tasks(path), path
    raise SceneParseError(
        f"no prediction for {sample_name}: looked for {flat} and {nested}"
    )


def _relations_from_tasks_file(path: Path) -> dict[str, dict[PairCandidate, RelationLabel]] | None:
    doc = json.loads(path.read_text(encoding="utf-8"))
    rel = doc.get("relations")
    if rel is None:
        return None
    out = {}
    for which in ("initial", "final"):
        out[which] = {
            PairCandidate(r["a"], r["b"]): RelationLabel(r["label"]) for r in rel.get(which, [])
        }
    return out


def evaluate_sample(truth_dir: Path, pred_dir: Path, sample_name: str) -> dict:
    from .simulator import parse_truth

    sample_dir = truth_dir / sample_name
    pair = ScenePair(
        load_scene(sample_dir / "initial.json"),
        load_scene(sample_dir / "final.json"),
    )
    truth_tasks, truth_relations = parse_truth(
        (sample_dir / "truth.json").read_text(encoding="utf-8")
    )
    predicted, pred_path = _load_predicted(pred_dir, sample_name)
    universe = evaluation_universe(pair, truth_tasks)
    outcomes = pair_outcomes(predicted, truth_tasks, universe)

    rel_confusion = None
    pred_relations = _relations_from_tasks_file(pred_path)
    if pred_relations is not None:
        rel_confusion = sum(
            relation_confusion(pred_relations[which], truth_relations.for_scene(which))
            for which in ("initial", "final")
        )
    return {
        "sample": sample_name,
        "outcomes": outcomes,
        "removal": removal_stats(predicted, truth_tasks),
        "direction": direction_stats(predicted, truth_tasks),
        "in_on": in_on_stats(predicted, truth_tasks),
        "relation_confusion": rel_confusion,
    }


def evaluate_dirs(truth_dir: str | Path, pred_dir: str | Path, jobs: int = 1) -> dict:
    """Score every sample_* under truth_dir; returns the report document."""
    truth_dir = Path(truth_dir)
    pred_dir = Path(pred_dir)
    names = sorted(
        (p.name for p in truth_dir.glob("sample_*") if p.is_dir()),
        key=lambda n: int(n.split("_")[1]),
    )
    if not names:
        raise SceneParseError(f"no sample_* directories under {truth_dir}")
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(evaluate_sample, truth_dir, pred_dir, n) for n in names]
            per_sample = [f.result() for f in futures]
    else:
        per_sample = [evaluate_sample(truth_dir, pred_dir, n) for n in names]

    all_outcomes = [o for s in per_sample for o in s["outcomes"]]
    report = compute_report(all_outcomes)
    rel_total = None
    if all(s["relation_confusion"] is not None for s in per_sample):
        rel_total = sum(s["relation_confusion"] for s in per_sample)

    doc = report.to_dict()
    doc["n_scene_pairs"] = len(per_sample)
    doc["removal"] = _sum_stats([s["removal"] for s in per_sample])
    # Named equivalents of the usual direction / in-vs-on task splits, with
    # their populations made explicit: direction over all truth-task pairs,
    # in/on over truth placements only.
    doc["direction"] = _sum_stats([s["direction"] for s in per_sample])
    doc["in_on"] = _sum_stats([s["in_on"] for s in per_sample])
    doc["relation_confusion"] = (
        {
            "labels": [label.value for label in RELATION_ORDER],
            "counts": rel_total.tolist(),
        }
        if rel_total is not None
        else None
    )
    doc["samples"] = [
        {
            "sample": s["sample"],
            "outcomes": [
                {
                    "pair": list(o.pair.as_tuple()),
                    "predicted": o.predicted_class,
                    "truth": o.truth_class,
                }
                for o in s["outcomes"]
            ],
        }
        for s in per_sample
    ]
    return doc
