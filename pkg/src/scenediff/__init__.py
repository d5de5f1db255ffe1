"""scenediff: pick-and-place task inference from initial/final scene detections."""

from .boxes import BoundingBox, center, displacement, iou, union_box
from .errors import (
    GenerationError,
    PluginError,
    PluginProtocolError,
    SceneDiffError,
    SceneParseError,
)
from .geometric import GeoConfig, ObjectMatch, infer_tasks_geometric, match_objects, moved_objects
from .relation import (
    ClassifierInput,
    HeuristicClassifier,
    HeuristicConfig,
    PairCandidate,
    RelationClassifier,
    RelationLabel,
    build_classifier_input,
    candidate_pairs,
    heuristic_classify,
)
from .scene import (
    DEFAULT_CLASSES,
    Detection,
    Method,
    PickPlaceTask,
    Scene,
    ScenePair,
    TaskKind,
)
from .sceneio import load_scene, load_tasks, parse_scene, parse_tasks, serialize_scene, serialize_tasks
from .simulator import (
    OracleClassifier,
    ScenePairSample,
    SimConfig,
    generate_dataset,
    generate_scene_pair,
    oracle_classifier,
)
from .transition import infer_tasks_transition, relation_for_pair, task_for_transition

__version__ = "0.1.0"

__all__ = [
    "BoundingBox",
    "ClassifierInput",
    "DEFAULT_CLASSES",
    "Detection",
    "GenerationError",
    "GeoConfig",
    "HeuristicClassifier",
    "HeuristicConfig",
    "Method",
    "ObjectMatch",
    "OracleClassifier",
    "PairCandidate",
    "PickPlaceTask",
    "PluginError",
    "PluginProtocolError",
    "RelationClassifier",
    "RelationLabel",
    "Scene",
    "SceneDiffError",
    "ScenePair",
    "ScenePairSample",
    "SceneParseError",
    "SimConfig",
    "TaskKind",
    "build_classifier_input",
    "candidate_pairs",
    "center",
    "displacement",
    "generate_dataset",
    "generate_scene_pair",
    "heuristic_classify",
    "infer_tasks_geometric",
    "infer_tasks_transition",
    "iou",
    "load_scene",
    "load_tasks",
    "match_objects",
    "moved_objects",
    "oracle_classifier",
    "parse_scene",
    "parse_tasks",
    "relation_for_pair",
    "serialize_scene",
    "serialize_tasks",
    "task_for_transition",
    "union_box",
]
