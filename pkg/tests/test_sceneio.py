import json

import pytest

from conftest import box, det, scene
from scenediff.errors import SceneParseError
from scenediff.scene import Detection, Method, PickPlaceTask, Scene, ScenePair, TaskKind
from scenediff.sceneio import (
    DETECTOR_TXT,
    parse_scene,
    parse_tasks,
    serialize_scene,
    serialize_tasks,
)


class TestSceneModel:
    def test_duplicate_ids_rejected(self):
        d = det("cup-0", box(0, 0, 10, 10))
        with pytest.raises(ValueError, match="duplicate"):
            Scene(640, 480, (d, d))

    def test_bbox_outside_image_rejected(self):
        d = det("cup-0", box(0, 0, 700, 10))
        with pytest.raises(ValueError, match="outside"):
            Scene(640, 480, (d,))

    def test_confidence_range(self):
        with pytest.raises(ValueError):
            Detection("cup-0", "cup", 1.5, box(0, 0, 10, 10))

    def test_pair_dimension_mismatch(self):
        a = scene(width=640, height=480)
        b = scene(width=320, height=480)
        with pytest.raises(ValueError):
            ScenePair(a, b)

    def test_task_self_reference_rejected(self):
        with pytest.raises(ValueError):
            PickPlaceTask("a", "a", TaskKind.ON, Method.GEOMETRIC)

    def test_geometric_removed_rejected(self):
        with pytest.raises(ValueError):
            PickPlaceTask("a", "b", TaskKind.REMOVED, Method.GEOMETRIC)


class TestSceneJson:
    def test_round_trip(self):
        s = scene(det("cup-0", box(1.5, 2.25, 30, 40)), det("bowl-0", box(100, 100, 200, 180)))
        assert parse_scene(serialize_scene(s)) == s

    def test_round_trip_random_scenes(self):
        import numpy as np

        rng = np.random.default_rng(17)
        for _ in range(30):
            dets = []
            for i in range(int(rng.integers(0, 7))):
                x0 = float(rng.uniform(0, 600))
                y0 = float(rng.uniform(0, 440))
                dets.append(det(
                    f"obj-{i}",
                    box(x0, y0, x0 + float(rng.uniform(0.5, 39)), y0 + float(rng.uniform(0.5, 39))),
                    label="obj",
                    confidence=float(rng.uniform(0, 1)),
                ))
            s = scene(*dets)
            assert parse_scene(serialize_scene(s)) == s

    def test_empty_detections(self):
        s = parse_scene('{"image": {"width": 640, "height": 480}, "detections": []}')
        assert s.detections == ()
        assert parse_scene(serialize_scene(s)) == s

    def test_auto_ids_per_class_in_reading_order(self):
        text = json.dumps(
            {
                "image": {"width": 100, "height": 100},
                "detections": [
                    {"class": "cup", "confidence": 0.9, "bbox": [0, 0, 10, 10]},
                    {"class": "bowl", "confidence": 0.9, "bbox": [20, 20, 30, 30]},
                    {"class": "cup", "confidence": 0.9, "bbox": [40, 40, 50, 50]},
                ],
            }
        )
        assert parse_scene(text).ids() == ["cup-0", "bowl-0", "cup-1"]

    def test_auto_id_skips_explicit_collision(self):
        text = json.dumps(
            {
                "image": {"width": 100, "height": 100},
                "detections": [
                    {"id": "cup-0", "class": "cup", "confidence": 0.9, "bbox": [0, 0, 10, 10]},
                    {"class": "cup", "confidence": 0.9, "bbox": [40, 40, 50, 50]},
                ],
            }
        )
        assert parse_scene(text).ids() == ["cup-0", "cup-1"]

    def test_out_of_bounds_boxes_clamped(self):
        text = json.dumps(
            {
                "image": {"width": 100, "height": 100},
                "detections": [
                    {"id": "cup-0", "class": "cup", "confidence": 0.9, "bbox": [-5, -5, 10, 10]}
                ],
            }
        )
        assert parse_scene(text).get("cup-0").bbox == box(0, 0, 10, 10)

    def test_zero_area_after_clamp_names_detection(self):
        text = json.dumps(
            {
                "image": {"width": 100, "height": 100},
                "detections": [
                    {"id": "cup-0", "class": "cup", "confidence": 0.9, "bbox": [200, 200, 300, 300]}
                ],
            }
        )
        with pytest.raises(SceneParseError, match="cup"):
            parse_scene(text)

    def test_malformed_record_names_position(self):
        text = json.dumps(
            {
                "image": {"width": 100, "height": 100},
                "detections": [{"class": "cup", "confidence": 0.9, "bbox": [0, 0, 10]}],
            }
        )
        with pytest.raises(SceneParseError, match="detection #0"):
            parse_scene(text)

    def test_not_json(self):
        with pytest.raises(SceneParseError):
            parse_scene("not json at all")


class TestDetectorTxt:
    def test_denormalizes_center_size(self):
        # Class index 8 is "cup" in the default list; 640x480 image.
        s = parse_scene("8 0.5 0.5 0.25 0.25", DETECTOR_TXT, image_size=(640, 480))
        d = s.get("cup-0")
        assert d.label == "cup"
        assert d.bbox == box(240, 180, 400, 300)

    def test_multiple_lines_and_blank_lines(self):
        text = "8 0.5 0.5 0.25 0.25\n\n7 0.25 0.25 0.2 0.2\n"
        s = parse_scene(text, DETECTOR_TXT, image_size=(640, 480))
        assert s.ids() == ["cup-0", "bowl-0"]

    def test_bad_field_count_names_line(self):
        with pytest.raises(SceneParseError, match="line 2"):
            parse_scene("8 0.5 0.5 0.25 0.25\n8 0.5 0.5 0.25", DETECTOR_TXT, image_size=(640, 480))

    def test_class_index_out_of_range(self):
        with pytest.raises(SceneParseError, match="class index 11"):
            parse_scene("11 0.5 0.5 0.25 0.25", DETECTOR_TXT, image_size=(640, 480))

    def test_custom_class_names(self):
        s = parse_scene("1 0.5 0.5 0.5 0.5", DETECTOR_TXT, image_size=(100, 100),
                        class_names=["widget", "gadget"])
        assert s.get("gadget-0").label == "gadget"

    def test_requires_image_size(self):
        with pytest.raises(SceneParseError, match="dimensions"):
            parse_scene("8 0.5 0.5 0.25 0.25", DETECTOR_TXT)


class TestTasksJson:
    def test_empty_list(self):
        text = serialize_tasks([])
        assert json.loads(text) == {"tasks": []}
        assert parse_tasks(text) == []

    def test_single_task_has_all_fields(self):
        task = PickPlaceTask("spoon-0", "bowl-0", TaskKind.ON, Method.GEOMETRIC)
        rec = json.loads(serialize_tasks([task]))["tasks"][0]
        assert rec == {"picked": "spoon-0", "target": "bowl-0", "kind": "on", "method": "geometric"}

    def test_permutations_serialize_identically(self):
        tasks = [
            PickPlaceTask("spoon-0", "bowl-0", TaskKind.ON, Method.TRANSITION),
            PickPlaceTask("cup-0", "plate-0", TaskKind.IN, Method.TRANSITION),
            PickPlaceTask("cup-0", "pan-0", TaskKind.REMOVED, Method.TRANSITION),
        ]
        assert serialize_tasks(tasks) == serialize_tasks(list(reversed(tasks)))

    def test_round_trip(self):
        tasks = [
            PickPlaceTask("spoon-0", "bowl-0", TaskKind.ON, Method.GEOMETRIC),
            PickPlaceTask("cup-0", "plate-0", TaskKind.IN, Method.TRUTH),
        ]
        assert parse_tasks(serialize_tasks(tasks)) == sorted(tasks, key=PickPlaceTask.key)

    def test_bad_kind_rejected(self):
        with pytest.raises(SceneParseError, match="task #0"):
            parse_tasks('{"tasks": [{"picked": "a", "target": "b", "kind": "x", "method": "geometric"}]}')
