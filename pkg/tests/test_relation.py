import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import box, det, scene
from oracles import overlapping_pairs_bruteforce, rasterized_area
from scenediff.relation import (
    HeuristicConfig,
    PairCandidate,
    RelationLabel,
    build_classifier_input,
    candidate_pairs,
    heuristic_classify,
)


class TestPairCandidate:
    def test_canonical_order_enforced(self):
        with pytest.raises(ValueError):
            PairCandidate("z", "a")
        assert PairCandidate.of("z", "a") == PairCandidate("a", "z")

    def test_distinct_ids_required(self):
        with pytest.raises(ValueError):
            PairCandidate.of("a", "a")


class TestCandidatePairs:
    def test_disjoint_scene_empty(self):
        s = scene(
            det("cup-0", box(0, 0, 20, 20)),
            det("bowl-0", box(100, 100, 140, 140)),
            det("fork-0", box(300, 300, 360, 320)),
        )
        assert candidate_pairs(s) == []

    def test_containment_counts_as_overlap(self):
        s = scene(
            det("spoon-0", box(210, 210, 260, 225)),
            det("cup-0", box(200, 200, 280, 280)),
        )
        assert candidate_pairs(s) == [PairCandidate("cup-0", "spoon-0")]

    def test_four_mutually_overlapping(self):
        s = scene(
            det("a-0", box(0, 0, 100, 100)),
            det("b-0", box(50, 50, 150, 150)),
            det("c-0", box(60, 10, 160, 110)),
            det("d-0", box(10, 60, 110, 160)),
        )
        assert len(candidate_pairs(s)) == 6

    def test_matches_bruteforce_on_random_scenes(self):
        rng = np.random.default_rng(99)
        for _ in range(50):
            dets = []
            for i in range(int(rng.integers(2, 8))):
                x0 = float(rng.uniform(0, 560))
                y0 = float(rng.uniform(0, 400))
                dets.append(det(f"obj-{i}", box(x0, y0, x0 + float(rng.uniform(5, 80)),
                                                y0 + float(rng.uniform(5, 80))), label="obj"))
            s = scene(*dets)
            got = {p.as_tuple() for p in candidate_pairs(s)}
            assert got == overlapping_pairs_bruteforce(s)


def _gray_image(w=640, h=480):
    return np.full((h, w, 3), 128, dtype=np.uint8)


class TestClassifierInput:
    def test_unit_example_counts(self):
        # Boxes (0,0,4,4) and (2,2,6,6): 6x6 crop, 16 pixels per mask,
        # both masks set on the 2x2 overlap.
        a = det("a-0", box(0, 0, 4, 4))
        b = det("b-0", box(2, 2, 6, 6))
        inp = build_classifier_input(_gray_image(), a, b)
        assert (inp.width, inp.height) == (6, 6)
        assert int(inp.mask_a.sum()) == 16 == rasterized_area((0, 0, 4, 4), 6, 6)
        assert int(inp.mask_b.sum()) == 16 == rasterized_area((2, 2, 6, 6), 6, 6)
        assert int((inp.mask_a & inp.mask_b).sum()) == 4

    def test_identical_boxes_identical_masks(self):
        a = det("a-0", box(10, 10, 30, 30))
        b = det("b-0", box(10, 10, 30, 30))
        inp = build_classifier_input(_gray_image(), a, b)
        assert np.array_equal(inp.mask_a, inp.mask_b)

    def test_disjoint_boxes_leave_gap_unmasked(self):
        a = det("a-0", box(0, 0, 10, 10))
        b = det("b-0", box(40, 40, 50, 50))
        inp = build_classifier_input(_gray_image(), a, b)
        assert not (inp.mask_a & inp.mask_b).any()
        # A pixel in the middle of the gap belongs to neither mask.
        assert inp.mask_a[25, 25] == 0 and inp.mask_b[25, 25] == 0

    def test_mask_counts_match_pixel_oracle_on_fractional_boxes(self):
        rng = np.random.default_rng(5)
        img = _gray_image(120, 90)
        for _ in range(25):
            x0, y0 = float(rng.uniform(0, 80)), float(rng.uniform(0, 60))
            a = det("a-0", box(x0, y0, x0 + float(rng.uniform(3, 30)), y0 + float(rng.uniform(3, 25))))
            x0, y0 = float(rng.uniform(0, 80)), float(rng.uniform(0, 60))
            b = det("b-0", box(x0, y0, x0 + float(rng.uniform(3, 30)), y0 + float(rng.uniform(3, 25))))
            inp = build_classifier_input(img, a, b)
            ax = inp.bbox_a.as_tuple()
            assert int(inp.mask_a.sum()) == rasterized_area(ax, inp.width, inp.height)

    def test_crop_follows_union_box_rounded_outward(self):
        a = det("a-0", box(10.2, 20.7, 30.1, 40.4))
        b = det("b-0", box(25.5, 18.3, 55.9, 44.0))
        inp = build_classifier_input(_gray_image(), a, b)
        # Union box (10.2, 18.3, 55.9, 44.0) -> floor/ceil -> (10, 18, 56, 44).
        assert (inp.width, inp.height) == (46, 26)

    def test_channel_order_and_content(self):
        img = _gray_image()
        img[:, :, 0] = 10
        img[:, :, 1] = 20
        img[:, :, 2] = 30
        a = det("a-0", box(0, 0, 4, 4))
        b = det("b-0", box(2, 2, 6, 6))
        stacked = build_classifier_input(img, a, b).stacked()
        assert stacked.shape == (5, 6, 6)
        assert np.allclose(stacked[0], 10 / 255)
        assert np.allclose(stacked[1], 20 / 255)
        assert np.allclose(stacked[2], 30 / 255)
        assert set(np.unique(stacked[3])) <= {0.0, 1.0}

    def test_degenerate_crop_rejected(self):
        a = det("a-0", box(0, 0, 0.4, 0.4))
        b = det("b-0", box(0.2, 0.2, 0.8, 0.8))
        with pytest.raises(ValueError, match="degenerate"):
            build_classifier_input(_gray_image(), a, b)


class TestHeuristic:
    def test_contained_box_is_in(self):
        a = det("a-0", box(2, 2, 4, 4))
        b = det("b-0", box(0, 0, 10, 10))
        assert heuristic_classify(a, b) is RelationLabel.A_IN_B

    def test_small_mutual_overlap_unrelated(self):
        # f_a = f_b = 0.1 < 0.2.
        a = det("a-0", box(0, 0, 10, 10))
        b = det("b-0", box(9, 0, 19, 10))
        assert heuristic_classify(a, b) is RelationLabel.UNRELATED

    def test_half_contained_is_on(self):
        # f_a = 0.5, f_b = 0.1.
        a = det("a-0", box(0, 0, 10, 10))
        b = det("b-0", box(5, 0, 55, 10))
        assert heuristic_classify(a, b) is RelationLabel.A_ON_B

    def test_threshold_configurable(self):
        a = det("a-0", box(0, 0, 10, 10))
        b = det("b-0", box(5, 0, 55, 10))
        cfg = HeuristicConfig(relate_threshold=0.6)
        assert heuristic_classify(a, b, cfg) is RelationLabel.UNRELATED

    @given(
        st.tuples(
            st.floats(0, 50, width=32), st.floats(0, 50, width=32),
            st.floats(1, 60, width=32), st.floats(1, 60, width=32),
        ),
        st.tuples(
            st.floats(0, 50, width=32), st.floats(0, 50, width=32),
            st.floats(1, 60, width=32), st.floats(1, 60, width=32),
        ),
    )
    @settings(max_examples=300)
    def test_swap_consistency(self, raw_a, raw_b):
        a = det("a-0", box(raw_a[0], raw_a[1], raw_a[0] + raw_a[2], raw_a[1] + raw_a[3]))
        b = det("b-0", box(raw_b[0], raw_b[1], raw_b[0] + raw_b[2], raw_b[1] + raw_b[3]))
        assert heuristic_classify(a, b) is heuristic_classify(b, a).swapped()


class TestRelationLabel:
    def test_swap_is_involution(self):
        for label in RelationLabel:
            assert label.swapped().swapped() is label

    def test_unrelated_fixed_by_swap(self):
        assert RelationLabel.UNRELATED.swapped() is RelationLabel.UNRELATED
