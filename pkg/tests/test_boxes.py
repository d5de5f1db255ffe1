import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import iou_pixel_count
from scenediff.boxes import (
    BoundingBox,
    center,
    clamp_box,
    containment,
    displacement,
    intersection_area,
    iou,
    union_box,
)


def boxes_strategy(limit=100.0):
    coord = st.floats(min_value=0.0, max_value=limit, allow_nan=False, width=32)
    return st.builds(
        lambda x0, y0, w, h: BoundingBox(x0, y0, x0 + w, y0 + h),
        coord,
        coord,
        st.floats(min_value=0.5, max_value=limit, width=32),
        st.floats(min_value=0.5, max_value=limit, width=32),
    )


class TestBoundingBox:
    def test_rejects_zero_area(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, 0, 10)
        with pytest.raises(ValueError):
            BoundingBox(5, 5, 5, 5)

    def test_rejects_inverted(self):
        with pytest.raises(ValueError):
            BoundingBox(10, 0, 0, 10)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            BoundingBox(0, 0, math.inf, 10)
        with pytest.raises(ValueError):
            BoundingBox(0, math.nan, 10, 10)


class TestIou:
    def test_identity(self):
        b = BoundingBox(0, 0, 10, 10)
        assert iou(b, b) == 1.0

    def test_disjoint(self):
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(20, 20, 30, 30)) == 0.0

    def test_touching_edges_are_disjoint(self):
        # Shared edge has zero area; no epsilon involved.
        assert iou(BoundingBox(0, 0, 10, 10), BoundingBox(10, 0, 20, 10)) == 0.0

    def test_half_overlap(self):
        # Pixel-count oracle on the integer grid gives 50/150 exactly.
        a = (0, 0, 10, 10)
        b = (5, 0, 15, 10)
        expected = iou_pixel_count(a, b, grid=16)
        assert expected == 50 / 150
        assert abs(iou(BoundingBox(*a), BoundingBox(*b)) - expected) < 1e-12

    @given(boxes_strategy(), boxes_strategy())
    @settings(max_examples=200)
    def test_symmetric_and_bounded(self, a, b):
        v = iou(a, b)
        assert v == iou(b, a)
        assert 0.0 <= v <= 1.0

    @given(boxes_strategy(), boxes_strategy())
    @settings(max_examples=200)
    def test_positive_iff_overlapping(self, a, b):
        overlaps = (
            min(a.x_max, b.x_max) > max(a.x_min, b.x_min)
            and min(a.y_max, b.y_max) > max(a.y_min, b.y_min)
        )
        assert (iou(a, b) > 0) == overlaps

    def test_matches_pixel_oracle_on_random_integer_boxes(self):
        rng = np.random.default_rng(123)
        for _ in range(1000):
            a = _random_int_box(rng, 64)
            b = _random_int_box(rng, 64)
            analytic = iou(BoundingBox(*a), BoundingBox(*b))
            counted = iou_pixel_count(a, b, grid=64)
            assert abs(analytic - counted) < 1e-12


def _random_int_box(rng, grid):
    x0, x1 = sorted(rng.choice(grid + 1, size=2, replace=False).tolist())
    y0, y1 = sorted(rng.choice(grid + 1, size=2, replace=False).tolist())
    return (x0, y0, x1, y1)


class TestCenterDisplacement:
    def test_center_symmetric_box(self):
        assert center(BoundingBox(0, 0, 10, 10)) == (5, 5)

    def test_center_fractional(self):
        assert center(BoundingBox(2, 4, 2.5, 6)) == (2.25, 5)

    def test_center_full_image(self):
        w, h = 640, 480
        assert center(BoundingBox(0, 0, w, h)) == (w / 2, h / 2)

    def test_displacement_zero_for_same_box(self):
        b = BoundingBox(3, 4, 9, 11)
        assert displacement(b, b) == 0.0

    def test_displacement_345_triangle(self):
        # Centers (5,5) -> (35,45): sqrt(30^2 + 40^2) = 50.
        assert displacement(BoundingBox(0, 0, 10, 10), BoundingBox(30, 40, 40, 50)) == 50.0

    @given(boxes_strategy(), boxes_strategy())
    @settings(max_examples=100)
    def test_displacement_symmetric(self, a, b):
        assert displacement(a, b) == displacement(b, a)

    @given(boxes_strategy(), boxes_strategy(), boxes_strategy())
    @settings(max_examples=200)
    def test_displacement_triangle_inequality(self, a, b, c):
        assert displacement(a, c) <= displacement(a, b) + displacement(b, c) + 1e-9


class TestUnionBox:
    def test_overlapping(self):
        assert union_box(BoundingBox(0, 0, 10, 10), BoundingBox(5, 5, 20, 20)) == BoundingBox(0, 0, 20, 20)

    def test_identity(self):
        b = BoundingBox(1, 2, 3, 4)
        assert union_box(b, b) == b

    def test_disjoint_corners(self):
        assert union_box(BoundingBox(0, 0, 1, 1), BoundingBox(9, 9, 10, 10)) == BoundingBox(0, 0, 10, 10)

    @given(boxes_strategy(), boxes_strategy())
    @settings(max_examples=200)
    def test_contains_both_and_commutes(self, a, b):
        u = union_box(a, b)
        assert u == union_box(b, a)
        for inner in (a, b):
            assert u.x_min <= inner.x_min and u.y_min <= inner.y_min
            assert u.x_max >= inner.x_max and u.y_max >= inner.y_max
        assert union_box(u, u) == u


class TestClampAndContainment:
    def test_clamp_inside_noop(self):
        b = BoundingBox(1, 1, 5, 5)
        assert clamp_box(b, 10, 10) == b

    def test_clamp_partial(self):
        assert clamp_box(BoundingBox(-5, -5, 5, 5), 10, 10) == BoundingBox(0, 0, 5, 5)

    def test_clamp_to_zero_area_fails(self):
        with pytest.raises(ValueError):
            clamp_box(BoundingBox(20, 20, 30, 30), 10, 10)

    def test_containment_fraction(self):
        a = BoundingBox(0, 0, 10, 10)
        b = BoundingBox(5, 0, 15, 10)
        assert containment(a, b) == 0.5
        assert intersection_area(a, b) == 50.0
