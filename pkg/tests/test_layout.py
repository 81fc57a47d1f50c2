import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from numgen.layout import (
    BBox,
    LayoutSpec,
    PlacementFailure,
    boxes_overlap,
    object_side_for_count,
    plan_grid_layout,
    plan_random_layout,
)


class TestObjectSide:
    def test_single_object_quarter_fill(self):
        assert object_side_for_count(1, 512, 512, 0.25) == 256

    def test_four_objects_halves_side(self):
        assert object_side_for_count(4, 512, 512, 0.25) == 128

    def test_fifty_objects(self):
        assert object_side_for_count(50, 512, 512, 0.25) == 36

    def test_zero_count_rejected(self):
        with pytest.raises(ValueError):
            object_side_for_count(0, 512, 512, 0.25)

    def test_clamped_to_minimum(self):
        assert object_side_for_count(10_000, 64, 64, 0.25) == 4

    def test_clamped_to_canvas(self):
        assert object_side_for_count(1, 16, 512, 1.0) == 16

    @given(st.integers(1, 400))
    def test_non_increasing_in_count(self, count):
        a = object_side_for_count(count, 512, 512, 0.25)
        b = object_side_for_count(count + 1, 512, 512, 0.25)
        assert b <= a


class TestOverlap:
    def test_edge_touch_is_not_overlap(self):
        assert not boxes_overlap(BBox(0, 0, 10, 10), BBox(10, 0, 10, 10))

    def test_corner_overlap(self):
        assert boxes_overlap(BBox(0, 0, 10, 10), BBox(5, 5, 10, 10))

    def test_disjoint(self):
        assert not boxes_overlap(BBox(0, 0, 10, 10), BBox(20, 20, 5, 5))

    def test_containment(self):
        assert boxes_overlap(BBox(0, 0, 20, 20), BBox(5, 5, 2, 2))

    @given(st.tuples(*[st.integers(0, 30)] * 4, *[st.integers(1, 12)] * 4))
    def test_symmetric(self, v):
        ax, ay, bx, by, aw, ah, bw, bh = v
        a, b = BBox(ax, ay, aw, ah), BBox(bx, by, bw, bh)
        assert boxes_overlap(a, b) == boxes_overlap(b, a)


class TestRandomLayout:
    def test_zero_count_gives_empty_layout(self):
        spec = plan_random_layout(0, 512, 512, seed=1)
        assert spec.count == 0 and spec.boxes == []

    def test_single_box_inside_canvas(self):
        spec = plan_random_layout(1, 512, 512, 0.25, 1000, seed=7)
        (box,) = spec.boxes
        assert box.w == box.h == 256
        assert 0 <= box.x <= 256 and 0 <= box.y <= 256

    def test_fifty_boxes_pairwise_disjoint(self):
        spec = plan_random_layout(50, 512, 512, 0.25, 1000, seed=3)
        assert spec.count == 50
        boxes = spec.boxes
        for i in range(50):
            for j in range(i + 1, 50):
                assert not boxes_overlap(boxes[i], boxes[j])
        spec.validate()

    def test_deterministic_per_seed(self):
        a = plan_random_layout(20, 512, 512, seed=42)
        b = plan_random_layout(20, 512, 512, seed=42)
        assert a.to_dict() == b.to_dict()

    def test_different_seeds_differ(self):
        a = plan_random_layout(20, 512, 512, seed=1)
        b = plan_random_layout(20, 512, 512, seed=2)
        assert a.to_dict() != b.to_dict()

    def test_failure_reports_object_index(self):
        # two objects at full-canvas size cannot coexist
        with pytest.raises(PlacementFailure) as exc_info:
            plan_random_layout(2, 64, 64, 1.0, max_attempts=50, seed=0)
        assert exc_info.value.object_index == 1

    def test_variable_size_jitters_sides(self):
        spec = plan_random_layout(10, 512, 512, seed=9, variable_size=True)
        sides = {b.w for b in spec.boxes}
        assert len(sides) > 1
        spec.validate()

    @given(st.integers(1, 25), st.integers(0, 2**32 - 1))
    def test_sound_layouts_by_property(self, count, seed):
        spec = plan_random_layout(count, 256, 256, 0.25, 1000, seed=seed)
        assert spec.count == count
        spec.validate()  # raises on overlap or out-of-canvas


class TestGridLayout:
    def test_full_grid(self):
        spec = plan_grid_layout(49, 512, 512)
        assert spec.count == 49
        spec.validate()

    def test_single_box_top_left(self):
        spec = plan_grid_layout(1, 512, 512)
        (box,) = spec.boxes
        assert box.x < 512 / 7 and box.y < 512 / 7

    def test_nine_boxes_row_major(self):
        spec = plan_grid_layout(9, 512, 512)
        cell = 512 / 7
        for i, box in enumerate(spec.boxes):
            r, c = divmod(i, 7)
            assert c * cell <= box.x < (c + 1) * cell
            assert r * cell <= box.y < (r + 1) * cell
        # first row fills columns 0..6, second row columns 0..1
        assert spec.boxes[7].y > spec.boxes[6].y

    def test_capacity_error(self):
        with pytest.raises(ValueError):
            plan_grid_layout(50, 512, 512)

    def test_prefix_property(self):
        for c in range(0, 49):
            a = plan_grid_layout(c, 512, 512)
            b = plan_grid_layout(c + 1, 512, 512)
            assert b.boxes[:c] == a.boxes

    def test_seed_independent(self):
        assert plan_grid_layout(12, 512, 512).to_dict() == plan_grid_layout(12, 512, 512).to_dict()


class TestSerialization:
    def test_round_trip(self):
        spec = plan_random_layout(7, 512, 512, seed=5)
        doc = json.loads(json.dumps(spec.to_dict()))
        again = LayoutSpec.from_dict(doc)
        assert again.to_dict() == spec.to_dict()

    def test_schema_fields(self):
        doc = plan_random_layout(2, 128, 128, seed=0).to_dict()
        assert set(doc) == {"canvas_w", "canvas_h", "count", "layout_type", "seed", "boxes"}
        assert all(set(b) == {"x", "y", "w", "h"} for b in doc["boxes"])

    def test_count_mismatch_rejected(self):
        doc = plan_random_layout(2, 128, 128, seed=0).to_dict()
        doc["count"] = 3
        with pytest.raises(ValueError):
            LayoutSpec.from_dict(doc)
