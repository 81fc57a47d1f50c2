import numpy as np
import pytest

from numgen.data_engine import DatasetConfig, composite_scene, generate_dataset
from numgen.glyphs import synthesize_layer
from numgen.layout import BBox, LayoutSpec, plan_random_layout
from numgen.oracle import count_components, evaluate_set, foreground_mask


class TestCountComponents:
    def test_uniform_image_counts_zero(self):
        img = np.full((64, 64, 3), 200, dtype=np.uint8)
        report = count_components(img, 200)
        assert report.count == 0 and report.components == []

    def test_single_disc(self):
        layout = LayoutSpec(64, 64, [BBox(10, 12, 24, 24)])
        img = composite_scene(layout, synthesize_layer(0, "disc", 24), 200)
        report = count_components(img, 200)
        assert report.count == 1
        (box, area) = report.components[0]
        assert box.x >= 10 and box.y >= 12
        assert box.x + box.w <= 34 and box.y + box.h <= 36
        assert area >= 4

    def test_fifty_objects(self):
        layout = plan_random_layout(50, 512, 512, seed=2)
        img = composite_scene(layout, synthesize_layer(1, "ring", 36), 200)
        assert count_components(img, 200).count == 50

    def test_eight_conn_count_at_most_four_conn(self, rng):
        for _ in range(20):
            img = (rng.random((40, 40)) < 0.35).astype(np.uint8) * 255
            rgb = np.stack([img] * 3, axis=2)
            n8 = count_components(rgb, 0, min_area=1, connectivity=8).count
            n4 = count_components(rgb, 0, min_area=1, connectivity=4).count
            assert n8 <= n4

    def test_translation_invariance(self):
        layout = plan_random_layout(6, 128, 128, seed=4)
        layer = synthesize_layer(0, "disc", layout.boxes[0].w)
        img_a = composite_scene(layout, layer, 200)
        shifted = LayoutSpec(160, 160, [BBox(b.x + 20, b.y + 20, b.w, b.h) for b in layout.boxes])
        img_b = composite_scene(shifted, layer, 200)
        assert count_components(img_a, 200).count == count_components(img_b, 200).count

    def test_min_area_suppresses_speckle(self):
        img = np.full((32, 32, 3), 200, dtype=np.uint8)
        img[4, 4] = 0          # 1-px speckle
        img[10:14, 10:14] = 0  # 16-px object
        assert count_components(img, 200, min_area=4).count == 1
        assert count_components(img, 200, min_area=1).count == 2

    def test_threshold_rule(self):
        img = np.full((16, 16, 3), 200, dtype=np.uint8)
        img[2:8, 2:8] = 200 - 16  # exactly delta away: not foreground
        assert not foreground_mask(img, 200, delta=16).any()
        img[2:8, 2:8] = 200 - 17
        assert foreground_mask(img, 200, delta=16).sum() == 36

    def test_grayscale_2d_input(self):
        img = np.full((16, 16), 200, dtype=np.uint8)
        img[3:9, 3:9] = 10
        assert count_components(img, 200).count == 1


class TestEvaluateSet:
    @pytest.fixture
    def dataset(self, tmp_path):
        config = DatasetConfig(out_dir=tmp_path, categories=("koala", "owl"),
                               count_min=1, count_max=4, samples_per=2,
                               canvas_w=96, canvas_h=96, master_seed=3)
        return generate_dataset(config)

    def test_perfect_set_all_pairs_equal(self, dataset):
        results, errors = evaluate_set(dataset)
        assert not errors
        assert len(results) == 16
        assert all(pair.requested == pair.predicted for _, pair, _ in results)

    def test_results_in_manifest_order(self, dataset):
        results, _ = evaluate_set(dataset)
        assert [rid for rid, _, _ in results] == list(range(16))

    def test_corrupted_image_reports_error_and_continues(self, dataset, tmp_path):
        from numgen.data_engine import load_manifest

        victim = load_manifest(dataset)[3]["image_path"]
        (tmp_path / victim).write_bytes(b"not a png")
        results, errors = evaluate_set(dataset)
        assert len(results) == 15
        assert len(errors) == 1 and errors[0][0] == 3

    def test_parallel_matches_serial(self, dataset):
        serial, _ = evaluate_set(dataset, jobs=1)
        parallel, _ = evaluate_set(dataset, jobs=2)
        assert [(r, p.requested, p.predicted) for r, p, _ in serial] == \
               [(r, p.requested, p.predicted) for r, p, _ in parallel]
