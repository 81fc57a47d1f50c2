import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from numgen import _kernels
from numgen._kernels import pure


def _compiled_or_skip():
    if _kernels.BACKEND != "compiled":
        pytest.skip("compiled kernels unavailable")
    from numgen._kernels import _ccl

    return _ccl


@given(hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=32),
                  elements=st.integers(0, 1)),
       st.sampled_from([4, 8]))
def test_backends_label_identically(mask, connectivity):
    compiled = _compiled_or_skip()
    l_c, n_c = compiled.label_components(np.ascontiguousarray(mask), connectivity)
    l_p, n_p = pure.label_components(mask, connectivity)
    assert n_c == n_p
    assert np.array_equal(l_c, l_p)


def test_label_order_is_raster_first_appearance():
    mask = np.array([
        [0, 1, 0, 1],
        [0, 0, 0, 1],
        [1, 0, 0, 0],
    ], dtype=np.uint8)
    labels, n = _kernels.label_components(mask, 4)
    assert n == 3
    assert labels[0, 1] == 1 and labels[0, 3] == 2 and labels[2, 0] == 3


def test_diagonal_pixels_merge_only_under_8conn():
    mask = np.eye(5, dtype=np.uint8)
    _, n8 = _kernels.label_components(mask, 8)
    _, n4 = _kernels.label_components(mask, 4)
    assert n8 == 1 and n4 == 5


def test_u_shape_merges_across_rows():
    mask = np.array([
        [1, 0, 1],
        [1, 0, 1],
        [1, 1, 1],
    ], dtype=np.uint8)
    _, n = _kernels.label_components(mask, 4)
    assert n == 1


def test_empty_mask():
    labels, n = _kernels.label_components(np.zeros((8, 8), dtype=np.uint8), 8)
    assert n == 0 and labels.max() == 0


def test_invalid_connectivity():
    with pytest.raises(ValueError):
        _kernels.label_components(np.zeros((4, 4), dtype=np.uint8), 6)


class TestFirstFree:
    def test_no_placed_boxes_takes_first(self):
        assert _kernels.first_free(np.array([5, 9]), np.array([5, 9]), 4, 4,
                                   np.empty((0, 4), dtype=np.int64)) == 0

    def test_skips_colliding_candidates(self):
        placed = np.array([[0, 0, 10, 10]], dtype=np.int64)
        xs = np.array([5, 9, 10], dtype=np.int64)  # third touches edge: legal
        ys = np.array([5, 0, 0], dtype=np.int64)
        assert _kernels.first_free(xs, ys, 10, 10, placed) == 2

    def test_all_blocked(self):
        placed = np.array([[0, 0, 100, 100]], dtype=np.int64)
        xs = ys = np.array([0, 10, 20], dtype=np.int64)
        assert _kernels.first_free(xs, ys, 5, 5, placed) == -1

    @given(st.integers(0, 10**6))
    def test_backends_agree(self, seed):
        compiled = _compiled_or_skip()
        rng = np.random.default_rng(seed)
        n, m = int(rng.integers(1, 30)), int(rng.integers(0, 8))
        xs = rng.integers(0, 80, n)
        ys = rng.integers(0, 80, n)
        placed = np.column_stack([
            rng.integers(0, 80, m), rng.integers(0, 80, m),
            rng.integers(1, 25, m), rng.integers(1, 25, m),
        ]).astype(np.int64).reshape(-1, 4)
        w, h = int(rng.integers(1, 25)), int(rng.integers(1, 25))
        a = compiled.first_free(np.ascontiguousarray(xs, np.int64),
                                np.ascontiguousarray(ys, np.int64), w, h,
                                np.ascontiguousarray(placed))
        assert a == pure.first_free(xs.astype(np.int64), ys.astype(np.int64), w, h, placed)
