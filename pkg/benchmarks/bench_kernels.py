"""Compare the compiled kernels against the pure NumPy fallback.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from numgen import _kernels
from numgen._kernels import pure
from numgen.data_engine import composite_scene
from numgen.glyphs import synthesize_layer
from numgen.layout import plan_random_layout
from numgen.oracle import foreground_mask


def _time(fn, repeats=20):
    fn()
    t0 = time.perf_counter()
    for _ in range(repeats):
        fn()
    return (time.perf_counter() - t0) / repeats


def bench_ccl():
    layout = plan_random_layout(50, 512, 512, seed=7)
    img = composite_scene(layout, synthesize_layer(0, "disc", 36), 200)
    mask = np.ascontiguousarray(foreground_mask(img, 200))
    rows = []
    for conn in (4, 8):
        t_pure = _time(lambda: pure.label_components(mask, conn))
        row = [f"label_components conn={conn}", f"{t_pure * 1e3:8.2f} ms"]
        if _kernels.BACKEND == "compiled":
            from numgen._kernels import _ccl

            t_ext = _time(lambda: _ccl.label_components(mask, conn))
            row += [f"{t_ext * 1e3:8.2f} ms", f"{t_pure / t_ext:5.1f}x"]
        rows.append(row)
    return rows


def bench_first_free():
    rng = np.random.default_rng(0)
    placed = np.column_stack([
        rng.integers(0, 470, 49), rng.integers(0, 470, 49),
        np.full(49, 36), np.full(49, 36),
    ]).astype(np.int64)
    xs = np.ascontiguousarray(rng.integers(0, 470, 64), dtype=np.int64)
    ys = np.ascontiguousarray(rng.integers(0, 470, 64), dtype=np.int64)
    t_pure = _time(lambda: pure.first_free(xs, ys, 36, 36, placed), repeats=500)
    row = ["first_free 64x49", f"{t_pure * 1e6:8.1f} us"]
    if _kernels.BACKEND == "compiled":
        from numgen._kernels import _ccl

        t_ext = _time(lambda: _ccl.first_free(xs, ys, 36, 36, placed), repeats=500)
        row += [f"{t_ext * 1e6:8.1f} us", f"{t_pure / t_ext:5.1f}x"]
    return [row]


def main():
    print(f"active backend: {_kernels.BACKEND}")
    header = ["kernel", "pure"]
    if _kernels.BACKEND == "compiled":
        header += ["compiled", "speedup"]
    print("  ".join(f"{h:<28}" if i == 0 else f"{h:>12}" for i, h in enumerate(header)))
    for row in bench_ccl() + bench_first_free():
        print("  ".join(f"{v:<28}" if i == 0 else f"{v:>12}" for i, v in enumerate(row)))


if __name__ == "__main__":
    main()
