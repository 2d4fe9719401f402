"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Also checks that both backends return identical arrays on every input.
"""

import argparse
import timeit

import numpy as np

from wensemble import _pykernels, kernels
from wensemble.pixproc import TransformSpec, inverse_map


def cases(rng):
    n = 100_000
    actual = rng.integers(0, 2, n)
    predicted = rng.integers(0, 2, n)
    scores = np.round(rng.uniform(size=n), 3)
    positive = actual == 1
    stack = rng.dirichlet(np.ones(2), size=(5, n))
    weights = rng.uniform(0.1, 1, 5)
    img = rng.integers(0, 256, size=(450, 450, 3), dtype=np.uint8)
    mat, off = inverse_map(TransformSpec("rotate", angle=17.0), 450, 450)
    return {
        "confusion_counts (N=1e5)": ("confusion_counts", (actual, predicted, 2)),
        "roc_sweep (N=1e5, ties)": ("roc_sweep", (scores, positive)),
        "weighted_fuse (5 x 1e5 x 2)": ("weighted_fuse", (stack, weights)),
        "nearest_remap (450x450x3 rotate)": ("nearest_remap", (img, mat, off, 0)),
    }


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    compiled = kernels.compiled()
    if compiled is None:
        print("compiled extension not built; run `pip install -e . --no-build-isolation` first")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':36s} {'python ms':>10s} {'cython ms':>10s} {'speedup':>8s}  identical")
    for label, (name, fn_args) in cases(rng).items():
        py, cy = getattr(_pykernels, name), getattr(compiled, name)
        t_py = min(timeit.repeat(lambda: py(*fn_args), number=1, repeat=args.repeat)) * 1e3
        t_cy = min(timeit.repeat(lambda: cy(*fn_args), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:36s} {t_py:10.2f} {t_cy:10.2f} {t_py / t_cy:7.1f}x  {same(py(*fn_args), cy(*fn_args))}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
