"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Each row reports the best-of-``repeat`` wall time per call for both backends
and the speedup. The last rows time whole GAN training epochs on a
cancer-sized random dataset, which is what the kernels exist to speed up.
"""

import argparse
import json
import timeit

import numpy as np

from gansynth import gan, kernels
from gansynth.data import Dataset


def _cases(rng):
    f32 = np.float32
    n_adam = 160_000  # roughly one 256/512 generator
    p, g = rng.normal(size=n_adam).astype(f32), rng.normal(size=n_adam).astype(f32)
    m, v = np.zeros_like(p), np.zeros_like(p)
    z = rng.normal(size=(512, 5)).astype(f32)
    u = rng.random((512, 5)).astype(f32)
    grad = rng.normal(size=(512, 5)).astype(f32)
    vals = np.sort(rng.random(400))
    labels = rng.integers(0, 2, 400).astype(np.uint8)
    a, b = rng.random((398, 31)), rng.random((398, 31))
    return {
        "adam_update 160k": lambda k: k.adam_update(p, g, m, v, 1e-4, 0.5, 0.999, 1e-8),
        "leaky_dropout_forward 512x5": lambda k: k.leaky_dropout_forward(z, u, 0.2, 0.3),
        "leaky_backward 512x5": lambda k: k.leaky_backward(grad, z, None, 0.2),
        "sigmoid 512x5": lambda k: k.sigmoid(z),
        "best_gini_cut 400": lambda k: k.best_gini_cut_sorted(vals, labels),
        "nearest 398x398x31": lambda k: k.nearest_sq_distances(a, b),
    }


def _best(fn, repeat):
    number, _ = timeit.Timer(fn).autorange()
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def _gan_epoch(backend, repeat):
    rng = np.random.default_rng(0)
    ds = Dataset(tuple(f"f{i}" for i in range(30)), rng.random((398, 30)), rng.integers(0, 2, 398), "y")
    config = gan.GanConfig(epochs=1, seed=0)
    kernels.use(backend)
    return min(timeit.repeat(lambda: gan.train_gan(ds, config), number=1, repeat=repeat))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--json", help="also write results here")
    args = parser.parse_args(argv)

    if "compiled" not in kernels.available():
        parser.error("compiled extension not built; run `pip install -e . --no-build-isolation`")
    start = kernels.BACKEND
    results = []
    try:
        for name, case in _cases(np.random.default_rng(0)).items():
            c = _best(lambda: case(kernels.backend_module("compiled")), args.repeat)
            py = _best(lambda: case(kernels.backend_module("python")), args.repeat)
            results.append((name, c, py))
        results.append(("GAN epoch 256/512, 398 rows",
                        _gan_epoch("compiled", 3), _gan_epoch("python", 3)))
    finally:
        kernels.use(start)

    width = max(len(r[0]) for r in results)
    print(f"{'case':<{width}}  {'compiled':>12}  {'python':>12}  speedup")
    for name, c, py in results:
        print(f"{name:<{width}}  {c * 1e6:10.1f}us  {py * 1e6:10.1f}us  {py / c:6.2f}x")
    if args.json:
        with open(args.json, "w") as handle:
            json.dump([{"case": n, "compiled_s": c, "python_s": p} for n, c, p in results], handle, indent=2)


if __name__ == "__main__":
    main()
