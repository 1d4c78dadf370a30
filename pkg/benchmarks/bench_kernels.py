"""Time the numba and numpy kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat N]

The first numba call of each kernel includes JIT compilation; it is timed
separately as "warmup" and excluded from the best-of-N figure.
"""

import argparse
import time

import numpy as np

from halfweight import _accel
from halfweight.fourier import GRAMS
from halfweight.numerics import coset_pairs


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    e8 = GRAMS["e8"]
    e8e8 = GRAMS["e8e8"]
    _, roots = _accel.enumerate_short(e8, 4, True, "numpy")
    cs, ds, as_ = coset_pairs(200)
    z = np.array([complex(x, y) for x in np.linspace(-0.5, 0.5, 16) for y in np.linspace(0.9, 3.0, 16)])
    return [
        ("enumerate e8, norm <= 8", lambda b: _accel.enumerate_short(e8, 8, False, b)),
        ("enumerate e8+e8, norm <= 6", lambda b: _accel.enumerate_short(e8e8, 6, False, b)),
        (f"pair histogram, {len(roots)} x {len(roots)}", lambda b: _accel.pair_histogram(roots, roots, e8, b)),
        (f"poincare sum, {len(z)} points x {len(cs)} cosets",
         lambda b: _accel.poincare_sum(z, 12, 1, cs, ds, as_, b)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    print(f"{'kernel':44s} {'backend':8s} {'warmup s':>10s} {'best s':>10s}")
    for name, fn in cases():
        base = None
        for b in backends:
            t0 = time.perf_counter()
            fn(b)
            warm = time.perf_counter() - t0
            best = best_of(lambda: fn(b), args.repeat)
            base = base or best
            print(f"{name:44s} {b:8s} {warm:10.4f} {best:10.4f}  x{base / best:.1f}")


if __name__ == "__main__":
    main()
