"""Time the compiled and pure-Python kernels on identical inputs.

Usage: python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np
from scipy import ndimage

from facehr.kernels import backend_module


def nlms_case(n=36000, order=8):
    r = np.random.default_rng(0)
    d, x = r.standard_normal(n), r.standard_normal(n)
    return lambda mod: mod.nlms_filter(d, x, order, 0.5, 1.0), f"nlms_filter n={n} L={order}"


def lk_case(size=64, n_pts=50):
    r = np.random.default_rng(1)
    img = ndimage.gaussian_filter(r.uniform(0, 255, (size, size)), 1.5)
    nxt = np.roll(img, (1, 2), axis=(0, 1))
    gx = ndimage.correlate1d(img, [-0.5, 0, 0.5], axis=1, mode="nearest")
    gy = ndimage.correlate1d(img, [-0.5, 0, 0.5], axis=0, mode="nearest")
    pts = r.uniform(12, size - 12, (n_pts, 2))
    guess = np.zeros_like(pts)
    return (lambda mod: mod.lk_level(img, gx, gy, nxt, pts, guess, 7, 30, 0.01),
            f"lk_level {size}x{size} pts={n_pts} win=15")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    mods = {"python": backend_module("python")}
    try:
        mods["cython"] = backend_module("cython")
    except ImportError:
        print("compiled kernels not built; timing the Python fallback only")
    print(f"{'kernel':<34}{'backend':<9}{'best (ms)':>11}{'speedup':>9}")
    for make in (nlms_case, lk_case):
        fn, label = make()
        times = {name: min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
                 for name, mod in mods.items()}
        for name, t in times.items():
            print(f"{label:<34}{name:<9}{1e3 * t:>11.2f}{times['python'] / t:>8.1f}x")


if __name__ == "__main__":
    main()
