"""Compiled vs numpy split search.

    python benchmarks/bench_kernels.py [--repeat 5]

Times ``best_split`` on pair-shaped data of growing size, then a full
15-tree forest fit with each backend swapped in.
"""

import argparse
import timeit

import numpy as np

from dagexplain import _kernels_py, kernels
from dagexplain.proxy import train_rf

try:
    from dagexplain import _kernels as compiled
except ImportError:
    compiled = None


def pair_data(n, seed=0):
    rng = np.random.default_rng(seed)
    X = np.round(rng.gamma(2.0, 50.0, (n, 14)), 2)
    X[:, 6] = rng.integers(0, 2, n)
    X[:, 13] = rng.integers(0, 2, n)
    y = (X[:, 4] < X[:, 11]).astype(np.int64)
    return X, y


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {"python": _kernels_py.best_split}
    if compiled is not None:
        backends["cython"] = compiled.best_split
    else:
        print("compiled kernels not built; timing the numpy fallback only")

    feats = np.arange(14, dtype=np.int64)
    print(f"{'rows':>8} " + " ".join(f"{b + ' ms':>12}" for b in backends) + f" {'speedup':>8}")
    for n in (100, 1000, 5000, 20000):
        X, y = pair_data(n)
        ms = {b: 1e3 * best_of(lambda f=f: f(X, y, feats, True), args.repeat) for b, f in backends.items()}
        speed = ms["python"] / ms["cython"] if "cython" in ms else float("nan")
        print(f"{n:>8} " + " ".join(f"{v:>12.3f}" for v in ms.values()) + f" {speed:>8.2f}")

    X, y = pair_data(5000, seed=1)
    print("\nforest fit, 15 trees, depth 9, 5000 pairs")
    saved = kernels.best_split
    try:
        for b, f in backends.items():
            kernels.best_split = f
            s = best_of(lambda: train_rf((X, y), 15, 9, 0), max(1, args.repeat // 2))
            print(f"  {b:>7}: {s:.3f} s")
    finally:
        kernels.best_split = saved


if __name__ == "__main__":
    main()
