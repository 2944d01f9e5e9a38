"""Compare the numba and numpy combination kernels on random mass vectors.

Usage: python benchmarks/bench_kernels.py [--sizes 4,16,64,256] [--repeats 200]

Times combine_arrays and conflict_arrays for square problems (both inputs
carry the same number of focal elements) and prints microseconds per call
plus the speedup of the jitted path.
"""

import argparse
import time

import numpy as np

from dsproto._kernels import _load_numba, numpy_combine, numpy_conflict


def random_vector(rng, size, bits=64):
    keys = np.unique(
        rng.integers(1, 1 << min(bits, 63), size=size * 2, dtype=np.int64).astype(
            np.uint64
        )
    )[:size]
    masses = rng.random(keys.size)
    return keys, masses / masses.sum()


def time_call(fn, args, repeats):
    fn(*args)  # warm-up (and jit compilation on the numba path)
    best = float("inf")
    for _ in range(5):
        t0 = time.perf_counter()
        for _ in range(repeats):
            fn(*args)
        best = min(best, (time.perf_counter() - t0) / repeats)
    return best * 1e6


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="4,16,64,256",
                        help="comma-separated focal counts per input")
    parser.add_argument("--repeats", type=int, default=200)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    try:
        nb_combine, nb_conflict = _load_numba()
    except ImportError:
        print("numba not importable; nothing to compare against")
        return

    rng = np.random.default_rng(args.seed)
    print(f"{'size':>6} {'kernel':>10} {'numpy us':>10} {'numba us':>10} {'speedup':>8}")
    for size in [int(s) for s in args.sizes.split(",")]:
        k1, m1 = random_vector(rng, size)
        k2, m2 = random_vector(rng, size)
        for name, np_fn, nb_fn in (
            ("combine", numpy_combine, nb_combine),
            ("conflict", numpy_conflict, nb_conflict),
        ):
            t_np = time_call(np_fn, (k1, m1, k2, m2), args.repeats)
            t_nb = time_call(nb_fn, (k1, m1, k2, m2), args.repeats)
            print(f"{size:>6} {name:>10} {t_np:>10.2f} {t_nb:>10.2f} "
                  f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
