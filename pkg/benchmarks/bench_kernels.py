"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat R]

Each kernel runs once untimed (numba compiles on first call), then the best
of R repetitions is reported.  Outputs are compared for parity as well.
"""

import argparse
import time

import numpy as np

from quonlab import _kernels

CASES = [
    # (d modes, n particles)
    (2, 4),
    (3, 4),
    (4, 4),
    (4, 5),
]


def _best(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def _calls(d, n):
    words = _kernels.word_table(d, n)
    perms, inv = _kernels.permutation_table(n)
    return {
        "inversion_histogram": lambda impl: impl(words, words, perms, inv),
        "annihilation_entries": lambda impl: impl(words, d, 0),
        "substitution_entries": lambda impl: impl(words, d, 1, 0),
    }


def _same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    print(f"{'kernel':22} {'d':>2} {'n':>2} {'words':>6} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8}  parity")
    for d, n in CASES:
        for name, call in _calls(d, n).items():
            np_impl = _kernels.IMPLEMENTATIONS["numpy"][name]
            nb_impl = _kernels.IMPLEMENTATIONS["numba"][name]
            t_np = _best(lambda: call(np_impl), args.repeat)
            t_nb = _best(lambda: call(nb_impl), args.repeat)
            ok = _same(call(np_impl), call(nb_impl))
            print(f"{name:22} {d:>2} {n:>2} {d**n:>6} {1e3 * t_np:11.3f} {1e3 * t_nb:11.3f} "
                  f"{t_np / t_nb:8.1f}x  {'ok' if ok else 'MISMATCH'}")


if __name__ == "__main__":
    main()
