"""Integer kernels over word bases.

Every kernel here works on mode *indices* 0..d-1 and returns plain integer
arrays; scalars (powers of q) are attached later by the caller, so the same
kernel output serves both the exact and the float backend.

Two implementations exist for each kernel: a numba ``@njit`` path and a
pure-numpy path.  The active one is chosen at import time from the
``QUONLAB_KERNELS`` environment variable (``numba`` or ``numpy``); when the
variable is unset numba is used if it imports.
"""

import itertools
import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_requested = os.environ.get("QUONLAB_KERNELS", "").strip().lower()
if _requested not in ("", "numba", "numpy"):
    raise ImportError(f"QUONLAB_KERNELS must be 'numba' or 'numpy', got {_requested!r}")
if _requested == "numba" and not HAVE_NUMBA:
    raise ImportError("QUONLAB_KERNELS=numba but numba is not importable")

ACTIVE = "numpy" if (_requested == "numpy" or not HAVE_NUMBA) else "numba"


def word_table(d: int, n: int) -> np.ndarray:
    """All length-``n`` words over ``d`` letters, lexicographic, shape (d**n, n)."""
    if n < 0:
        return np.zeros((0, 0), dtype=np.int64)
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((d,) * n, dtype=np.int64).reshape(n, -1).T.copy()


def permutation_table(n: int):
    """Permutations of ``range(n)`` (itertools order) with their inversion counts."""
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(math.factorial(n), n)
    inv = np.zeros(len(perms), dtype=np.int64)
    for i in range(n):
        for k in range(i + 1, n):
            inv += perms[:, i] > perms[:, k]
    return perms, inv


# ---------------------------------------------------------------------------
# numpy implementations


def _annihilation_entries_numpy(words, d, m):
    n_words, n = words.shape
    rows, cols, exps = [], [], []
    col = np.arange(n_words, dtype=np.int64)
    for k in range(n):
        hit = words[:, k] == m
        c = col[hit]
        hi = d ** (n - k)
        lo = d ** (n - 1 - k)
        rows.append((c // hi) * lo + c % lo)
        cols.append(c)
        exps.append(np.full(len(c), k, dtype=np.int64))
    if not rows:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(exps)


def _substitution_entries_numpy(words, d, alpha, beta):
    n_words, n = words.shape
    rows, cols = [], []
    col = np.arange(n_words, dtype=np.int64)
    for k in range(n):
        c = col[words[:, k] == beta]
        rows.append(c + (alpha - beta) * d ** (n - 1 - k))
        cols.append(c)
    if not rows:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty
    return np.concatenate(rows), np.concatenate(cols)


def _inversion_histogram_numpy(left, right, perms, inv):
    n = left.shape[1]
    n_bins = n * (n - 1) // 2 + 1
    hist = np.zeros((left.shape[0], right.shape[0], n_bins), dtype=np.int64)
    for p in range(perms.shape[0]):
        permuted = right[:, perms[p]]
        match = np.all(left[:, None, :] == permuted[None, :, :], axis=-1)
        hist[:, :, inv[p]] += match
    return hist


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _annihilation_entries_numba(words, d, m):
        n_words, n = words.shape
        count = 0
        for c in range(n_words):
            for k in range(n):
                if words[c, k] == m:
                    count += 1
        rows = np.empty(count, dtype=np.int64)
        cols = np.empty(count, dtype=np.int64)
        exps = np.empty(count, dtype=np.int64)
        t = 0
        for k in range(n):
            hi = d ** (n - k)
            lo = d ** (n - 1 - k)
            for c in range(n_words):
                if words[c, k] == m:
                    rows[t] = (c // hi) * lo + c % lo
                    cols[t] = c
                    exps[t] = k
                    t += 1
        return rows, cols, exps

    @njit(cache=True)
    def _substitution_entries_numba(words, d, alpha, beta):
        n_words, n = words.shape
        count = 0
        for c in range(n_words):
            for k in range(n):
                if words[c, k] == beta:
                    count += 1
        rows = np.empty(count, dtype=np.int64)
        cols = np.empty(count, dtype=np.int64)
        t = 0
        for k in range(n):
            step = (alpha - beta) * d ** (n - 1 - k)
            for c in range(n_words):
                if words[c, k] == beta:
                    rows[t] = c + step
                    cols[t] = c
                    t += 1
        return rows, cols

    @njit(cache=True)
    def _inversion_histogram_numba(left, right, perms, inv):
        n = left.shape[1]
        n_bins = n * (n - 1) // 2 + 1
        hist = np.zeros((left.shape[0], right.shape[0], n_bins), dtype=np.int64)
        for a in range(left.shape[0]):
            for b in range(right.shape[0]):
                for p in range(perms.shape[0]):
                    ok = True
                    for i in range(n):
                        if left[a, i] != right[b, perms[p, i]]:
                            ok = False
                            break
                    if ok:
                        hist[a, b, inv[p]] += 1
        return hist

else:  # pragma: no cover
    _annihilation_entries_numba = _annihilation_entries_numpy
    _substitution_entries_numba = _substitution_entries_numpy
    _inversion_histogram_numba = _inversion_histogram_numpy


IMPLEMENTATIONS = {
    "numpy": {
        "annihilation_entries": _annihilation_entries_numpy,
        "substitution_entries": _substitution_entries_numpy,
        "inversion_histogram": _inversion_histogram_numpy,
    },
    "numba": {
        "annihilation_entries": _annihilation_entries_numba,
        "substitution_entries": _substitution_entries_numba,
        "inversion_histogram": _inversion_histogram_numba,
    },
}


def annihilation_entries(words, d, m):
    """Sparse triplets of ``b_m`` on a sector: (target row, source col, power of q).

    ``b_m`` deletes the letter at position k of a word when it equals ``m``
    and weights the result by ``q**k``.
    """
    return IMPLEMENTATIONS[ACTIVE]["annihilation_entries"](words, d, m)


def substitution_entries(words, d, alpha, beta):
    """Sparse (row, col) pairs of the letter substitution beta -> alpha, one per occurrence."""
    return IMPLEMENTATIONS[ACTIVE]["substitution_entries"](words, d, alpha, beta)


def inversion_histogram(left, right):
    """``hist[a, b, k]`` = number of bijections of inversion count k carrying word b onto word a.

    Both word arrays must share the same length n.
    """
    n = left.shape[1]
    if right.shape[1] != n:
        raise ValueError("words must have equal length")
    perms, inv = permutation_table(n)
    return IMPLEMENTATIONS[ACTIVE]["inversion_histogram"](
        np.ascontiguousarray(left), np.ascontiguousarray(right), perms, inv
    )
