"""Hot numeric kernels for conjunctive combination of bitmask-encoded mass vectors.

Two implementations of each kernel: a numba ``@njit`` version and a pure-numpy
fallback.  Selection happens at import time via the ``DSPROTO_NUMBA``
environment variable ("0" forces the numpy path); if numba is not importable
the numpy path is used silently.

A focal-element vector is a pair of parallel arrays: ``keys`` (uint64 bitmasks
over the ordered frame, no duplicates) and ``masses`` (float64).  Keys are kept
sorted ascending so outputs are deterministic.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_FLAG = os.environ.get("DSPROTO_NUMBA", "1")


def _combine_np(k1, m1, k2, m2):
    inter = (k1[:, None] & k2[None, :]).ravel()
    prod = (m1[:, None] * m2[None, :]).ravel()
    nonempty = inter != 0
    conflict = float(prod[~nonempty].sum())
    keys, inverse = np.unique(inter[nonempty], return_inverse=True)
    masses = np.bincount(inverse, weights=prod[nonempty])
    return keys, masses, conflict


def _conflict_np(k1, m1, k2, m2):
    empty = (k1[:, None] & k2[None, :]) == 0
    return float((m1[:, None] * m2[None, :])[empty].sum())


def _combine_nb_impl(k1, m1, k2, m2):  # pragma: no cover - jitted
    n = k1.size * k2.size
    keys = np.empty(n, np.uint64)
    masses = np.empty(n, np.float64)
    conflict = 0.0
    cnt = 0
    for i in range(k1.size):
        for j in range(k2.size):
            key = k1[i] & k2[j]
            p = m1[i] * m2[j]
            if key == np.uint64(0):
                conflict += p
            else:
                keys[cnt] = key
                masses[cnt] = p
                cnt += 1
    order = np.argsort(keys[:cnt], kind="mergesort")
    out_k = np.empty(cnt, np.uint64)
    out_m = np.empty(cnt, np.float64)
    u = 0
    for idx in range(cnt):
        pos = order[idx]
        if idx > 0 and keys[pos] == out_k[u - 1]:
            out_m[u - 1] += masses[pos]
        else:
            out_k[u] = keys[pos]
            out_m[u] = masses[pos]
            u += 1
    return out_k[:u], out_m[:u], conflict


def _conflict_nb_impl(k1, m1, k2, m2):  # pragma: no cover - jitted
    conflict = 0.0
    for i in range(k1.size):
        for j in range(k2.size):
            if k1[i] & k2[j] == np.uint64(0):
                conflict += m1[i] * m2[j]
    return conflict


def _load_numba():
    from numba import njit

    return (
        njit(cache=True)(_combine_nb_impl),
        njit(cache=True)(_conflict_nb_impl),
    )


if _ENV_FLAG != "0":
    try:
        combine_arrays, conflict_arrays = _load_numba()
        BACKEND = "numba"
    except ImportError:
        combine_arrays, conflict_arrays = _combine_np, _conflict_np
        BACKEND = "numpy"
else:
    combine_arrays, conflict_arrays = _combine_np, _conflict_np
    BACKEND = "numpy"

# both paths exported for benchmarks and equivalence tests
numpy_combine = _combine_np
numpy_conflict = _conflict_np
