"""Numba-compiled kernels; semantics twin of ``_numpy_impl``.

No fastmath anywhere: tie-breaking and the bit-reproducibility contracts
(batch == incremental, penalty shifting) rely on strict IEEE evaluation
order.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

MODEL_POISSON = 0
MODEL_GAUSSIAN = 1

NEG_INF = float("-inf")


@njit(cache=True, nogil=True)
def prefix_compensated(values):
    """Running Neumaier-compensated sum; entry k is the sum of values[:k]."""
    out = np.empty(values.size + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i in range(values.size):
        x = values[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i + 1] = s + c
    return out


@njit(cache=True, nogil=True)
def _block_value(model_id, x, y):
    if model_id == MODEL_POISSON:
        if x <= 0.0:
            return 0.0
        return x * (math.log(x) - math.log(y))
    return (x * x) / (2.0 * y)


@njit(cache=True, nogil=True)
def poisson_block(n_events, duration):
    """Piecewise-constant Poisson block fitness: N * (ln N - ln T), 0 for N == 0."""
    return _block_value(MODEL_POISSON, n_events, duration)


@njit(cache=True, nogil=True)
def gaussian_block(sum_wx, sum_w):
    """Constant-level weighted-Gaussian block fitness: (sum wx)^2 / (2 sum w)."""
    return _block_value(MODEL_GAUSSIAN, sum_wx, sum_w)


@njit(cache=True, nogil=True)
def dp_sweep(model_id, a1, a2, offset, penalty, min_block, opt, lastchange, n_start, n_end):
    """Fill opt/lastchange for rows n_start..n_end; returns fitness evaluations done."""
    evals = 0
    for n in range(n_start, n_end + 1):
        best = NEG_INF
        best_j = 0
        j_hi = n - min_block + 1
        for j in range(1, n + 1):
            f = _block_value(model_id, a1[n] - a1[j - 1], a2[n] - a2[j - 1])
            evals += 1
            if j <= j_hi and (j == 1 or j > min_block):
                c = opt[j - 1] + ((f - offset) - penalty)
                if c > best:
                    best = c
                    best_j = j
        opt[n] = best
        lastchange[n] = best_j
    return evals


@njit(cache=True, nogil=True)
def dp_fixed_k(model_id, a1, a2, offset, k, opt_layers, lc_layers):
    """Layered recurrence for the best partition into exactly k blocks."""
    n_total = a1.size - 1
    evals = 0
    for n in range(1, n_total + 1):
        f = _block_value(model_id, a1[n] - a1[0], a2[n] - a2[0])
        evals += 1
        opt_layers[1, n] = f - offset
        lc_layers[1, n] = 1
    for layer in range(2, k + 1):
        for n in range(layer, n_total + 1):
            best = NEG_INF
            best_j = 0
            for j in range(layer, n + 1):
                f = _block_value(model_id, a1[n] - a1[j - 1], a2[n] - a2[j - 1])
                evals += 1
                c = opt_layers[layer - 1, j - 1] + (f - offset)
                if c > best:
                    best = c
                    best_j = j
            opt_layers[layer, n] = best
            lc_layers[layer, n] = best_j
    return evals


@njit(cache=True, nogil=True)
def fill_block_table(model_id, a1, a2, offset, penalty, out):
    """Fill out[i, j] = (raw(i, j) - offset) - penalty for 1 <= i <= j <= N."""
    n_total = a1.size - 1
    for i in range(1, n_total + 1):
        for j in range(i, n_total + 1):
            f = _block_value(model_id, a1[j] - a1[i - 1], a2[j] - a2[i - 1])
            out[i, j] = (f - offset) - penalty


@njit(cache=True, nogil=True)
def exhaustive_scan(table, n):
    """Scan every partition of n cells; return (best value, best mask, count).

    Masks enumerate ascending and ties keep the incumbent, so the
    smallest mask among exactly-tied maxima wins -- the same partition
    the smallest-j rule of the dynamic program picks.  Each partition is
    scored left to right, matching the accumulation order of the
    dynamic-programming recurrence.
    """
    n_masks = 1 << (n - 1)
    best = NEG_INF
    best_mask = 0
    for mask in range(n_masks):
        v = 0.0
        start = 1
        for b in range(n - 1):
            if (mask >> b) & 1:
                v += table[start, b + 1]
                start = b + 2
        v += table[start, n]
        if v > best:
            best = v
            best_mask = mask
    return best, best_mask, n_masks
