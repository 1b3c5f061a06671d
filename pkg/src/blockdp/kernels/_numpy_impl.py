"""Pure-numpy kernels.

This module and its numba twin (``_numba_impl``) implement the same
operations with the same formulas applied in the same order, so that
within either backend the scalar, row, and table paths agree bitwise.
Tie-breaking everywhere keeps the first (smallest-index) maximum, which
is why reductions use a strict ``>`` / first-occurrence ``argmax``.
"""

from __future__ import annotations

import numpy as np

MODEL_POISSON = 0
MODEL_GAUSSIAN = 1

NEG_INF = float("-inf")


def prefix_compensated(values: np.ndarray) -> np.ndarray:
    """Running Neumaier-compensated sum; entry k is the sum of values[:k].

    Entry k depends only on values[:k], so appending data never changes
    earlier entries.  That property keeps incrementally rebuilt prefix
    arrays bit-identical to batch-built ones.
    """
    out = np.empty(values.size + 1)
    out[0] = 0.0
    s = 0.0
    c = 0.0
    for i in range(values.size):
        x = float(values[i])
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        out[i + 1] = s + c
    return out


def poisson_block(n_events: float, duration: float) -> float:
    """Piecewise-constant Poisson block fitness: N * (ln N - ln T), 0 for N == 0."""
    if n_events <= 0.0:
        return 0.0
    ln = np.log(np.array([n_events, duration]))
    return float(n_events * (ln[0] - ln[1]))


def gaussian_block(sum_wx: float, sum_wx2_weight: float) -> float:
    """Constant-level weighted-Gaussian block fitness: (sum wx)^2 / (2 sum w)."""
    return (sum_wx * sum_wx) / (2.0 * sum_wx2_weight)


def _raw_row(model_id: int, a1: np.ndarray, a2: np.ndarray, n: int) -> np.ndarray:
    # Raw fitness of block (j, n) for j = 1..n, at index j-1.
    x = a1[n] - a1[:n]
    y = a2[n] - a2[:n]
    if model_id == MODEL_POISSON:
        raw = x * (np.log(x) - np.log(y))
        np.copyto(raw, 0.0, where=(x <= 0.0))
    else:
        raw = (x * x) / (2.0 * y)
    return raw


def dp_sweep(
    model_id: int,
    a1: np.ndarray,
    a2: np.ndarray,
    offset: float,
    penalty: float,
    min_block: int,
    opt: np.ndarray,
    lastchange: np.ndarray,
    n_start: int,
    n_end: int,
) -> int:
    """Fill opt/lastchange for rows n_start..n_end; returns fitness evaluations done.

    Row n maximizes opt[j-1] + ((raw(j, n) - offset) - penalty) over block
    starts j = 1..n, keeping the smallest maximizing j.  min_block > 1
    restricts j so every block spans at least min_block cells; rows with
    no feasible j get opt = -inf and lastchange = 0.
    """
    evals = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for n in range(n_start, n_end + 1):
            raw = _raw_row(model_id, a1, a2, n)
            evals += n
            cand = opt[:n] + ((raw - offset) - penalty)
            if min_block > 1:
                hi = n - min_block  # largest feasible j-1
                if hi < 0:
                    opt[n] = NEG_INF
                    lastchange[n] = 0
                    continue
                feasible = np.zeros(n, dtype=bool)
                feasible[0] = True
                feasible[min_block : hi + 1] = True
                cand = np.where(feasible, cand, NEG_INF)
            b = int(np.argmax(cand))
            opt[n] = cand[b]
            lastchange[n] = b + 1
    return evals


def dp_fixed_k(
    model_id: int,
    a1: np.ndarray,
    a2: np.ndarray,
    offset: float,
    k: int,
    opt_layers: np.ndarray,
    lc_layers: np.ndarray,
) -> int:
    """Layered recurrence for the best partition into exactly k blocks.

    opt_layers[m, n] is the best fitness of the first n cells split into
    exactly m blocks (layer 1 is the single-block fitness directly).
    Arrays must arrive pre-filled with -inf / 0.  No penalty is applied.
    Returns the number of fitness evaluations.
    """
    n_total = a1.size - 1
    evals = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        x = a1[1:] - a1[0]
        y = a2[1:] - a2[0]
        if model_id == MODEL_POISSON:
            raw = x * (np.log(x) - np.log(y))
            np.copyto(raw, 0.0, where=(x <= 0.0))
        else:
            raw = (x * x) / (2.0 * y)
        opt_layers[1, 1:] = raw - offset
        lc_layers[1, 1:] = 1
        evals += n_total
        for layer in range(2, k + 1):
            prev = opt_layers[layer - 1]
            for n in range(layer, n_total + 1):
                lo = layer - 1  # smallest feasible j-1
                raw = _raw_row(model_id, a1, a2, n)[lo:]
                evals += n - lo
                cand = prev[lo:n] + (raw - offset)
                b = int(np.argmax(cand))
                opt_layers[layer, n] = cand[b]
                lc_layers[layer, n] = lo + b + 1
    return evals


def fill_block_table(
    model_id: int,
    a1: np.ndarray,
    a2: np.ndarray,
    offset: float,
    penalty: float,
    out: np.ndarray,
) -> None:
    """Fill out[i, j] = (raw(i, j) - offset) - penalty for 1 <= i <= j <= N.

    Entries outside the upper triangle are not meaningful.
    """
    x = a1[None, 1:] - a1[:-1, None]
    y = a2[None, 1:] - a2[:-1, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        if model_id == MODEL_POISSON:
            raw = x * (np.log(x) - np.log(y))
            np.copyto(raw, 0.0, where=(x <= 0.0))
        else:
            raw = (x * x) / (2.0 * y)
    out[1:, 1:] = (raw - offset) - penalty


def exhaustive_scan(table: np.ndarray, n: int) -> tuple[float, int, int]:
    """Scan every partition of n cells; return (best value, best mask, count).

    Masks encode boundaries: bit b set means a block ends after cell b+1.
    The first (smallest) mask among exactly-tied maxima wins, which is
    the same partition the smallest-j rule of the dynamic program picks.
    The winner is re-scored by a left-to-right sum so the reported value
    accumulates in the same order the dynamic program uses.
    """
    n_masks = 1 << (n - 1)
    masks = np.arange(n_masks, dtype=np.int64)
    vals = np.zeros(n_masks)
    for i in range(1, n + 1):
        for j in range(i, n + 1):
            inside = ((1 << (j - 1)) - 1) ^ ((1 << (i - 1)) - 1)
            sel = (masks & inside) == 0
            if i >= 2:
                sel &= ((masks >> (i - 2)) & 1) == 1
            if j <= n - 1:
                sel &= ((masks >> (j - 1)) & 1) == 1
            vals[sel] += table[i, j]
    best_mask = int(np.argmax(vals))
    value = 0.0
    start = 1
    for b in range(n - 1):
        if (best_mask >> b) & 1:
            value += table[start, b + 1]
            start = b + 2
    value += table[start, n]
    return value, best_mask, n_masks
