"""Independent reference methods the optimizer is checked against.

``exhaustive`` scores every one of the 2**(N-1) contiguous partitions
directly from a precomputed block-value table, with no shared recurrence
logic, so it can serve as an oracle for the quadratic engine.  The two
greedy procedures are deliberately suboptimal baselines: the optimizer
must always match or beat them.

A partition of N cells is encoded as an integer bitmask of N-1 bits:
bit b set means a block boundary sits after cell b+1.  Enumerating masks
in increasing order and keeping strict improvements selects, among tied
optima, the partition with the smallest mask -- which is exactly the
partition the engine's smallest-lastchange tie-break produces.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import kernels
from .cells import DataCells
from .engine import Segmentation, block_value_table, segmentation_from_changepoints
from .errors import InputError
from .fitness import FitnessModel, Penalty, penalty_value

_MAX_EXHAUSTIVE_CELLS = 20

NEG_INF = float("-inf")


@dataclass(frozen=True)
class OracleResult:
    """Outcome of a brute-force scan over every contiguous partition."""

    segmentation: Segmentation
    n_partitions_scanned: int


def _mask_to_changepoints(mask: int, n: int) -> np.ndarray:
    cps = [1]
    for b in range(n - 1):
        if (mask >> b) & 1:
            cps.append(b + 2)
    return np.asarray(cps, dtype=np.int64)


def _score_mask(table: np.ndarray, mask: int, n: int) -> float:
    """Left-associated sum of block values for one partition mask."""
    v = 0.0
    start = 1
    for b in range(n - 1):
        if (mask >> b) & 1:
            v = v + table[start, b + 1]
            start = b + 2
    return v + table[start, n]


def min_block_size_predicate(min_size: int) -> Callable[[np.ndarray, int], bool]:
    """Feasibility test: every block spans at least min_size cells."""

    def ok(changepoints: np.ndarray, n_cells: int) -> bool:
        sizes = np.diff(np.append(changepoints, n_cells + 1))
        return bool(np.all(sizes >= min_size))

    return ok


def exact_block_count_predicate(k: int) -> Callable[[np.ndarray, int], bool]:
    """Feasibility test: the partition has exactly k blocks."""

    def ok(changepoints: np.ndarray, n_cells: int) -> bool:
        return changepoints.size == k

    return ok


def exhaustive(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
    feasible: Optional[Callable[[np.ndarray, int], bool]] = None,
) -> OracleResult:
    """Best partition by scoring all 2**(N-1) of them; N is capped at 20.

    With a ``feasible`` predicate, only partitions it accepts compete
    (slower pure-python loop; intended for small N).  Ties go to the
    smallest boundary bitmask.
    """
    n = cells.n_cells
    if n < 1:
        raise InputError("cannot scan zero cells")
    if n > _MAX_EXHAUSTIVE_CELLS:
        raise InputError(
            f"exhaustive scan is limited to {_MAX_EXHAUSTIVE_CELLS} cells, got {n}"
        )
    pen = penalty_value(penalty)
    table = block_value_table(cells, model, pen)
    n_masks = 1 << (n - 1)
    if feasible is None:
        value, best_mask, scanned = kernels.exhaustive_scan(table, n)
        best_mask = int(best_mask)
        scanned = int(scanned)
        best_cps = _mask_to_changepoints(best_mask, n)
    else:
        best_val = NEG_INF
        best_cps = None
        for mask in range(n_masks):
            cps = _mask_to_changepoints(mask, n)
            if not feasible(cps, n):
                continue
            v = _score_mask(table, mask, n)
            if v > best_val:
                best_val = v
                best_cps = cps
        scanned = n_masks
        if best_cps is None:
            raise InputError("no partition satisfies the feasibility predicate")
        value = best_val
    seg = segmentation_from_changepoints(
        cells, model, pen, best_cps, total_fitness=float(value), n_fitness_evals=0
    )
    return OracleResult(segmentation=seg, n_partitions_scanned=scanned)


def _best_single_split(
    table: np.ndarray, lo: int, hi: int
) -> tuple[float, Optional[int]]:
    """Best (gain, split) for cutting block lo..hi in two; split starts the right part."""
    base = table[lo, hi]
    best_gain = 0.0
    best_split = None
    for s in range(lo + 1, hi + 1):
        gain = (table[lo, s - 1] + table[s, hi]) - base
        if gain > best_gain:
            best_gain = gain
            best_split = s
    return best_gain, best_split


def greedy_topdown(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
) -> Segmentation:
    """Recursive splitting: cut whichever block improves the total most, until none does.

    Each step is locally optimal but the procedure cannot undo a cut, so
    it can miss the global optimum.
    """
    n = cells.n_cells
    if n < 1:
        raise InputError("cannot segment zero cells")
    pen = penalty_value(penalty)
    table = block_value_table(cells, model, pen)
    blocks = [(1, n)]
    while True:
        best_gain = 0.0
        best_at = None
        for idx, (lo, hi) in enumerate(blocks):
            gain, split = _best_single_split(table, lo, hi)
            if split is not None and gain > best_gain:
                best_gain = gain
                best_at = (idx, split)
        if best_at is None:
            break
        idx, split = best_at
        lo, hi = blocks[idx]
        blocks[idx : idx + 1] = [(lo, split - 1), (split, hi)]
    cps = np.asarray([lo for lo, _ in blocks], dtype=np.int64)
    return segmentation_from_changepoints(cells, model, pen, cps)


def greedy_bottomup(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
) -> Segmentation:
    """Agglomerative merging: start with every cell alone, merge the best pair, repeat.

    Merges whichever adjacent pair improves the total most and stops
    when no merge helps.  Like the top-down variant it is locally
    optimal only.
    """
    n = cells.n_cells
    if n < 1:
        raise InputError("cannot segment zero cells")
    pen = penalty_value(penalty)
    table = block_value_table(cells, model, pen)
    blocks = [(i, i) for i in range(1, n + 1)]
    while len(blocks) > 1:
        best_gain = 0.0
        best_idx = None
        for idx in range(len(blocks) - 1):
            lo1, hi1 = blocks[idx]
            lo2, hi2 = blocks[idx + 1]
            gain = table[lo1, hi2] - (table[lo1, hi1] + table[lo2, hi2])
            if gain > best_gain:
                best_gain = gain
                best_idx = idx
        if best_idx is None:
            break
        lo1, _ = blocks[best_idx]
        _, hi2 = blocks[best_idx + 1]
        blocks[best_idx : best_idx + 2] = [(lo1, hi2)]
    cps = np.asarray([lo for lo, _ in blocks], dtype=np.int64)
    return segmentation_from_changepoints(cells, model, pen, cps)
