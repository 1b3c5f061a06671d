"""Exact optimal-partitioning engine.

Finds the partition of N ordered cells into contiguous blocks that
maximizes the summed block fitness minus a constant penalty per block.
The search is exact over all 2**(N-1) partitions yet costs O(N^2):
``opt[n]``, the best value over the first n cells, satisfies

    opt[n] = max over j in 1..n of  opt[j-1] + (fitness(j, n) - penalty)

with opt[0] = 0.  ``lastchange[n]`` records the smallest maximizing j
(ties break toward the longest final block), and following it backwards
from n = N reads off the optimal changepoints.  Evaluating row n costs n
fitness evaluations, so a full run makes exactly N*(N+1)/2 of them.

The state grows one appended row at a time, so the batch optimizer and
repeated :func:`push_cell` calls produce bit-identical arrays by
construction -- they run the same kernel rows in the same order.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from . import kernels
from .cells import BlockStats, CellKind, DataCells, block_stats
from .errors import InputError, InternalError, StateMismatchError
from .fitness import FitnessModel, ModelKind, Penalty, penalty_value

NEG_INF = float("-inf")

_INITIAL_CAPACITY = 16


def _model_arrays(cells: DataCells, model: FitnessModel):
    """Map (cells, model) to (kernel model id, a1, a2); None for custom models."""
    if model.kind in (ModelKind.POISSON_EVENTS, ModelKind.POISSON_BINS):
        return kernels.MODEL_POISSON, cells.prefix_counts, cells.prefix_widths
    if model.kind is ModelKind.GAUSSIAN_CONST:
        return kernels.MODEL_GAUSSIAN, cells.prefix_wx, cells.prefix_w
    return None


def _sweep(
    cells: DataCells,
    model: FitnessModel,
    penalty: float,
    min_block: int,
    opt: np.ndarray,
    lastchange: np.ndarray,
    n_start: int,
    n_end: int,
) -> int:
    """Fill recurrence rows n_start..n_end; returns fitness evaluations done."""
    dispatch = _model_arrays(cells, model)
    if dispatch is not None:
        model_id, a1, a2 = dispatch
        return int(
            kernels.dp_sweep(
                model_id, a1, a2, model.offset, penalty, min_block,
                opt, lastchange, n_start, n_end,
            )
        )
    # Generic path for custom evaluators: same recurrence, same order.
    evals = 0
    for n in range(n_start, n_end + 1):
        best = NEG_INF
        best_j = 0
        j_hi = n - min_block + 1
        for j in range(1, n + 1):
            f = float(model.evaluator(block_stats(cells, j, n)))
            evals += 1
            if j <= j_hi and (j == 1 or j > min_block):
                c = opt[j - 1] + ((f - model.offset) - penalty)
                if c > best:
                    best = c
                    best_j = j
        opt[n] = best
        lastchange[n] = best_j
    return evals


class DpState:
    """Growable optimizer state over a prefix of the cells.

    ``opt`` and ``lastchange`` are append-only: processing cell n+1
    writes index n+1 and never touches earlier entries, which is what
    makes incremental and batch runs bit-identical.  The first push
    binds the state to its cells, model and penalty; later pushes
    against different ones are rejected.
    """

    __slots__ = (
        "_opt", "_lastchange", "n_processed", "n_fitness_evals",
        "_cells", "_model", "_penalty",
    )

    def __init__(self) -> None:
        self._opt = np.full(_INITIAL_CAPACITY, NEG_INF)
        self._opt[0] = 0.0
        self._lastchange = np.zeros(_INITIAL_CAPACITY, dtype=np.int64)
        self.n_processed = 0
        self.n_fitness_evals = 0
        self._cells: Optional[DataCells] = None
        self._model: Optional[FitnessModel] = None
        self._penalty: float = 0.0

    @property
    def opt(self) -> np.ndarray:
        """Best penalized fitness per prefix; read-only view of length n_processed + 1."""
        view = self._opt[: self.n_processed + 1]
        view.flags.writeable = False
        return view

    @property
    def lastchange(self) -> np.ndarray:
        """Smallest optimal final-block start per prefix; read-only view."""
        view = self._lastchange[: self.n_processed + 1]
        view.flags.writeable = False
        return view

    @property
    def penalty(self) -> float:
        return self._penalty

    @property
    def model(self) -> Optional[FitnessModel]:
        return self._model

    def _reserve(self, size: int) -> None:
        if size <= self._opt.size:
            return
        cap = self._opt.size
        while cap < size:
            cap *= 2
        opt = np.full(cap, NEG_INF)
        opt[: self._opt.size] = self._opt
        lc = np.zeros(cap, dtype=np.int64)
        lc[: self._lastchange.size] = self._lastchange
        self._opt = opt
        self._lastchange = lc

    def _bind(self, cells: DataCells, model: FitnessModel, penalty: float) -> None:
        if self._model is None:
            self._cells, self._model, self._penalty = cells, model, penalty
            return
        if (
            model.kind is not self._model.kind
            or model.offset != self._model.offset
            or model.evaluator is not self._model.evaluator
        ):
            raise StateMismatchError("state was built with a different fitness model")
        if penalty != self._penalty:
            raise StateMismatchError(
                f"state was built with penalty {self._penalty!r}, got {penalty!r}"
            )
        if cells is self._cells:
            return
        # A rebuilt cells object is fine as long as the prefixes it
        # shares with the bound one are identical (streaming rebuilds).
        n = self.n_processed + 1
        old = self._cells
        for a, b in (
            (old.prefix_counts, cells.prefix_counts),
            (old.prefix_widths, cells.prefix_widths),
            (old.prefix_w, cells.prefix_w),
            (old.prefix_wx, cells.prefix_wx),
        ):
            if (a is None) != (b is None):
                raise StateMismatchError("cells do not match the state (different kind)")
            if a is not None and not np.array_equal(a[:n], b[:n]):
                raise StateMismatchError(
                    "cells do not match the state (prefix statistics differ)"
                )
        self._cells = cells


def fresh_state() -> DpState:
    """An empty optimizer state (opt = [0.0], nothing processed)."""
    return DpState()


def push_cell(
    state: DpState,
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
) -> tuple[DpState, int]:
    """Process the next unprocessed cell; returns (state, latest_block_start).

    ``latest_block_start`` is the 1-based first cell of the final block
    of the optimal partition of the processed prefix -- the quantity a
    real-time consumer watches for change.
    """
    model.validate_for(cells)
    pen = penalty_value(penalty)
    n_next = state.n_processed + 1
    if cells.n_cells < n_next:
        raise InputError(
            f"state has processed {state.n_processed} cells but cells only hold {cells.n_cells}"
        )
    state._bind(cells, model, pen)
    state._reserve(n_next + 1)
    state.n_fitness_evals += _sweep(
        cells, model, pen, 1, state._opt, state._lastchange, n_next, n_next
    )
    state.n_processed = n_next
    return state, int(state._lastchange[n_next])


def batch_state(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
) -> DpState:
    """Run the full recurrence over all cells in one kernel call."""
    model.validate_for(cells)
    if cells.n_cells < 1:
        raise InputError("cannot optimize zero cells")
    pen = penalty_value(penalty)
    state = DpState()
    state._bind(cells, model, pen)
    state._reserve(cells.n_cells + 1)
    state.n_fitness_evals += _sweep(
        cells, model, pen, 1, state._opt, state._lastchange, 1, cells.n_cells
    )
    state.n_processed = cells.n_cells
    return state


def _changepoints_from_lastchange(lastchange: np.ndarray, n: int) -> np.ndarray:
    """Decode changepoints (1-based block starts) by walking lastchange down from n."""
    cps = []
    while n > 0:
        j = int(lastchange[n])
        if not 1 <= j <= n:
            raise InternalError(f"lastchange[{n}]={j} outside 1..{n}")
        cps.append(j)
        n = j - 1
    cps.reverse()
    return np.asarray(cps, dtype=np.int64)


def backtrack(state: DpState) -> np.ndarray:
    """Changepoints (1-based, starting with 1) of the optimal partition so far."""
    if state.n_processed < 1:
        raise InputError("state has processed no cells yet")
    return _changepoints_from_lastchange(state._lastchange, state.n_processed)


@dataclass(frozen=True)
class BlockSummary:
    """One block of a segmentation: its cell range, time span, stats and estimate."""

    start_cell: int
    end_cell: int
    t_lo: float
    t_hi: float
    stats: BlockStats
    estimate: Optional[float]


@dataclass(frozen=True)
class Segmentation:
    """An optimal (or heuristic) partition of the cells into blocks."""

    changepoints: np.ndarray  # 1-based first cell of each block; starts with 1
    block_edges: np.ndarray  # block boundary times, length n_blocks + 1
    block_summaries: tuple[BlockSummary, ...]
    total_fitness: float  # includes the per-block penalty
    penalty_per_block: float
    model_kind: ModelKind
    n_cells: int
    n_fitness_evals: int

    @property
    def n_blocks(self) -> int:
        return len(self.block_summaries)


def _estimate(model: FitnessModel, stats: BlockStats) -> Optional[float]:
    if model.kind in (ModelKind.POISSON_EVENTS, ModelKind.POISSON_BINS):
        return stats.n_events / stats.duration
    if model.kind is ModelKind.GAUSSIAN_CONST:
        return stats.sum_wx / stats.sum_w
    return None


def block_value(
    cells: DataCells, model: FitnessModel, penalty: Union[Penalty, float, None], i: int, j: int
) -> float:
    """Penalized fitness of block i..j: (raw - offset) - penalty, scalar path."""
    pen = penalty_value(penalty)
    dispatch = _model_arrays(cells, model)
    if dispatch is not None:
        model_id, a1, a2 = dispatch
        if model_id == kernels.MODEL_POISSON:
            raw = kernels.poisson_block(a1[j] - a1[i - 1], a2[j] - a2[i - 1])
        else:
            raw = kernels.gaussian_block(a1[j] - a1[i - 1], a2[j] - a2[i - 1])
    else:
        raw = float(model.evaluator(block_stats(cells, i, j)))
    return (raw - model.offset) - pen


def block_value_table(
    cells: DataCells, model: FitnessModel, penalty: Union[Penalty, float, None]
) -> np.ndarray:
    """Table t[i, j] of penalized block fitness for all 1 <= i <= j <= N."""
    n = cells.n_cells
    pen = penalty_value(penalty)
    out = np.zeros((n + 1, n + 1))
    dispatch = _model_arrays(cells, model)
    if dispatch is not None:
        model_id, a1, a2 = dispatch
        kernels.fill_block_table(model_id, a1, a2, model.offset, pen, out)
    else:
        for i in range(1, n + 1):
            for j in range(i, n + 1):
                f = float(model.evaluator(block_stats(cells, i, j)))
                out[i, j] = (f - model.offset) - pen
    return out


def segmentation_from_changepoints(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
    changepoints: np.ndarray,
    total_fitness: Optional[float] = None,
    n_fitness_evals: int = 0,
) -> Segmentation:
    """Assemble a Segmentation; recomputes the total left-to-right when not given."""
    n = cells.n_cells
    cps = np.asarray(changepoints, dtype=np.int64)
    if cps.size < 1 or cps[0] != 1 or np.any(np.diff(cps) <= 0) or cps[-1] > n:
        raise InternalError(f"invalid changepoints {cps!r} for {n} cells")
    pen = penalty_value(penalty)
    starts = cps
    ends = np.append(cps[1:] - 1, n)
    summaries = []
    total = 0.0
    for i, j in zip(starts, ends):
        stats = block_stats(cells, int(i), int(j))
        summaries.append(
            BlockSummary(
                start_cell=int(i),
                end_cell=int(j),
                t_lo=float(cells.edges[i - 1]),
                t_hi=float(cells.edges[j]),
                stats=stats,
                estimate=_estimate(model, stats),
            )
        )
        total += block_value(cells, model, pen, int(i), int(j))
    if total_fitness is None:
        total_fitness = total
    edges = cells.edges[np.append(starts - 1, n)]
    return Segmentation(
        changepoints=cps,
        block_edges=np.asarray(edges, dtype=np.float64),
        block_summaries=tuple(summaries),
        total_fitness=float(total_fitness),
        penalty_per_block=pen,
        model_kind=model.kind,
        n_cells=n,
        n_fitness_evals=int(n_fitness_evals),
    )


def optimize(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
) -> Segmentation:
    """The exact optimal partition of all cells under the penalized fitness."""
    state = batch_state(cells, model, penalty)
    cps = backtrack(state)
    return segmentation_from_changepoints(
        cells, model, state.penalty, cps,
        total_fitness=float(state.opt[state.n_processed]),
        n_fitness_evals=state.n_fitness_evals,
    )


def optimize_min_size(
    cells: DataCells,
    model: FitnessModel,
    penalty: Union[Penalty, float, None],
    min_size: int,
) -> Segmentation:
    """Exact optimum over partitions whose every block spans >= min_size cells."""
    model.validate_for(cells)
    n = cells.n_cells
    if not isinstance(min_size, (int, np.integer)) or isinstance(min_size, bool):
        raise InputError(f"min_size must be an integer, got {min_size!r}")
    if not 1 <= min_size <= n:
        raise InputError(f"min_size must lie in 1..{n}, got {min_size}")
    pen = penalty_value(penalty)
    opt = np.full(n + 1, NEG_INF)
    opt[0] = 0.0
    lastchange = np.zeros(n + 1, dtype=np.int64)
    evals = _sweep(cells, model, pen, int(min_size), opt, lastchange, 1, n)
    cps = _changepoints_from_lastchange(lastchange, n)
    sizes = np.diff(np.append(cps, n + 1))
    if np.any(sizes < min_size):
        raise InternalError(f"block below min_size={min_size} in {cps!r}")
    return segmentation_from_changepoints(
        cells, model, pen, cps, total_fitness=float(opt[n]), n_fitness_evals=evals
    )


def optimize_fixed_k(cells: DataCells, model: FitnessModel, k: int) -> Segmentation:
    """Exact optimum over partitions with exactly k blocks; no penalty applied."""
    model.validate_for(cells)
    n = cells.n_cells
    if not isinstance(k, (int, np.integer)) or isinstance(k, bool):
        raise InputError(f"k must be an integer, got {k!r}")
    if not 1 <= k <= n:
        raise InputError(f"k must lie in 1..{n}, got {k}")
    k = int(k)
    opt_layers = np.full((k + 1, n + 1), NEG_INF)
    opt_layers[0, 0] = 0.0
    lc_layers = np.zeros((k + 1, n + 1), dtype=np.int64)
    dispatch = _model_arrays(cells, model)
    if dispatch is not None:
        model_id, a1, a2 = dispatch
        evals = int(
            kernels.dp_fixed_k(model_id, a1, a2, model.offset, k, opt_layers, lc_layers)
        )
    else:
        evals = 0
        for m in range(1, n + 1):
            f = float(model.evaluator(block_stats(cells, 1, m)))
            evals += 1
            opt_layers[1, m] = f - model.offset
            lc_layers[1, m] = 1
        for layer in range(2, k + 1):
            for m in range(layer, n + 1):
                best = NEG_INF
                best_j = 0
                for j in range(layer, m + 1):
                    f = float(model.evaluator(block_stats(cells, j, m)))
                    evals += 1
                    c = opt_layers[layer - 1, j - 1] + (f - model.offset)
                    if c > best:
                        best = c
                        best_j = j
                opt_layers[layer, m] = best
                lc_layers[layer, m] = best_j
    cps = np.empty(k, dtype=np.int64)
    pos = n
    for layer in range(k, 0, -1):
        j = int(lc_layers[layer, pos])
        if not 1 <= j <= pos:
            raise InternalError(f"fixed-k backtrack hit lastchange {j} at layer {layer}")
        cps[layer - 1] = j
        pos = j - 1
    return segmentation_from_changepoints(
        cells, model, 0.0, cps,
        total_fitness=float(opt_layers[k, n]),
        n_fitness_evals=evals,
    )
