"""Data cells: the unit-of-work representation for interval data.

All three input flavours (event times, pre-binned counts, weighted
measurements) normalize into a :class:`DataCells`: an ordered tiling of
an interval into contiguous cells with positive widths, plus prefix-sum
arrays that make any contiguous block's sufficient statistics an O(1)
subtraction.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InputError, InternalError
from .kernels import prefix_compensated

_WIDTH_SUM_RTOL = 1e-12


class CellKind(enum.Enum):
    EVENTS = "events"
    BINS = "bins"
    MEASURES = "measures"


@dataclass(frozen=True)
class BlockStats:
    """Sufficient statistics of one contiguous block of cells."""

    n_events: int
    duration: float
    sum_w: float
    sum_wx: float


@dataclass(frozen=True)
class DataCells:
    """Immutable tiling of ``[interval_start, interval_end]`` into data cells.

    ``prefix_*`` arrays have length ``n_cells + 1`` with a leading zero,
    so the statistics of cells ``i..j`` (1-based, inclusive) are plain
    differences ``prefix[j] - prefix[i - 1]``.  Arrays are read-only;
    treat instances as shareable across threads.
    """

    kind: CellKind
    n_cells: int
    interval_start: float
    interval_end: float
    edges: np.ndarray  # cell boundary times, length n_cells + 1
    widths: np.ndarray
    counts: Optional[np.ndarray]  # events per cell (Events/Bins)
    values: Optional[np.ndarray]  # measured values (Measures)
    weights: Optional[np.ndarray]  # 1 / sigma^2 (Measures)
    prefix_counts: Optional[np.ndarray]
    prefix_widths: np.ndarray
    prefix_w: Optional[np.ndarray]
    prefix_wx: Optional[np.ndarray]


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


def _build(
    kind: CellKind,
    edges: np.ndarray,
    counts: Optional[np.ndarray],
    values: Optional[np.ndarray],
    weights: Optional[np.ndarray],
) -> DataCells:
    widths = np.diff(edges)
    n = widths.size
    prefix_widths = prefix_compensated(widths)
    span = edges[-1] - edges[0]
    if abs(prefix_widths[-1] - span) > _WIDTH_SUM_RTOL * abs(span):
        raise InternalError("cell widths do not sum to the interval length")
    prefix_counts = None
    if counts is not None:
        prefix_counts = _freeze(prefix_compensated(counts.astype(np.float64)))
    prefix_w = prefix_wx = None
    if weights is not None:
        prefix_w = _freeze(prefix_compensated(weights))
        prefix_wx = _freeze(prefix_compensated(weights * values))
    return DataCells(
        kind=kind,
        n_cells=n,
        interval_start=float(edges[0]),
        interval_end=float(edges[-1]),
        edges=_freeze(edges),
        widths=_freeze(widths),
        counts=_freeze(counts) if counts is not None else None,
        values=_freeze(values) if values is not None else None,
        weights=_freeze(weights) if weights is not None else None,
        prefix_counts=prefix_counts,
        prefix_widths=_freeze(prefix_widths),
        prefix_w=prefix_w,
        prefix_wx=prefix_wx,
    )


def _check_sorted(times: np.ndarray, strict: bool) -> None:
    if strict:
        bad = np.flatnonzero(np.diff(times) <= 0)
        if bad.size:
            i = int(bad[0]) + 1
            raise InputError(
                f"times must be strictly increasing; times[{i}]={times[i]!r} "
                f"does not exceed times[{i - 1}]={times[i - 1]!r}"
            )
    else:
        bad = np.flatnonzero(np.diff(times) < 0)
        if bad.size:
            i = int(bad[0]) + 1
            raise InputError(
                f"times must be sorted ascending; times[{i}]={times[i]!r} "
                f"is below times[{i - 1}]={times[i - 1]!r}"
            )


def _midpoint_edges(distinct: np.ndarray, t0: float, t1: float) -> np.ndarray:
    # Each distinct time owns the half-open neighbourhood up to the
    # midpoints toward its neighbours, clipped to the interval ends.
    mids = (distinct[:-1] + distinct[1:]) * 0.5
    edges = np.concatenate(([t0], mids, [t1]))
    bad = np.flatnonzero(np.diff(edges) <= 0)
    if bad.size:
        k = int(bad[0])
        raise InputError(
            f"cell width would be 0 around t={distinct[min(k, distinct.size - 1)]!r}; "
            "times are too closely spaced for distinct cells"
        )
    return edges


def cells_from_events(
    times: Sequence[float], interval: Optional[tuple[float, float]] = None
) -> DataCells:
    """Build event cells from sorted event times.

    Parameters
    ----------
    times : sorted 1-d array-like of event timestamps.  Duplicates are
        allowed and collapse into a single multi-count cell.
    interval : optional (start, end) observation window containing all
        times.  Defaults to ``(times[0], times[-1])``.

    Each distinct time owns the cell reaching to the midpoints toward
    its neighbours; the first and last cells are clipped at the interval
    bounds.
    """
    t = np.ascontiguousarray(times, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise InputError("need a non-empty 1-d array of event times")
    _check_sorted(t, strict=False)
    if interval is None:
        t0, t1 = float(t[0]), float(t[-1])
        if t1 <= t0:
            raise InputError(
                f"all events at t={t0!r}: cell width would be 0; "
                "supply an interval wider than the data"
            )
    else:
        t0, t1 = float(interval[0]), float(interval[1])
        if not t1 > t0:
            raise InputError(f"empty interval: start {t0!r} must lie below end {t1!r}")
        if t[0] < t0 or t[-1] > t1:
            i = 0 if t[0] < t0 else t.size - 1
            raise InputError(f"times[{i}]={t[i]!r} lies outside the interval [{t0!r}, {t1!r}]")
    distinct, counts = np.unique(t, return_counts=True)
    edges = _midpoint_edges(distinct, t0, t1)
    return _build(CellKind.EVENTS, edges, counts.astype(np.int64), None, None)


def cells_from_bins(edges: Sequence[float], counts: Sequence[int]) -> DataCells:
    """Build cells from contiguous bins: ``counts[i]`` events in ``[edges[i], edges[i+1])``."""
    e = np.ascontiguousarray(edges, dtype=np.float64)
    c = np.asarray(counts)
    if e.ndim != 1 or e.size < 2:
        raise InputError("need at least two bin edges")
    if c.shape != (e.size - 1,):
        raise InputError(f"expected {e.size - 1} counts for {e.size} edges, got {c.size}")
    bad = np.flatnonzero(np.diff(e) <= 0)
    if bad.size:
        i = int(bad[0]) + 1
        raise InputError(f"bin edges must increase strictly; violation at index {i}")
    if not np.issubdtype(c.dtype, np.integer):
        if not np.all(np.equal(np.mod(c, 1), 0)):
            raise InputError("bin counts must be integers")
        c = c.astype(np.int64)
    if np.any(c < 0):
        i = int(np.flatnonzero(c < 0)[0])
        raise InputError(f"bin counts must be non-negative; counts[{i}]={int(c[i])}")
    return _build(CellKind.BINS, e.copy(), np.ascontiguousarray(c, dtype=np.int64), None, None)


def cells_from_measures(
    times: Sequence[float],
    values: Sequence[float],
    sigmas: Sequence[float],
    interval: Optional[tuple[float, float]] = None,
) -> DataCells:
    """Build measurement cells from (time, value, sigma) triples.

    Times must be strictly increasing (two samples at one instant would
    give a zero-width cell).  Cell widths follow the same midpoint rule
    as :func:`cells_from_events`; weights are ``1 / sigma**2``.
    """
    t = np.ascontiguousarray(times, dtype=np.float64)
    x = np.ascontiguousarray(values, dtype=np.float64)
    s = np.ascontiguousarray(sigmas, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise InputError("need a non-empty 1-d array of sample times")
    if x.shape != t.shape or s.shape != t.shape:
        raise InputError("times, values and sigmas must have matching lengths")
    _check_sorted(t, strict=True)
    bad = np.flatnonzero(s <= 0)
    if bad.size:
        i = int(bad[0])
        raise InputError(f"sigmas must be positive; sigmas[{i}]={s[i]!r}")
    if interval is None:
        t0, t1 = float(t[0]), float(t[-1])
        if t1 <= t0:
            raise InputError(
                f"single sample at t={t0!r}: supply an interval wider than the data"
            )
    else:
        t0, t1 = float(interval[0]), float(interval[1])
        if not t1 > t0:
            raise InputError(f"empty interval: start {t0!r} must lie below end {t1!r}")
        if t[0] < t0 or t[-1] > t1:
            i = 0 if t[0] < t0 else t.size - 1
            raise InputError(f"times[{i}]={t[i]!r} lies outside the interval [{t0!r}, {t1!r}]")
    edges = _midpoint_edges(t, t0, t1)
    w = 1.0 / (s * s)
    return _build(CellKind.MEASURES, edges, None, x.copy(), w)


def cells_from_event_gaps(times: Sequence[float], t_anchor: float) -> DataCells:
    """Build causal event cells: each cell spans from the previous event.

    This is the streaming construction: cell i covers
    ``(times[i-1], times[i]]`` (the first cell starts at ``t_anchor``),
    so appending an event never changes existing cells.  Times must
    increase strictly and exceed ``t_anchor``.
    """
    t = np.ascontiguousarray(times, dtype=np.float64)
    if t.ndim != 1 or t.size == 0:
        raise InputError("need a non-empty 1-d array of event times")
    _check_sorted(t, strict=True)
    if t[0] <= t_anchor:
        raise InputError(
            f"times[0]={t[0]!r} must lie strictly after the anchor t0={t_anchor!r}"
        )
    edges = np.concatenate(([t_anchor], t))
    counts = np.ones(t.size, dtype=np.int64)
    return _build(CellKind.EVENTS, edges, counts, None, None)


def block_stats(cells: DataCells, i: int, j: int) -> BlockStats:
    """Sufficient statistics of cells ``i..j`` (1-based, inclusive), in O(1)."""
    if not 1 <= i <= j <= cells.n_cells:
        raise InputError(
            f"block indices must satisfy 1 <= i <= j <= {cells.n_cells}, got i={i}, j={j}"
        )
    n_events = 0
    if cells.prefix_counts is not None:
        n_events = int(cells.prefix_counts[j] - cells.prefix_counts[i - 1])
    sum_w = sum_wx = 0.0
    if cells.prefix_w is not None:
        sum_w = float(cells.prefix_w[j] - cells.prefix_w[i - 1])
        sum_wx = float(cells.prefix_wx[j] - cells.prefix_wx[i - 1])
    duration = float(cells.prefix_widths[j] - cells.prefix_widths[i - 1])
    return BlockStats(n_events=n_events, duration=duration, sum_w=sum_w, sum_wx=sum_wx)
