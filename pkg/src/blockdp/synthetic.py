"""Synthetic data generators for tests, benchmarks and the CLI demo mode."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .errors import InputError


def piecewise_poisson_events(
    rates: Sequence[float],
    durations: Sequence[float],
    rng: np.random.Generator,
    t0: float = 0.0,
) -> tuple[np.ndarray, tuple[float, float]]:
    """Event times from a piecewise-constant-rate Poisson process.

    Each segment i contributes Poisson(rates[i] * durations[i]) events
    placed uniformly within it.  Returns the sorted event times and the
    full observation interval (t0, t0 + sum of durations).
    """
    rates = np.asarray(rates, dtype=np.float64)
    durations = np.asarray(durations, dtype=np.float64)
    if rates.size != durations.size or rates.size == 0:
        raise InputError("rates and durations must be equal-length and non-empty")
    if np.any(rates < 0) or np.any(durations <= 0):
        raise InputError("rates must be >= 0 and durations > 0")
    chunks = []
    t = t0
    for lam, dur in zip(rates, durations):
        n = rng.poisson(lam * dur)
        if n:
            chunks.append(rng.uniform(t, t + dur, size=n))
        t += dur
    times = np.sort(np.concatenate(chunks)) if chunks else np.empty(0)
    return times, (t0, t)


def two_rate_events(
    rate_lo: float,
    rate_hi: float,
    n_events: int,
    rng: np.random.Generator,
    change_frac: float = 0.5,
) -> tuple[np.ndarray, tuple[float, float], float]:
    """Exactly n_events from two constant-rate regimes joined at one change time.

    Event counts per side are split in proportion to rate * duration on
    a unit interval with the change at ``change_frac``; times are
    uniform within each side.  Returns (times, interval, change_time).
    """
    if n_events < 2:
        raise InputError("need at least 2 events")
    if not 0.0 < change_frac < 1.0:
        raise InputError("change_frac must lie strictly inside (0, 1)")
    w_lo = rate_lo * change_frac
    w_hi = rate_hi * (1.0 - change_frac)
    n_lo = int(round(n_events * w_lo / (w_lo + w_hi)))
    n_lo = min(max(n_lo, 1), n_events - 1)
    lo = rng.uniform(0.0, change_frac, size=n_lo)
    hi = rng.uniform(change_frac, 1.0, size=n_events - n_lo)
    times = np.sort(np.concatenate([lo, hi]))
    return times, (0.0, 1.0), change_frac


def constant_rate_events(
    rate: float,
    duration: float,
    rng: np.random.Generator,
    t0: float = 0.0,
) -> tuple[np.ndarray, tuple[float, float]]:
    """Homogeneous Poisson events on (t0, t0 + duration)."""
    return piecewise_poisson_events([rate], [duration], rng, t0=t0)


def random_measures(
    n: int,
    rng: np.random.Generator,
    n_segments: int = 1,
    level_scale: float = 3.0,
    sigma: float = 1.0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Regularly-spaced noisy point measures with piecewise-constant mean.

    Returns (times, values, sigmas); sigmas are constant.  Used to
    exercise the weighted-mean model on data with known structure.
    """
    if n < 1 or n_segments < 1 or n_segments > n:
        raise InputError("need 1 <= n_segments <= n")
    times = np.arange(n, dtype=np.float64)
    bounds = np.linspace(0, n, n_segments + 1).astype(np.int64)
    means = np.empty(n)
    for s in range(n_segments):
        means[bounds[s] : bounds[s + 1]] = level_scale * rng.standard_normal()
    values = means + sigma * rng.standard_normal(n)
    sigmas = np.full(n, float(sigma))
    return times, values, sigmas


def random_cells_arrays(
    n: int,
    rng: np.random.Generator,
    kind: str = "events",
    max_count: int = 5,
) -> dict:
    """Raw ingredients for one randomized cells object of the given kind.

    Small-N fuzz helper shared by tests: returns a dict of constructor
    arguments (not the cells object itself) so callers can also probe
    validation paths.
    """
    if kind == "events":
        gaps = rng.uniform(0.05, 1.0, size=n)
        times = np.cumsum(gaps)
        pad = rng.uniform(0.05, 1.0, size=2)
        return {"times": times, "interval": (times[0] - pad[0], times[-1] + pad[1])}
    if kind == "bins":
        edges = np.cumsum(rng.uniform(0.05, 1.0, size=n + 1))
        counts = rng.integers(0, max_count + 1, size=n)
        return {"edges": edges, "counts": counts}
    if kind == "measures":
        gaps = rng.uniform(0.05, 1.0, size=n)
        times = np.cumsum(gaps)
        values = rng.normal(0.0, 2.0, size=n)
        sigmas = rng.uniform(0.3, 2.0, size=n)
        pad = rng.uniform(0.05, 1.0, size=2)
        interval = (float(times[0] - pad[0]), float(times[-1] + pad[1]))
        return {"times": times, "values": values, "sigmas": sigmas,
                "interval": interval}
    raise InputError(f"unknown kind {kind!r}")


def poisson_cell_inputs(
    n_cells: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Random per-cell (counts, widths) for direct Poisson DP benchmarks."""
    if n_cells < 1:
        raise InputError("need at least one cell")
    counts = rng.integers(0, 6, size=n_cells).astype(np.float64)
    widths = rng.uniform(0.1, 1.0, size=n_cells)
    return counts, widths
