"""Timing harness: quadratic-scaling check and numba-vs-numpy comparison.

Times the DP sweep kernels directly on synthetic Poisson cells.  The
algorithm does exactly N*(N+1)/2 fitness evaluations, so doubling N
should scale wall time by about 4x (between 3x and 6x in practice once
N is large enough to swamp constant overheads).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InputError
from .kernels import _numpy_impl

try:
    from .kernels import _numba_impl
except ImportError:  # pragma: no cover - numba is a hard dep, but stay graceful
    _numba_impl = None

NEG_INF = float("-inf")


@dataclass(frozen=True)
class BenchPoint:
    """Median timing of one backend at one problem size."""

    backend: str
    n_cells: int
    median_seconds: float
    n_fitness_evals: int
    runs: tuple[float, ...] = field(repr=False, default=())


def _impl(backend: str):
    if backend == "numpy":
        return _numpy_impl
    if backend == "numba":
        if _numba_impl is None:
            raise InputError("numba backend is not available")
        return _numba_impl
    raise InputError(f"unknown backend {backend!r}; expected 'numba' or 'numpy'")


def _make_inputs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    counts = rng.integers(0, 6, size=n).astype(np.float64)
    widths = rng.uniform(0.1, 1.0, size=n)
    a1 = _numpy_impl.prefix_compensated(counts)
    a2 = _numpy_impl.prefix_compensated(widths)
    return a1, a2


def time_sweep(
    backend: str,
    n_cells: int,
    repeats: int = 5,
    seed: int = 20260822,
    penalty: Optional[float] = None,
) -> BenchPoint:
    """Median wall time of a full DP sweep at one size, after a warmup run."""
    if n_cells < 1:
        raise InputError("need at least one cell")
    if repeats < 1:
        raise InputError("need at least one repeat")
    impl = _impl(backend)
    a1, a2 = _make_inputs(n_cells, seed)
    pen = float(np.log(n_cells)) if penalty is None else float(penalty)
    opt = np.full(n_cells + 1, NEG_INF)
    lastchange = np.zeros(n_cells + 1, dtype=np.int64)

    def run() -> int:
        opt[0] = 0.0
        return int(
            impl.dp_sweep(
                impl.MODEL_POISSON, a1, a2, 0.0, pen, 1, opt, lastchange, 1, n_cells
            )
        )

    evals = run()  # warmup: triggers JIT compilation on the numba path
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        run()
        samples.append(time.perf_counter() - t0)
    return BenchPoint(
        backend=backend,
        n_cells=n_cells,
        median_seconds=float(np.median(samples)),
        n_fitness_evals=evals,
        runs=tuple(samples),
    )


def run_scaling(
    sizes: Sequence[int],
    backends: Sequence[str] = ("numba", "numpy"),
    repeats: int = 5,
    seed: int = 20260822,
) -> list[BenchPoint]:
    """Time every (backend, size) pair; returns points in backend-major order."""
    points = []
    for backend in backends:
        for n in sizes:
            points.append(time_sweep(backend, int(n), repeats=repeats, seed=seed))
    return points


def scaling_ratios(points: Sequence[BenchPoint]) -> list[tuple[str, int, int, float]]:
    """(backend, n, 2n, time ratio) for every size pair n -> 2n present."""
    by_backend: dict[str, dict[int, BenchPoint]] = {}
    for p in points:
        by_backend.setdefault(p.backend, {})[p.n_cells] = p
    out = []
    for backend, sized in sorted(by_backend.items()):
        for n, p in sorted(sized.items()):
            q = sized.get(2 * n)
            if q is not None and p.median_seconds > 0:
                out.append((backend, n, 2 * n, q.median_seconds / p.median_seconds))
    return out


def format_report(points: Sequence[BenchPoint]) -> str:
    """Human-readable table of timings plus doubling ratios."""
    lines = [f"{'backend':<8} {'n_cells':>8} {'median_s':>12} {'evals':>12}"]
    for p in points:
        lines.append(
            f"{p.backend:<8} {p.n_cells:>8} {p.median_seconds:>12.6f} {p.n_fitness_evals:>12}"
        )
    ratios = scaling_ratios(points)
    if ratios:
        lines.append("")
        lines.append(f"{'backend':<8} {'n -> 2n':>16} {'time ratio':>12}")
        for backend, n, n2, r in ratios:
            lines.append(f"{backend:<8} {f'{n} -> {n2}':>16} {r:>12.2f}")
    return "\n".join(lines)
