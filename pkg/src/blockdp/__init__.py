"""blockdp: exact optimal partitioning of interval data into constant-fitness blocks.

Given N ordered cells (event cells, occupancy bins, or weighted point
measures), the engine finds the partition into contiguous blocks that
maximizes total block fitness minus a constant per-block penalty --
exactly, over all 2**(N-1) possible partitions, in O(N^2) time.  The
same recurrence runs incrementally, one cell at a time, for change
detection on live streams.

Hot kernels are numba-compiled with a pure-numpy fallback; select with
the ``BLOCKDP_BACKEND`` environment variable (``auto``, ``numba``,
``numpy``).
"""

from . import synthetic
from .bench import BenchPoint, run_scaling, scaling_ratios
from .baselines import (
    OracleResult,
    exact_block_count_predicate,
    exhaustive,
    greedy_bottomup,
    greedy_topdown,
    min_block_size_predicate,
)
from .cells import (
    BlockStats,
    CellKind,
    DataCells,
    block_stats,
    cells_from_bins,
    cells_from_event_gaps,
    cells_from_events,
    cells_from_measures,
)
from .engine import (
    BlockSummary,
    DpState,
    Segmentation,
    backtrack,
    batch_state,
    block_value,
    block_value_table,
    fresh_state,
    optimize,
    optimize_fixed_k,
    optimize_min_size,
    push_cell,
    segmentation_from_changepoints,
)
from .errors import BlockdpError, InputError, InternalError, StateMismatchError
from .fitness import (
    FitnessModel,
    ModelKind,
    Penalty,
    custom_model,
    default_penalty,
    gaussian_fitness,
    gaussian_model,
    penalty_value,
    poisson_bins_model,
    poisson_events_model,
    poisson_fitness,
)
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BenchPoint",
    "BlockStats",
    "BlockSummary",
    "BlockdpError",
    "CellKind",
    "DataCells",
    "DpState",
    "FitnessModel",
    "InputError",
    "InternalError",
    "ModelKind",
    "OracleResult",
    "Penalty",
    "Segmentation",
    "StateMismatchError",
    "__version__",
    "backtrack",
    "batch_state",
    "block_stats",
    "block_value",
    "block_value_table",
    "cells_from_bins",
    "cells_from_event_gaps",
    "cells_from_events",
    "cells_from_measures",
    "custom_model",
    "default_penalty",
    "exact_block_count_predicate",
    "exhaustive",
    "fresh_state",
    "gaussian_fitness",
    "gaussian_model",
    "greedy_bottomup",
    "greedy_topdown",
    "min_block_size_predicate",
    "optimize",
    "optimize_fixed_k",
    "optimize_min_size",
    "penalty_value",
    "poisson_bins_model",
    "poisson_events_model",
    "poisson_fitness",
    "push_cell",
    "run_scaling",
    "scaling_ratios",
    "segmentation_from_changepoints",
    "synthetic",
]
