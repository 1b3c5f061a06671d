"""Block fitness models and the per-block penalty.

A fitness model maps a block's sufficient statistics to a scalar that is
additive over the blocks of a partition.  Larger is better.  The two
shipped families are maximum-likelihood fitnesses with all
partition-independent terms dropped:

* Poisson (piecewise-constant rate): ``N * (ln N - ln T)``, defined as 0
  for an empty block;
* Gaussian (piecewise-constant level, known per-point sigma):
  ``(sum wx)**2 / (2 sum w)`` with weights ``w = 1 / sigma**2``.

The optimizers subtract a constant penalty once per block, which acts as
a prior on the number of blocks.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

from . import kernels
from .cells import BlockStats, CellKind, DataCells
from .errors import InputError


class ModelKind(str, enum.Enum):
    POISSON_EVENTS = "poisson_events"
    POISSON_BINS = "poisson_bins"
    GAUSSIAN_CONST = "gaussian_const"
    CUSTOM = "custom"


_KIND_PAIRING = {
    ModelKind.POISSON_EVENTS: CellKind.EVENTS,
    ModelKind.POISSON_BINS: CellKind.BINS,
    ModelKind.GAUSSIAN_CONST: CellKind.MEASURES,
}


def poisson_fitness(stats: BlockStats) -> float:
    """Poisson block fitness ``N * (ln N - ln T)``; 0 when the block is empty."""
    if stats.duration <= 0.0:
        raise InputError(f"block duration must be positive, got {stats.duration!r}")
    return float(kernels.poisson_block(float(stats.n_events), stats.duration))


def gaussian_fitness(stats: BlockStats) -> float:
    """Gaussian constant-level block fitness ``(sum wx)**2 / (2 sum w)``."""
    if stats.sum_w <= 0.0:
        raise InputError(f"block weight sum must be positive, got {stats.sum_w!r}")
    return float(kernels.gaussian_block(stats.sum_wx, stats.sum_w))


@dataclass(frozen=True)
class FitnessModel:
    """A block fitness with an optional constant per-block offset.

    ``offset`` is subtracted from every block's raw fitness; shifting a
    model by the penalty value and running with penalty 0 reproduces the
    penalized run bit-for-bit, because the engine applies the two
    subtractions separately and in a fixed order.

    ``evaluator`` is only consulted for ``CUSTOM`` models: any callable
    mapping :class:`BlockStats` to a float, evaluated on a slower
    generic path.  The shipped kinds run on the compiled kernels.
    """

    kind: ModelKind
    offset: float = 0.0
    evaluator: Optional[Callable[[BlockStats], float]] = None

    def __post_init__(self):
        if not math.isfinite(self.offset):
            raise InputError(f"model offset must be finite, got {self.offset!r}")
        if self.kind is ModelKind.CUSTOM and self.evaluator is None:
            raise InputError("custom models need an evaluator")

    def raw_fitness(self, stats: BlockStats) -> float:
        if self.kind in (ModelKind.POISSON_EVENTS, ModelKind.POISSON_BINS):
            return poisson_fitness(stats)
        if self.kind is ModelKind.GAUSSIAN_CONST:
            return gaussian_fitness(stats)
        return float(self.evaluator(stats))

    def block_fitness(self, stats: BlockStats) -> float:
        """Raw fitness minus the model offset."""
        return self.raw_fitness(stats) - self.offset

    def shifted(self, delta: float) -> "FitnessModel":
        """This model with ``delta`` added to the per-block offset."""
        return FitnessModel(self.kind, self.offset + delta, self.evaluator)

    def validate_for(self, cells: DataCells) -> None:
        expected = _KIND_PAIRING.get(self.kind)
        if expected is not None and cells.kind is not expected:
            raise InputError(
                f"model {self.kind.value} expects {expected.value} cells, "
                f"got {cells.kind.value}"
            )


def poisson_events_model(offset: float = 0.0) -> FitnessModel:
    return FitnessModel(ModelKind.POISSON_EVENTS, offset)


def poisson_bins_model(offset: float = 0.0) -> FitnessModel:
    return FitnessModel(ModelKind.POISSON_BINS, offset)


def gaussian_model(offset: float = 0.0) -> FitnessModel:
    return FitnessModel(ModelKind.GAUSSIAN_CONST, offset)


def custom_model(evaluator: Callable[[BlockStats], float], offset: float = 0.0) -> FitnessModel:
    return FitnessModel(ModelKind.CUSTOM, offset, evaluator)


@dataclass(frozen=True)
class Penalty:
    """Constant fitness subtracted once per block (must be >= 0)."""

    per_block: float

    def __post_init__(self):
        if not (math.isfinite(self.per_block) and self.per_block >= 0.0):
            raise InputError(f"penalty must be finite and >= 0, got {self.per_block!r}")


def default_penalty(n_cells: Union[int, float]) -> Penalty:
    """The default per-block penalty, ``ln(n_cells)``."""
    if n_cells < 1:
        raise InputError(f"n_cells must be >= 1, got {n_cells!r}")
    return Penalty(math.log(n_cells))


def penalty_value(penalty: Union[Penalty, float, int, None]) -> float:
    """Normalize a Penalty | float | None (-> 0.0) to a plain float."""
    if penalty is None:
        return 0.0
    if isinstance(penalty, Penalty):
        return penalty.per_block
    value = float(penalty)
    Penalty(value)  # reuse validation
    return value
