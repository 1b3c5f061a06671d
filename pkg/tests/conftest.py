"""Shared test helpers: random instance generation across all three data kinds."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

import blockdp as bd

settings.register_profile(
    "blockdp",
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("blockdp")

KINDS = ("events", "bins", "measures")

MODEL_FOR_KIND = {
    "events": bd.poisson_events_model,
    "bins": bd.poisson_bins_model,
    "measures": bd.gaussian_model,
}


def make_cells(rng: np.random.Generator, n: int, kind: str) -> bd.DataCells:
    """One random DataCells instance of the given kind with n cells."""
    raw = bd.synthetic.random_cells_arrays(n, rng, kind=kind)
    if kind == "events":
        return bd.cells_from_events(raw["times"], interval=raw["interval"])
    if kind == "bins":
        return bd.cells_from_bins(raw["edges"], raw["counts"])
    return bd.cells_from_measures(
        raw["times"], raw["values"], raw["sigmas"], interval=raw["interval"]
    )


def make_instance(rng: np.random.Generator, n: int, kind: str):
    """(cells, model) pair of the given kind."""
    return make_cells(rng, n, kind), MODEL_FOR_KIND[kind]()


def rescore(cells: bd.DataCells, model, penalty, changepoints) -> float:
    """Left-to-right re-sum of penalized block values along a partition."""
    cps = np.asarray(changepoints, dtype=np.int64)
    ends = np.append(cps[1:] - 1, cells.n_cells)
    total = 0.0
    for i, j in zip(cps, ends):
        total += bd.block_value(cells, model, penalty, int(i), int(j))
    return total


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)
