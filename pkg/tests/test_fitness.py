"""Fitness models: frozen hand values, algebraic identities, penalty semantics."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import blockdp as bd
from blockdp import BlockStats, InputError

from conftest import KINDS, make_cells, make_instance, rescore


def stats(n=0, t=1.0, w=0.0, wx=0.0):
    return BlockStats(n_events=n, duration=t, sum_w=w, sum_wx=wx)


# ---------------------------------------------------------------------------
# poisson


def test_poisson_empty_block_scores_zero():
    assert bd.poisson_fitness(stats(n=0, t=1.0)) == 0.0


def test_poisson_single_event_unit_duration_scores_zero():
    assert bd.poisson_fitness(stats(n=1, t=1.0)) == 0.0


def test_poisson_hand_value():
    # N * (ln N - ln T) at N=2, T=0.5 is 2 * ln 4.
    got = bd.poisson_fitness(stats(n=2, t=0.5))
    assert got == pytest.approx(2.772588722, abs=1e-9)
    assert got == pytest.approx(2.0 * math.log(4.0), rel=1e-15)


def test_poisson_rejects_nonpositive_duration():
    with pytest.raises(InputError, match="duration"):
        bd.poisson_fitness(stats(n=1, t=0.0))


def test_poisson_translation_invariant_and_dilation_law():
    rng = np.random.default_rng(21)
    for _ in range(50):
        n = int(rng.integers(1, 50))
        t = float(rng.uniform(0.1, 20.0))
        g = bd.poisson_fitness(stats(n=n, t=t))
        # translation: fitness depends only on (n, t), so nothing to move;
        # dilation T -> cT changes the value by exactly -n ln c.
        for c in (2.0, 0.25, 7.5):
            g_dilated = bd.poisson_fitness(stats(n=n, t=c * t))
            assert g_dilated == pytest.approx(g - n * math.log(c), rel=1e-12, abs=1e-12)
            # and back again
            g_back = bd.poisson_fitness(stats(n=n, t=t * c / c))
            assert g_back == pytest.approx(g, rel=1e-12)


def test_poisson_merge_gain_grid():
    # Merging equal-rate blocks changes nothing; merging different-rate
    # blocks never gains more than that (it strictly loses).  Brute-forced
    # over a small grid of (n1, t1, n2, t2).
    def gain(n1, t1, n2, t2):
        merged = bd.poisson_fitness(stats(n=n1 + n2, t=t1 + t2))
        return merged - (bd.poisson_fitness(stats(n=n1, t=t1))
                         + bd.poisson_fitness(stats(n=n2, t=t2)))

    equal_rate_gain = gain(3, 1.5, 6, 3.0)  # both rate 2
    assert equal_rate_gain == pytest.approx(0.0, abs=1e-12)
    for n1 in range(0, 6):
        for n2 in range(0, 6):
            for t1 in (0.5, 1.0, 2.0):
                for t2 in (0.5, 1.0, 2.0):
                    assert gain(n1, t1, n2, t2) <= equal_rate_gain + 1e-12
                    if n1 * t2 == n2 * t1:  # equal rates
                        assert gain(n1, t1, n2, t2) == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------------------
# gaussian


def test_gaussian_zero_value_scores_zero():
    assert bd.gaussian_fitness(stats(w=1.0, wx=0.0)) == 0.0


def test_gaussian_hand_value():
    # two points x=1, w=1 merged: (1+1)^2 / (2*(1+1)) = 1.0
    assert bd.gaussian_fitness(stats(w=2.0, wx=2.0)) == 1.0


def test_gaussian_identical_points_merge_ties_with_split():
    # k identical unit-weight points at x=c: merged fitness (kc)^2/(2k)
    # equals k singleton fitnesses c^2/2 -- all partitions tie exactly.
    for k in (2, 3, 7):
        for c in (0.5, -2.0, 3.25):
            merged = bd.gaussian_fitness(stats(w=float(k), wx=k * c))
            singles = k * bd.gaussian_fitness(stats(w=1.0, wx=c))
            assert merged == pytest.approx(singles, rel=1e-12)


def test_gaussian_sign_flip_invariant():
    rng = np.random.default_rng(22)
    for _ in range(100):
        w = float(rng.uniform(0.1, 5.0))
        wx = float(rng.normal(0, 10))
        assert bd.gaussian_fitness(stats(w=w, wx=wx)) == bd.gaussian_fitness(
            stats(w=w, wx=-wx)
        )


def test_gaussian_rejects_nonpositive_weight():
    with pytest.raises(InputError, match="weight sum"):
        bd.gaussian_fitness(stats(w=0.0, wx=1.0))


# ---------------------------------------------------------------------------
# determinism


@given(st.integers(min_value=0, max_value=1000),
       st.floats(min_value=1e-6, max_value=1e6),
       st.floats(min_value=1e-6, max_value=1e4),
       st.floats(min_value=-1e4, max_value=1e4))
def test_fitness_bitwise_deterministic(n, t, w, wx):
    s = stats(n=n, t=t, w=w, wx=wx)
    assert bd.poisson_fitness(s) == bd.poisson_fitness(s)
    assert bd.gaussian_fitness(s) == bd.gaussian_fitness(s)


def test_fitness_defined_for_empty_block():
    assert math.isfinite(bd.poisson_fitness(stats(n=0, t=2.0)))


# ---------------------------------------------------------------------------
# penalty


def test_default_penalty_values():
    assert bd.default_penalty(1).per_block == 0.0
    assert bd.default_penalty(math.e ** 3).per_block == pytest.approx(3.0, rel=1e-12)
    assert bd.default_penalty(10).per_block == pytest.approx(math.log(10), rel=1e-15)


def test_penalty_rejects_negative_and_nonfinite():
    with pytest.raises(InputError):
        bd.Penalty(per_block=-0.5)
    with pytest.raises(InputError):
        bd.Penalty(per_block=float("nan"))


def test_penalty_value_normalizes():
    assert bd.penalty_value(None) == 0.0
    assert bd.penalty_value(2.5) == 2.5
    assert bd.penalty_value(bd.Penalty(per_block=1.25)) == 1.25
    with pytest.raises(InputError):
        bd.penalty_value(-1.0)


def test_zero_penalty_degenerates_to_singletons_documented():
    # With no complexity penalty, distinct event times (distinct cell
    # rates) make every split profitable: the optimum is all singletons.
    # This is permitted, not rejected.
    times = np.array([0.0, 1.0, 2.5, 4.75, 5.0])
    cells = bd.cells_from_events(times, interval=(0.0, 5.0))
    seg = bd.optimize(cells, bd.poisson_events_model(), 0.0)
    assert seg.n_blocks == cells.n_cells


# ---------------------------------------------------------------------------
# model plumbing


def test_model_kind_pairing_enforced():
    rng = np.random.default_rng(23)
    events = make_cells(rng, 5, "events")
    bins = make_cells(rng, 5, "bins")
    measures = make_cells(rng, 5, "measures")
    bd.poisson_events_model().validate_for(events)
    bd.poisson_bins_model().validate_for(bins)
    bd.gaussian_model().validate_for(measures)
    with pytest.raises(InputError, match="model"):
        bd.poisson_events_model().validate_for(bins)
    with pytest.raises(InputError, match="model"):
        bd.gaussian_model().validate_for(events)
    # custom models may pair with anything
    bd.custom_model(lambda s: 0.0).validate_for(events)
    bd.custom_model(lambda s: 0.0).validate_for(measures)


def test_custom_model_requires_evaluator():
    with pytest.raises(InputError):
        bd.FitnessModel(kind=bd.ModelKind.CUSTOM)


def test_shifted_accumulates_offset():
    m = bd.poisson_events_model().shifted(1.5).shifted(0.25)
    assert m.offset == 1.75
    s = stats(n=2, t=0.5)
    assert m.block_fitness(s) == bd.poisson_fitness(s) - 1.75


def test_offset_must_be_finite():
    with pytest.raises(InputError):
        bd.poisson_events_model(offset=float("inf"))


# ---------------------------------------------------------------------------
# additivity


@pytest.mark.parametrize("kind", KINDS)
def test_additivity_fold_is_exact(kind):
    # Block-additive total: folding the whole partition left to right is
    # bit-identical to folding a prefix of its blocks and continuing the
    # same fold over the rest (identical evaluation order).
    rng = np.random.default_rng(24)
    for _ in range(25):
        n = int(rng.integers(2, 30))
        cells, model = make_instance(rng, n, kind)
        pen = float(rng.uniform(0, 3))
        # random partition
        n_cuts = int(rng.integers(0, n))
        cps = np.concatenate(
            [[1], np.sort(rng.choice(np.arange(2, n + 1), size=n_cuts, replace=False))]
        ).astype(np.int64)
        ends = np.append(cps[1:] - 1, n)
        values = [
            bd.block_value(cells, model, pen, int(i), int(j))
            for i, j in zip(cps, ends)
        ]
        whole = 0.0
        for v in values:
            whole += v
        split_at = int(rng.integers(0, len(values) + 1))
        part = 0.0
        for v in values[:split_at]:
            part += v
        for v in values[split_at:]:
            part += v
        assert part == whole  # bit-identical: same fold, same order
        assert whole == pytest.approx(rescore(cells, model, pen, cps), rel=1e-12, abs=1e-12)
