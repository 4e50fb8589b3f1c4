import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from benders_replay.errors import EmptyPool, ThresholdViolation, UnknownId
from benders_replay.model import sample_scenarios
from benders_replay.pool import (CURATED, FULL, RANDOM_CURATED, RAY, DualPool, PoolView, empty_view,
                                 empirical_failure_frequency, failure_probability_bound, lookup, sample_size_bound)
from benders_replay.recourse import Recourse


def view_of(rows):
    rows = np.array(rows, dtype=float)
    return PoolView(np.arange(len(rows)), rows)


def test_lookup_direct_max():
    assert view_of([[1, 0], [0, 1]]).best(np.array([3.0, 5.0])) == (5.0, 1)


def test_lookup_unique_max():
    assert view_of([[1, 0], [0, 1], [1, 1]]).best(np.array([1.0, 1.0])) == (2.0, 2)


def test_lookup_tie_lowest_id():
    assert view_of([[1, 0], [0, 1]]).best(np.array([1.0, 1.0])) == (1.0, 0)


def test_lookup_empty():
    with pytest.raises(EmptyPool):
        empty_view(2).best(np.ones(2))


def test_insert_dedup():
    pool = DualPool(3)
    pi = np.array([1.0, -2.0, 0.5])
    a = pool.insert(pi)
    assert a == (0, True)
    assert pool.insert(pi) == (0, False)
    assert pool.insert(pi + np.array([1e-12, 0, 0])) == (0, False)
    assert pool.insert(pi + np.array([1e-6, 0, 0])) == (1, True)


def test_get_unknown():
    with pytest.raises(UnknownId):
        DualPool(2).get(4)


def test_rays_kept_apart():
    pool = DualPool(2)
    pool.insert([1, 0])
    pool.insert([0, -1], kind=RAY)
    assert len(pool.view(FULL)) == 1
    assert len(pool.view(FULL, RAY)) == 1


def test_update_empty_benches_trial():
    pool = DualPool(1)
    pool.end_of_replication_update([], [([1.0], "vertex"), ([2.0], "vertex")], CURATED, 1)
    assert pool.trial == {0, 1} and pool.perm == set()
    pool.end_of_replication_update([], [], CURATED, 2)
    assert pool.trial == set() and pool.perm == set()
    assert pool.bench == {0, 1}
    assert pool.curated == set()


def test_used_trial_becomes_permanent():
    pool = DualPool(1)
    pool.end_of_replication_update([], [([1.0], "vertex"), ([2.0], "vertex")], CURATED, 1)
    pool.end_of_replication_update([0], [([3.0], "vertex")], CURATED, 2)
    assert pool.perm == {0}
    assert pool.trial == {2}
    assert pool.curated == {0, 2}
    assert pool.bench == {1}


def test_rediscovered_dual_counts_as_used():
    pool = DualPool(1)
    pool.end_of_replication_update([], [([1.0], "vertex")], CURATED, 1)
    pool.end_of_replication_update([], [([1.0], "vertex")], CURATED, 2)
    assert pool.perm == {0}


def test_update_unknown_id():
    with pytest.raises(UnknownId):
        DualPool(1).end_of_replication_update([7], [], CURATED)


def test_full_and_random_modes():
    full, rand = DualPool(1), DualPool(1, seed=3)
    new = [([float(i)], "vertex") for i in range(10)]
    for p, mode in ((full, FULL), (rand, RANDOM_CURATED)):
        p.end_of_replication_update([], new, mode, 1)
        p.end_of_replication_update([0, 1], [([99.0], "vertex")], mode, 2)
    assert full.curated == set(range(11))
    assert len(rand.curated) == 3 and rand.curated <= rand.dsp


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.lists(st.integers(0, 30), max_size=5), st.lists(st.integers(0, 30), max_size=4)),
                min_size=1, max_size=8))
def test_curation_invariants(steps):
    pool = DualPool(1)
    prev_perm = set()
    for r, (used_vals, new_vals) in enumerate(steps, start=1):
        used = {pool.find([float(v)]) for v in used_vals} - {None}
        pool.end_of_replication_update(used, [([float(v)], "vertex") for v in new_vals], CURATED, r)
        assert pool.perm >= prev_perm
        assert not (pool.perm & pool.trial)
        assert pool.curated <= pool.dsp
        prev_perm = set(pool.perm)


def test_lookup_underestimates(cflp, rng):
    pool = DualPool(cflp.n_recourse_rows)
    rc = Recourse(cflp)
    scen = sample_scenarios(cflp, 5, 1)
    for _ in range(15):
        x = rng.integers(0, 2, 3).astype(float)
        for s in scen:
            pool.insert(rc.solve(x, s.xi).dual)
    view = pool.view()
    for _ in range(200):
        x = rng.random(3)
        s = scen[int(rng.integers(5))]
        s2 = type(s)(s.id, cflp.demand.sample(rng, 1)[0], s.probability)
        val, _ = lookup(view, cflp, s2, x)
        assert val <= rc.solve(x, s2.xi).value + 1e-7


def test_lookup_monotone_in_pool(cflp, rng):
    pool = DualPool(cflp.n_recourse_rows)
    rc = Recourse(cflp)
    xi = cflp.demand.mean
    x0 = np.array([0.3, 0.6, 0.2])
    from benders_replay.model import Scenario

    s = Scenario(0, xi, 1.0)
    last = -math.inf
    for _ in range(10):
        pool.insert(rc.solve(rng.integers(0, 2, 3).astype(float), xi).dual)
        v, _ = lookup(pool.view(), cflp, s, x0)
        assert v >= last - 1e-12
        last = v


def test_bound_closed_forms():
    assert failure_probability_bound(1, 4, 1) == pytest.approx(2 * math.exp(-2), rel=1e-12)
    assert failure_probability_bound(1, 4, 1) == pytest.approx(0.27067, abs=5e-6)
    assert failure_probability_bound(1, 4, 3) == pytest.approx(0.01983, abs=5e-6)


def test_bound_vacuous_at_threshold():
    eps = math.sqrt(8 * math.log(2))
    for N in (1, 5, 50):
        assert failure_probability_bound(1, eps, N) == pytest.approx(1.0)
    assert failure_probability_bound(1, 0.5, 3) == 1.0


def test_sample_size_closed_forms():
    assert sample_size_bound(1, 3, 0.05) == 7
    assert sample_size_bound(1, 4, 0.1) == 2


def test_sample_size_threshold():
    with pytest.raises(ThresholdViolation):
        sample_size_bound(1, math.sqrt(8 * math.log(2)), 0.1)
    with pytest.raises(ThresholdViolation):
        sample_size_bound(2, 1, 0.1)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.01, 0.9))
def test_sample_size_is_smallest(sigma, ratio, rho):
    eps = sigma * math.sqrt(8 * math.log(2)) * (1 + ratio)
    N = sample_size_bound(sigma, eps, rho)
    need = 8 * sigma**2 * math.log(1 / rho) / (eps**2 - 8 * sigma**2 * math.log(2))
    assert N >= need - 1e-9
    assert N == 1 or N - 1 < need


def test_empirical_frequency_small_cube():
    V = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
    freq, se = empirical_failure_frequency(V, np.zeros(2), np.eye(2), 0.0, 1, 400, np.random.default_rng(1))
    assert 0 <= freq <= 1 and se >= 0
