import numpy as np
import pytest

from benders_replay.cuts import (AGGREGATE, FEASIBILITY, OPTIMALITY, Cut, aggregate_single_cut,
                                 make_feasibility_cut, make_optimality_cut, violation)
from benders_replay.errors import InvalidRay
from benders_replay.model import sample_scenarios
from benders_replay.recourse import Recourse


def test_zero_dual_cut(cflp, cflp_scen):
    cut = make_optimality_cut(np.zeros(cflp.n_recourse_rows), cflp_scen[0], cflp)
    assert cut.alpha == 0 and not cut.beta.any() and cut.kind == OPTIMALITY


def test_cut_tight_at_generating_point(cflp, cflp_scen):
    rc = Recourse(cflp)
    for x in (np.zeros(3), np.ones(3), np.array([1.0, 0, 1])):
        for s in cflp_scen:
            res = rc.solve(x, s.xi)
            assert make_optimality_cut(res.dual, s, cflp).value(x) == pytest.approx(res.value, rel=1e-9, abs=1e-9)


@pytest.mark.parametrize("name", ["cflp", "cmnd"])
def test_cut_valid_everywhere(name, request, rng):
    inst = request.getfixturevalue(name)
    rc = Recourse(inst)
    scen = sample_scenarios(inst, 3, 2)
    for s in scen:
        x0 = rng.integers(0, 2, inst.n_first).astype(float)
        cut = make_optimality_cut(rc.solve(x0, s.xi).dual, s, inst)
        for _ in range(50):
            x = rng.random(inst.n_first)
            assert cut.value(x) <= rc.solve(x, s.xi).value + 1e-7 * (1 + abs(cut.alpha))


def test_feasibility_cut(cflp_no_shortfall):
    inst = cflp_no_shortfall
    s = sample_scenarios(inst, 1, 0)[0]
    rc = Recourse(inst)
    x_bad = np.zeros(inst.n_first)
    res = rc.solve(x_bad, s.xi)
    assert not res.feasible
    cut = make_feasibility_cut(res.ray, s, inst)
    assert cut.kind == FEASIBILITY
    amount, hit = violation(cut, x_bad)
    assert amount > 0 and hit
    x_ok = np.ones(inst.n_first)
    assert rc.solve(x_ok, s.xi).feasible
    assert violation(cut, x_ok)[0] <= 1e-9


def test_feasibility_cut_never_excludes_feasible(cflp_no_shortfall):
    import itertools

    inst = cflp_no_shortfall
    s = sample_scenarios(inst, 1, 0)[0]
    rc = Recourse(inst)
    cuts = []
    for x in itertools.product([0.0, 1.0], repeat=inst.n_first):
        res = rc.solve(np.array(x), s.xi)
        if not res.feasible:
            cuts.append(make_feasibility_cut(res.ray, s, inst))
    for x in itertools.product([0.0, 1.0], repeat=inst.n_first):
        if rc.solve(np.array(x), s.xi).feasible:
            assert all(c.value(np.array(x)) <= 1e-7 for c in cuts)


def test_invalid_ray(cflp, cflp_scen):
    with pytest.raises(InvalidRay):
        make_feasibility_cut(np.ones(cflp.n_recourse_rows), cflp_scen[0], cflp)


def test_violation_threshold():
    cut = Cut(0, 10.0, np.array([1.0, 2.0]))
    x = np.array([1.0, 1.0])
    tol = 1e-5 * np.sqrt(1 + 100 + 5)
    amount, hit = violation(cut, x, 7.0)
    assert amount == pytest.approx(0.0) and not hit
    assert violation(cut, x, 7.0 - 2 * tol)[1]
    assert not violation(cut, x, 7.0 - 0.5 * tol)[1]
    assert violation(cut, x, 0.0) == (7.0, True)


def test_aggregate_is_expectation(cflp, cflp_scen, rng):
    rc = Recourse(cflp)
    x = np.array([1.0, 0.0, 1.0])
    duals = [rc.solve(x, s.xi).dual for s in cflp_scen]
    agg = aggregate_single_cut(duals, cflp_scen, cflp)
    assert agg.scenario_id == AGGREGATE
    parts = [make_optimality_cut(d, s, cflp) for d, s in zip(duals, cflp_scen)]
    for _ in range(10):
        y = rng.random(3)
        assert agg.value(y) == pytest.approx(sum(s.probability * c.value(y) for s, c in zip(cflp_scen, parts)))


def test_key_normalized():
    a = Cut(1, 2.0, np.array([1.0]))
    b = Cut(1, 2.0 + 1e-14, np.array([1.0]))
    assert a.key() == b.key()
    assert a.key() != Cut(2, 2.0, np.array([1.0])).key()
