import math
from dataclasses import replace

import numpy as np
import pytest

from benders_replay.engine import (METHODS, BendersOptions, SharedState, commit_replication, curation_mode_for,
                                   pool_view_for, solve_replication, solve_replication_ip, solve_replication_lp)
from benders_replay.errors import EmptyArchive, InvalidConfig, IterationLimit
from benders_replay.model import CoreInstance, DemandModel, Scenario, ScenarioSet, sample_scenarios
from benders_replay.recourse import Recourse
from benders_replay.verify import de_optimum


def rel(a, b):
    return abs(a - b) / max(1.0, abs(b))


@pytest.mark.parametrize("cut_mode", ["multi", "single"])
def test_lp_matches_extensive_form(cflp, cut_mode):
    scen = sample_scenarios(cflp, 10, 3)
    res = solve_replication_lp(cflp, scen, BendersOptions(cut_mode=cut_mode))
    assert rel(res.value, de_optimum(cflp, scen, integer=False)) <= 1e-6


@pytest.mark.parametrize("cut_mode", ["multi", "single"])
def test_ip_matches_extensive_form(cmnd, cut_mode):
    scen = sample_scenarios(cmnd, 4, 3)
    res = solve_replication_ip(cmnd, scen, BendersOptions(cut_mode=cut_mode))
    assert rel(res.value, de_optimum(cmnd, scen, integer=True)) <= 1e-6


def test_value_is_true_objective(cmnd):
    scen = sample_scenarios(cmnd, 4, 5)
    for mode in ("lp", "ip"):
        res = solve_replication(cmnd, scen, BendersOptions(mode=mode))
        assert rel(res.value, Recourse(cmnd).objective(res.x, scen)) <= 1e-6


def test_bounds_monotone_and_gap_closed(cflp):
    scen = sample_scenarios(cflp, 8, 1)
    res = solve_replication_lp(cflp, scen, BendersOptions())
    L = res.lower_bounds
    assert all(b >= a - 1e-9 * (1 + abs(a)) for a, b in zip(L, L[1:]))
    U = min(res.upper_bounds)
    assert 100 * (U - L[-1]) / abs(L[-1]) <= 1e-4 + 1e-12


def _one_dimensional():
    """min x + Q(x), Q(x) = max(0, xi - 2x), x in [0, 2]; at xi = 5 the optimum is x = 2."""
    return CoreInstance(
        name="line", family="toy", c=[1.0], A=np.zeros((0, 1)), first_senses=[], b=[], x_lower=[0.0],
        x_upper=[2.0], integer=[False], W=[[1.0]], q=[1.0], second_senses=[">"], h0=[0.0], H=[[1.0]],
        T=[[2.0]], demand=DemandModel("uniform", [5.0], spread=0.0),
    )


def test_single_scenario_exact_initialization():
    inst = _one_dimensional()
    scen = ScenarioSet([Scenario(0, np.array([5.0]), 1.0)])
    shared = SharedState.empty(inst)
    first = solve_replication_lp(inst, scen, BendersOptions(), shared)
    assert first.value == pytest.approx(3.0)
    commit_replication(shared, first, "baseline", 1)
    res = solve_replication_lp(inst, scen, BendersOptions(method="static"), shared)
    assert res.metrics.cuts_init == 1
    assert res.metrics.iterations == 1
    assert res.metrics.sp_count == 1
    assert res.value == pytest.approx(3.0)


def test_dsp_skips_subproblems(cflp):
    shared = SharedState.empty(cflp)
    opt = BendersOptions(mode="lp")
    first = solve_replication(cflp, sample_scenarios(cflp, 10, 1), opt, shared)
    commit_replication(shared, first, "baseline", 1)
    res = solve_replication(cflp, sample_scenarios(cflp, 10, 2), replace(opt, method="dsp"), shared)
    assert res.metrics.cuts_dsp > 0
    assert res.metrics.sp_count < res.metrics.iterations


def test_fixed_first_stage_is_evaluation(cflp):
    fixed = CoreInstance(**{f: getattr(cflp, f) for f in cflp.__dataclass_fields__})
    fixed.x_lower = np.array([1.0, 0.0, 1.0])
    fixed.x_upper = np.array([1.0, 0.0, 1.0])
    scen = sample_scenarios(fixed, 5, 2)
    res = solve_replication_ip(fixed, scen, BendersOptions())
    np.testing.assert_array_equal(res.x, [1, 0, 1])
    assert rel(res.value, Recourse(fixed).objective(res.x, scen)) <= 1e-6
    assert res.metrics.nodes == 1


def test_resolve_with_optimal_warm_start(cmnd):
    scen = sample_scenarios(cmnd, 4, 9)
    shared = SharedState.empty(cmnd)
    first = solve_replication_ip(cmnd, scen, BendersOptions(), shared)
    commit_replication(shared, first, "baseline", 1)
    again = solve_replication_ip(cmnd, scen, BendersOptions(), shared)
    assert rel(again.value, first.value) <= 1e-9


def test_feasibility_cuts_generated(cflp_no_shortfall):
    scen = sample_scenarios(cflp_no_shortfall, 5, 0)
    res = solve_replication_ip(cflp_no_shortfall, scen, BendersOptions())
    assert res.metrics.cuts_feasibility >= 1
    assert rel(res.value, de_optimum(cflp_no_shortfall, scen, integer=True)) <= 1e-6


def test_iteration_limit(cflp):
    with pytest.raises(IterationLimit):
        solve_replication_lp(cflp, sample_scenarios(cflp, 10, 3), BendersOptions(iteration_limit=1))


def test_history_methods_need_archive(cflp):
    scen = sample_scenarios(cflp, 3, 3)
    for m in ("static", "boosted_static", "adaptive"):
        with pytest.raises(EmptyArchive):
            solve_replication(cflp, scen, BendersOptions(method=m))


def test_option_validation():
    with pytest.raises(InvalidConfig):
        BendersOptions(method="magic").validate()
    with pytest.raises(InvalidConfig):
        BendersOptions(cut_mode="double").validate()
    with pytest.raises(InvalidConfig):
        BendersOptions(gap_pct=-1).validate()


def test_method_tables():
    assert pool_view_for("baseline") is None
    assert curation_mode_for("dsp") == "full"
    assert curation_mode_for("random_curated") == "random_curated"
    assert curation_mode_for("adaptive") == "curated"


def test_metric_identities(cmnd):
    scen = sample_scenarios(cmnd, 4, 1)
    m = solve_replication_ip(cmnd, scen, BendersOptions()).metrics
    assert m.cut_t == pytest.approx(m.dsp_t + m.sp_t)
    assert m.total_t >= m.init_t + m.lp_t + m.ip_t - 1e-3
    assert m.total_t <= m.init_t + m.lp_t + m.ip_t + 5e-3 + 0.05 * m.total_t
    assert m.root_gap_pct >= 0


def test_all_methods_agree_after_history(cflp):
    shared = SharedState.empty(cflp)
    first = solve_replication(cflp, sample_scenarios(cflp, 6, 1), BendersOptions(), shared)
    commit_replication(shared, first, "baseline", 1)
    scen = sample_scenarios(cflp, 6, 2)
    vals = [solve_replication(cflp, scen, BendersOptions(method=m), shared.copy()).value for m in METHODS]
    assert max(vals) - min(vals) <= 1e-6 * abs(vals[0])


def test_deterministic_non_time_metrics(cflp):
    scen = sample_scenarios(cflp, 6, 2)
    a = solve_replication(cflp, scen, BendersOptions()).metrics.non_time()
    b = solve_replication(cflp, scen, BendersOptions()).metrics.non_time()
    assert {k: v for k, v in a.items() if not (isinstance(v, float) and math.isnan(v))} == \
        {k: v for k, v in b.items() if not (isinstance(v, float) and math.isnan(v))}
