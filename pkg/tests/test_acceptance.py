"""Acceptance criteria, one test each.

Every test records a ``ACCEPTANCE <n> <name>: PASS|FAIL <detail>`` line; the
lines are printed in the pytest terminal summary (see ``conftest.py``) and
when this file is run directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import math
import sys
import time
from dataclasses import replace

import numpy as np
import pytest

from benders_replay.engine import METHODS, BendersOptions, SharedState, commit_replication, solve_replication
from benders_replay.harness import replication_seed, run_sequence
from benders_replay.lp import LpStatus, reoptimize_rhs, solve
from benders_replay.model import build_cflp, build_cmnd, random_cflp, random_cmnd, sample_scenarios
from benders_replay.pool import empirical_failure_frequency, failure_probability_bound
from benders_replay.verify import REL_TOL, check_instance, de_optimum, relative_error

RESULTS: dict = {}


def record(n: int, name: str, ok: bool, detail: str = "") -> None:
    RESULTS[n] = f"ACCEPTANCE {n:>2} {name}: {'PASS' if ok else 'FAIL'} {detail}".rstrip()
    print(RESULTS[n])


# shared sequences -----------------------------------------------------------

SEQUENCES: list = []


def _remember(report):
    SEQUENCES.append(report)
    return report


@pytest.fixture(scope="module")
def cflp_seq():
    inst = build_cflp(random_cflp(4, 8, seed=41), name="cflp_4x8")
    return _remember(run_sequence(inst, 10, 10, METHODS, master_seed=7, time_limit=None))


@pytest.fixture(scope="module")
def cmnd_seq():
    inst = build_cmnd(random_cmnd(5, 10, 3, seed=42), name="cmnd_5_10_3")
    return _remember(run_sequence(inst, 10, 10, METHODS, master_seed=8, time_limit=None))


@pytest.fixture(scope="module")
def lp_seqs():
    insts = [build_cflp(random_cflp(4, 8, seed=43), name="cflp_4x8_lp"),
             build_cmnd(random_cmnd(4, 8, 3, seed=44), name="cmnd_4_8_3_lp")]
    opt = BendersOptions(mode="lp")
    out = []
    for i, inst in enumerate(insts):
        for cut_mode in ("multi", "single"):
            out.append(_remember(run_sequence(inst, 5, 10, METHODS, master_seed=20 + i,
                                              options=replace(opt, cut_mode=cut_mode), time_limit=None)))
    return out


@pytest.fixture(scope="module")
def trend_seq():
    inst = build_cflp(random_cflp(5, 10, seed=5), name="cflp_5x10")
    return _remember(run_sequence(inst, 10, 50, ("baseline", "dsp", "curated"), master_seed=3, time_limit=None))


# 1 ---------------------------------------------------------------------------


def _oracle_instances():
    rng = np.random.default_rng(2024)
    out = []
    for i in range(20):
        F, C = int(rng.integers(3, 7)), int(rng.integers(4, 11))
        out.append(build_cflp(random_cflp(F, C, seed=1000 + i), name=f"cflp_{F}x{C}_{i}"))
    for i in range(20):
        N = int(rng.integers(3, 6))
        A = int(rng.integers(N, min(10, N * (N - 1)) + 1))
        Kc = int(rng.integers(1, 5))
        out.append(build_cmnd(random_cmnd(N, A, Kc, seed=2000 + i), name=f"cmnd_{N}_{A}_{Kc}_{i}"))
    return out


def test_01_oracle_equivalence():
    t0 = time.perf_counter()
    worst, n_rows, bad = 0.0, 0, []
    for inst in _oracle_instances():
        for K in (5, 20):
            rows = check_instance(inst, K, M=2, master_seed=K)
            n_rows += len(rows)
            worst = max([worst] + [r.error for r in rows])
            bad += [f"{r.instance}/K{K}/{r.method}/{r.mode}/{r.cut_mode}" for r in rows if not r.ok]
    elapsed = time.perf_counter() - t0
    ok = not bad and n_rows > 0 and elapsed < 600
    record(1, "oracle equivalence", ok,
           f"{n_rows} runs, worst rel.err {worst:.2e}, {elapsed:.0f}s" + (f", mismatches {bad[:5]}" if bad else ""))
    assert ok


# 2 ---------------------------------------------------------------------------


def _disagreements(report):
    out = []
    M = report.config["M"]
    for r in range(1, M + 1):
        vals = {m: report.value(m, r) for m in report.methods}
        vals = {m: v for m, v in vals.items() if v is not None}
        ref = vals.get("baseline")
        for m, v in vals.items():
            if ref is not None and relative_error(v, ref) > REL_TOL:
                out.append((report.instance, r, m, v, ref))
        if len(vals) != len(report.methods):
            out.append((report.instance, r, "missing", None, None))
    return out


def test_02_method_invariance(cflp_seq, cmnd_seq):
    bad = _disagreements(cflp_seq) + _disagreements(cmnd_seq)
    worst = 0.0
    for rep in (cflp_seq, cmnd_seq):
        for rec in rep.records:
            ref = rep.value("baseline", rec.replication)
            if rec.value is not None and ref is not None:
                worst = max(worst, relative_error(rec.value, ref))
    record(2, "method invariance", not bad, f"2 instances x 10 reps x {len(METHODS)} methods, worst {worst:.2e}")
    assert not bad


# 3 ---------------------------------------------------------------------------


def test_03_dsp_trend(trend_seq):
    def mean_sp(method):
        return float(np.mean([r.metrics.sp_count for r in trend_seq.runs(method) if r.replication > 1]))

    base, dsp = mean_sp("baseline"), mean_sp("dsp")
    ratio = dsp / base
    record(3, "DSP trend", ratio <= 0.25, f"mean SP count dsp {dsp:.1f} vs baseline {base:.1f} (ratio {ratio:.3f})")
    assert ratio <= 0.25


# 4 ---------------------------------------------------------------------------


def test_04_curated_pool_control(trend_seq):
    hist = trend_seq.pool_history["curated"]
    every = all(h["curated"] <= h["dsp"] for h in hist)
    last = [h for h in hist if h["replication"] == 10][0]
    ok = every and last["curated"] < last["dsp"]
    record(4, "curated pool control", ok, f"rep 10: |cur|={last['curated']} |DSP|={last['dsp']}")
    assert ok


# 5 ---------------------------------------------------------------------------


def test_05_adaptive_exit_condition(cflp_seq, cmnd_seq, lp_seqs, trend_seq):
    checked, early, bad = 0, 0, []
    for rep in SEQUENCES:
        for rec in rep.runs("adaptive"):
            e = rec.extra
            if "init_z_ws" not in e:
                continue
            if not e["init_converged"]:
                early += 1
                continue
            checked += 1
            z = e["init_z_ws"]
            if e["init_min_v_sel"] < z - 1e-7 * (1 + abs(z)):
                bad.append((rep.instance, rec.replication, e["init_min_v_sel"], z))
    ok = checked > 0 and not bad
    record(5, "adaptive exit condition", ok,
           f"{checked} converged initializations checked, {early} LP-phase early exits" + (f", {bad[:3]}" if bad else ""))
    assert ok


# 6 ---------------------------------------------------------------------------


def test_06_best_of_n_monte_carlo():
    d = 5
    V = np.array(np.meshgrid(*[[0.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
    rng = np.random.default_rng(6)
    lines, ok = [], True
    for sigma in (0.5, 1.0):
        eps = 4 * sigma
        for N in (1, 5, 10):
            freq, se = empirical_failure_frequency(V, np.zeros(d), sigma / math.sqrt(d) * np.eye(d), eps, N, 1000, rng)
            bound = failure_probability_bound(sigma, eps, N)
            ok &= freq <= bound + 3 * se
            lines.append(f"s={sigma} N={N}: {freq:.3f}<={bound:.3g}")
    record(6, "best-of-N Monte Carlo", ok, "; ".join(lines))
    assert ok


# 7 ---------------------------------------------------------------------------


def test_07_bound_monotonicity(lp_seqs):
    runs, bad = 0, []
    for rep in lp_seqs:
        for rec in rep.records:
            runs += 1
            e = rec.extra
            gap = rec.metrics.final_gap_pct
            if not e.get("bounds_monotone", False) or not gap <= 1e-4 or not e.get("lp_final_gap_pct", 1) <= 1e-4:
                bad.append((rep.instance, rec.method, rec.replication, gap))
    ok = runs > 0 and not bad
    record(7, "bound monotonicity", ok, f"{runs} LP-mode runs" + (f", violations {bad[:3]}" if bad else ""))
    assert ok


# 8 ---------------------------------------------------------------------------


def test_08_feasibility_cut_path():
    inst = build_cflp(random_cflp(4, 6, seed=8, shortfall=False, capacity_ratio=1.3), name="cflp_4x6_noshort")
    errs, feas_cuts = [], 0
    for cut_mode in ("multi", "single"):
        scen = sample_scenarios(inst, 10, replication_seed(8, 1))
        res = solve_replication(inst, scen, BendersOptions(mode="ip", cut_mode=cut_mode))
        errs.append(relative_error(res.value, de_optimum(inst, scen, integer=True)))
        feas_cuts += res.metrics.cuts_feasibility
    ok = max(errs) <= REL_TOL and feas_cuts >= 1
    record(8, "feasibility-cut path", ok, f"rel.err {max(errs):.2e}, {feas_cuts} feasibility cuts")
    assert ok


# 9 ---------------------------------------------------------------------------


def test_09_warm_start_equality():
    rng = np.random.default_rng(9)
    fams = {"cflp": build_cflp(random_cflp(5, 10, seed=9)), "cmnd": build_cmnd(random_cmnd(5, 10, 4, seed=9))}
    worst, statuses = 0.0, 0
    for inst in fams.values():
        prior = solve(inst.subproblem_model(inst.recourse_rhs(np.ones(inst.n_first), inst.demand.mean)))
        for _ in range(100):
            x = rng.integers(0, 2, inst.n_first).astype(float)
            rhs = inst.recourse_rhs(x, inst.demand.sample(rng, 1)[0])
            cold = solve(inst.subproblem_model(rhs))
            warm = reoptimize_rhs(inst.subproblem_model(rhs), rhs, prior.basis)
            if warm.status != cold.status:
                statuses += 1
                continue
            if cold.status == LpStatus.OPTIMAL:
                worst = max(worst, abs(warm.objective_value - cold.objective_value)
                            / max(1.0, abs(cold.objective_value)))
    ok = statuses == 0 and worst <= 1e-9
    record(9, "warm-start equality", ok, f"200 pairs, worst rel.diff {worst:.2e}, status mismatches {statuses}")
    assert ok


# 10 --------------------------------------------------------------------------


def test_10_boosted_count_parity():
    inst = build_cflp(random_cflp(5, 8, seed=10), name="cflp_5x8")
    K = 8
    seeds = [replication_seed(10, r) for r in (1, 2, 3)]
    shared = SharedState.empty(inst)
    for r, s in enumerate(seeds[:2], start=1):
        res = solve_replication(inst, sample_scenarios(inst, K, s), BendersOptions(method="baseline"), shared)
        commit_replication(shared, res, "baseline", replication=r)
    scen = sample_scenarios(inst, K, seeds[2])
    details, ok = [], True
    for cut_mode in ("multi", "single"):
        ada = solve_replication(inst, scen, BendersOptions(method="adaptive", cut_mode=cut_mode), shared.copy())
        n = len(ada.init.cuts)
        boo = solve_replication(inst, scen, BendersOptions(method="boosted_static", cut_mode=cut_mode, boost_n=n),
                                shared.copy())
        want = [math.ceil(max(n, 1) / K)] * K
        ok &= boo.init.sel_sizes == want and relative_error(boo.value, ada.value) <= REL_TOL
        details.append(f"{cut_mode}: n={n}, per scenario {boo.init.sel_sizes[0]} want {want[0]}")
    record(10, "boosted-static count parity", ok, "; ".join(details))
    assert ok


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
