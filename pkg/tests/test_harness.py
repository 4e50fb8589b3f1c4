import csv
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from benders_replay.engine import BendersOptions
from benders_replay.harness import (cdf_points, emit, emit_states, load_report, replication_seed, run_sequence,
                                    shifted_geometric_mean, sparse_baseline_reps, splitmix64, summarize)


def test_sgm_examples():
    assert shifted_geometric_mean([1, 3]) == pytest.approx(math.sqrt(8) - 1)
    assert shifted_geometric_mean([1, 3]) == pytest.approx(1.8284, abs=1e-4)
    assert shifted_geometric_mean([7.5]) == pytest.approx(7.5)
    assert shifted_geometric_mean([0, 0, 0]) == 0.0


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1e4), min_size=1, max_size=10))
def test_sgm_between_min_and_max(values):
    g = shifted_geometric_mean(values)
    assert min(values) - 1e-9 * (1 + max(values)) <= g <= max(values) + 1e-9 * (1 + max(values))


def test_cdf_points():
    assert cdf_points([4, 1, 2]) == [(1, 1 / 3), (2, 2 / 3), (4, 1.0)]


def test_seeds_deterministic_and_distinct():
    seeds = [replication_seed(42, r) for r in range(1, 30)]
    assert len(set(seeds)) == len(seeds)
    assert seeds == [replication_seed(42, r) for r in range(1, 30)]
    assert replication_seed(43, 1) != seeds[0]
    assert 0 <= splitmix64(2**64 - 1) < 2**64


def test_sparse_reps():
    assert sparse_baseline_reps(26) == {2, 14, 26}


def test_two_replications_baseline(cflp):
    rep = run_sequence(cflp, 2, 4, ["baseline"], 0)
    assert [r.replication for r in rep.runs("baseline")] == [1, 2]
    means = summarize([rep])["per_instance"][rep.instance]["baseline"]
    assert means["iterations"] == rep.runs("baseline")[1].metrics.iterations


def test_methods_agree_per_replication(cflp):
    rep = run_sequence(cflp, 5, 5, ["baseline", "dsp"], 3)
    for r in range(1, 6):
        a, b = rep.value("baseline", r), rep.value("dsp", r)
        assert abs(a - b) <= 1e-6 * abs(a)


def test_sparse_baseline_skips(cflp):
    rep = run_sequence(cflp, 6, 3, ["baseline", "dsp"], 0, sparse_baseline=True)
    assert sorted(r.replication for r in rep.runs("baseline")) == [1, 2, 4, 6]
    assert len(rep.runs("dsp")) == 6


def test_time_limit_recorded(cflp):
    rep = run_sequence(cflp, 3, 4, ["baseline"], 0, time_limit=0.0)
    later = [r for r in rep.runs("baseline") if r.replication > 1]
    assert all(r.status == "time_limit" and r.value is None for r in later)


def test_non_time_metrics_reproducible(cflp):
    a = run_sequence(cflp, 3, 4, ["baseline", "curated"], 5)
    b = run_sequence(cflp, 3, 4, ["baseline", "curated"], 5)
    for ra, rb in zip(a.records, b.records):
        assert ra.value == rb.value
        na = {k: v for k, v in ra.metrics.non_time().items() if not (isinstance(v, float) and math.isnan(v))}
        nb = {k: v for k, v in rb.metrics.non_time().items() if not (isinstance(v, float) and math.isnan(v))}
        assert na == nb


def test_emit_round_trip(cmnd, tmp_path):
    rep = run_sequence(cmnd, 3, 3, ["baseline", "adaptive"], 1, BendersOptions())
    for fmt in ("csv", "json", "cdf"):
        emit(rep, fmt, tmp_path)
    emit_states(rep, tmp_path)
    assert load_report(tmp_path / "report.json").to_dict() == rep.to_dict()
    for name in ("metrics.csv", "cdf_baseline.csv", "cdf_adaptive.csv", "pool_final.txt", "archive_final.txt"):
        assert (tmp_path / name).exists()
    rows = list(csv.reader((tmp_path / "cdf_adaptive.csv").open()))
    assert rows[0] == ["total_t", "fraction"] and float(rows[-1][1]) == 1.0


def test_empty_method_list_csv(cflp, tmp_path):
    rep = run_sequence(cflp, 2, 2, [], 0)
    emit(rep, "csv", tmp_path)
    assert (tmp_path / "metrics.csv").read_text().strip() == "instance,method,replication,metric,value"


def test_summary_excludes_first_replication(cflp):
    rep = run_sequence(cflp, 3, 4, ["baseline"], 2)
    runs = rep.runs("baseline")
    expect = np.mean([r.metrics.sp_count for r in runs if r.replication > 1])
    assert summarize([rep])["per_instance"][rep.instance]["baseline"]["sp_count"] == pytest.approx(expect)


def test_bad_sequence_args(cflp):
    with pytest.raises(ValueError):
        run_sequence(cflp, 1, 3, ["baseline"], 0)
    with pytest.raises(ValueError):
        run_sequence(cflp, 2, 3, ["nope"], 0)
