"""Replication sequences, metric summaries and report files.

Replication 1 is solved once with the baseline method; its pool and archive
seed every method's state. Replications 2..M then run per method on
identical scenario sets.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .engine import METHODS, BendersOptions, SharedState, commit_replication, solve_replication
from .errors import TimeLimit
from .io import dumps_archive, dumps_pool
from .metrics import ReplicationMetrics
from .model import CoreInstance, ScenarioSet, sample_scenarios

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def replication_seed(master_seed: int, replication: int) -> int:
    return splitmix64(splitmix64(master_seed & _MASK) ^ replication)


def sparse_baseline_reps(M: int) -> set:
    return {2, math.ceil(M / 2) + 1, M}


def _clean(v):
    if isinstance(v, float) and math.isnan(v):
        return None
    if isinstance(v, (np.floating,)):
        return _clean(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


@dataclass
class RunRecord:
    method: str
    replication: int
    value: Optional[float]
    status: str
    metrics: ReplicationMetrics
    seed: int
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "method": self.method,
            "replication": self.replication,
            "value": _clean(self.value),
            "status": self.status,
            "seed": self.seed,
            "metrics": {k: _clean(v) for k, v in self.metrics.to_dict().items()},
            "extra": {k: _clean(v) for k, v in self.extra.items()},
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunRecord":
        m = {k: (math.nan if v is None else v) for k, v in d["metrics"].items()}
        return cls(d["method"], d["replication"], d["value"], d["status"], ReplicationMetrics.from_dict(m),
                   d["seed"], dict(d.get("extra", {})))


@dataclass
class SequenceReport:
    instance: str
    config: dict
    methods: list
    seeds: list
    records: list = field(default_factory=list)
    pool_history: dict = field(default_factory=dict)
    final_states: dict = field(default_factory=dict, repr=False, compare=False)

    def runs(self, method: str) -> list:
        return [r for r in self.records if r.method == method]

    def value(self, method: str, replication: int) -> Optional[float]:
        for r in self.records:
            if r.method == method and r.replication == replication:
                return r.value
        return None

    def to_dict(self) -> dict:
        return {
            "instance": self.instance,
            "config": self.config,
            "methods": list(self.methods),
            "seeds": list(self.seeds),
            "records": [r.to_dict() for r in self.records],
            "pool_history": self.pool_history,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SequenceReport":
        return cls(d["instance"], d["config"], d["methods"], d["seeds"],
                   [RunRecord.from_dict(r) for r in d["records"]], d.get("pool_history", {}))


def _bounds_monotone(L) -> bool:
    return all(b >= a - 1e-9 * (1.0 + abs(a)) for a, b in zip(L, L[1:]))


def _run_extra(result) -> dict:
    """Per-run facts kept in the report besides the metric record."""
    out = {"mode": result.mode, "bounds_monotone": _bounds_monotone(result.lower_bounds)}
    if result.lower_bounds:
        L, U = result.lower_bounds[-1], min(result.upper_bounds)
        out["lp_final_gap_pct"] = 0.0 if U - L <= 1e-12 * (1 + abs(U)) else 100.0 * (U - L) / max(abs(L), 1e-10)
    init = result.init
    if init is not None and init.x_ws is not None:
        out.update({
            "init_converged": bool(init.converged),
            "init_min_v_sel": float(init.min_v_sel),
            "init_z_ws": float(init.z_ws),
            "init_cuts": len(init.cuts),
            "init_phase_one_iterations": init.phase_one_iterations,
        })
    if init is not None:
        out["init_sel_sizes"] = list(init.sel_sizes)
    return out


def run_sequence(
    instance: CoreInstance,
    M: int,
    K: int,
    methods: Sequence[str] = METHODS,
    master_seed: int = 0,
    options: Optional[BendersOptions] = None,
    *,
    sparse_baseline: bool = False,
    time_limit: Optional[float] = 3600.0,
    scenario_sets: Optional[Sequence[ScenarioSet]] = None,
    log: Optional[Callable[[str], None]] = None,
) -> SequenceReport:
    """Solve replications ``1..M`` for each method; see the module docstring."""
    if M < 2:
        raise ValueError("a sequence needs at least two replications")
    methods = list(methods)
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    base_opt = replace(options or BendersOptions(), time_limit=time_limit)
    seeds = [replication_seed(master_seed, r) for r in range(1, M + 1)]
    if scenario_sets is None:
        scenario_sets = [sample_scenarios(instance, K, s) for s in seeds]
    config = {
        "instance": instance.name, "family": instance.family, "M": M, "K": K, "methods": methods,
        "master_seed": master_seed, "sparse_baseline": sparse_baseline, "time_limit": time_limit,
        "options": {k: _clean(v) for k, v in asdict(base_opt).items()},
    }
    report = SequenceReport(instance.name, config, methods, seeds)

    shared0 = SharedState.empty(instance, seed=master_seed)
    first = solve_replication(instance, scenario_sets[0], replace(base_opt, method="baseline", time_limit=None), shared0)
    commit_replication(shared0, first, "baseline", replication=1)
    for method in methods:
        report.records.append(RunRecord(method, 1, first.value, "ok", first.metrics, seeds[0], _run_extra(first)))
    skip = sparse_baseline_reps(M)

    for method in methods:
        shared = shared0.copy()
        history = [{"replication": 1, "dsp": len(shared.pool), "curated": len(shared.pool.curated)}]
        for r in range(2, M + 1):
            if sparse_baseline and method == "baseline" and r not in skip:
                continue
            opt = replace(base_opt, method=method, seed=seeds[r - 1] & 0xFFFFFFFF)
            t0 = time.perf_counter()
            try:
                res = solve_replication(instance, scenario_sets[r - 1], opt, shared)
            except TimeLimit:
                m = ReplicationMetrics(total_t=time.perf_counter() - t0)
                report.records.append(RunRecord(method, r, None, "time_limit", m, seeds[r - 1]))
                shared.replication = r
                continue
            commit_replication(shared, res, method, replication=r)
            history.append({"replication": r, "dsp": len(shared.pool), "curated": len(shared.pool.curated)})
            report.records.append(RunRecord(method, r, res.value, "ok", res.metrics, seeds[r - 1], _run_extra(res)))
            if log:
                log(f"{method} rep {r}: z={res.value:.6f} t={res.metrics.total_t:.3f}s sp={res.metrics.sp_count}")
        report.pool_history[method] = history
        report.final_states[method] = shared
    return report


# ---------------------------------------------------------------------------
# summaries


def shifted_geometric_mean(values: Iterable[float], shift: float = 1.0) -> float:
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        return math.nan
    return float(np.exp(np.mean(np.log(v + shift))) - shift)


def replication_means(report: SequenceReport, include_first: bool = False) -> dict:
    """``{method: {metric: arithmetic mean over summarized replications}}``."""
    out = {}
    for method in report.methods:
        recs = [r for r in report.runs(method) if r.status == "ok" and (include_first or r.replication > 1)]
        metrics = {}
        for name in ReplicationMetrics.__dataclass_fields__:
            vals = [getattr(r.metrics, name) for r in recs]
            vals = [v for v in vals if v is not None and not (isinstance(v, float) and math.isnan(v))]
            metrics[name] = float(np.mean(vals)) if vals else math.nan
        out[method] = metrics
    return out


def summarize(reports: Sequence[SequenceReport]) -> dict:
    """Per-instance replication means and cross-instance shifted geometric means."""
    per_instance = {r.instance: replication_means(r) for r in reports}
    methods = reports[0].methods if reports else []
    overall = {}
    for method in methods:
        overall[method] = {}
        for name in ReplicationMetrics.__dataclass_fields__:
            vals = [per_instance[r.instance][method][name] for r in reports]
            vals = [v for v in vals if not math.isnan(v)]
            overall[method][name] = shifted_geometric_mean(vals) if vals else math.nan
    return {"per_instance": per_instance, "overall": overall}


# ---------------------------------------------------------------------------
# output


def cdf_points(times: Iterable[float]) -> list:
    t = sorted(float(v) for v in times)
    n = len(t)
    return [(v, (i + 1) / n) for i, v in enumerate(t)]


def emit(report: SequenceReport, fmt: str, out_dir) -> list:
    """Write ``report`` as ``csv``, ``json`` or ``cdf`` files; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "csv":
        path = out / "metrics.csv"
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instance", "method", "replication", "metric", "value"])
            for rec in report.records:
                w.writerow([report.instance, rec.method, rec.replication, "z", rec.value])
                for k, v in rec.metrics.to_dict().items():
                    w.writerow([report.instance, rec.method, rec.replication, k, v])
        written.append(path)
    elif fmt == "json":
        path = out / "report.json"
        path.write_text(json.dumps(report.to_dict(), indent=1))
        written.append(path)
    elif fmt == "cdf":
        for method in report.methods:
            recs = [r for r in report.runs(method) if r.replication > 1 and r.status == "ok"]
            path = out / f"cdf_{method}.csv"
            with path.open("w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["total_t", "fraction"])
                for t, f in cdf_points(r.metrics.total_t for r in recs):
                    w.writerow([repr(t), repr(f)])
            written.append(path)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    return written


def emit_states(report: SequenceReport, out_dir) -> list:
    """``pool_final.txt``/``archive_final.txt`` for the last method, plus per-method copies."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for method, state in report.final_states.items():
        for name, text in (("pool", dumps_pool(state.pool)), ("archive", dumps_archive(state.archive))):
            p = out / f"{name}_final_{method}.txt"
            p.write_text(text)
            written.append(p)
    if report.final_states:
        last = report.final_states[list(report.final_states)[-1]]
        (out / "pool_final.txt").write_text(dumps_pool(last.pool))
        (out / "archive_final.txt").write_text(dumps_archive(last.archive))
        written += [out / "pool_final.txt", out / "archive_final.txt"]
    return written


def load_report(path) -> SequenceReport:
    return SequenceReport.from_dict(json.loads(Path(path).read_text()))
