"""Cross-checks of the decomposition against the extensive form."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

from .engine import METHODS, BendersOptions
from .errors import NumericalBreakdown
from .harness import run_sequence
from .lp import LpStatus, solve
from .mip import solve_mip
from .model import (CoreInstance, ScenarioSet, build_cflp, build_cmnd, deterministic_equivalent, random_cflp,
                    random_cmnd, sample_scenarios)

REL_TOL = 1e-6


def de_optimum(instance: CoreInstance, scenarios: ScenarioSet, integer: bool) -> float:
    """Optimal value of the extensive form (LP relaxation when ``integer`` is false)."""
    model, mask = deterministic_equivalent(instance, scenarios)
    if integer and mask.any():
        res = solve_mip(model, mask, abs_tol=1e-9, rel_gap_pct=0.0)
        return float(res.value)
    sol = solve(model)
    if sol.status != LpStatus.OPTIMAL:
        raise NumericalBreakdown(f"extensive form not solved to optimality: {sol.status}")
    return float(sol.objective_value)


def relative_error(value: float, reference: float) -> float:
    return abs(value - reference) / max(1.0, abs(reference))


@dataclass
class CheckRow:
    instance: str
    K: int
    method: str
    mode: str
    cut_mode: str
    replication: int
    value: float
    reference: float

    @property
    def error(self) -> float:
        return relative_error(self.value, self.reference)

    @property
    def ok(self) -> bool:
        return self.error <= REL_TOL


def tiny_instances() -> list:
    """Desk-scale instances used by ``benders-replay verify``."""
    return [
        build_cflp(random_cflp(3, 4, seed=1), name="cflp_3x4"),
        build_cflp(random_cflp(3, 5, seed=2, shortfall=False, capacity_ratio=1.5), name="cflp_3x5_noshort"),
        build_cmnd(random_cmnd(4, 6, 2, seed=3), name="cmnd_4_6_2"),
    ]


def check_instance(
    instance: CoreInstance,
    K: int,
    *,
    methods: Sequence[str] = METHODS,
    modes: Iterable[str] = ("lp", "ip"),
    cut_modes: Iterable[str] = ("multi", "single"),
    M: int = 3,
    master_seed: int = 0,
    options: Optional[BendersOptions] = None,
) -> list:
    """Run an M-replication sequence per (mode, cut mode) and compare every value to the extensive form."""
    rows = []
    base = options or BendersOptions()
    refs = {}
    for mode in modes:
        if mode == "ip" and not instance.is_integer:
            continue
        for cut_mode in cut_modes:
            opt = replace(base, mode=mode, cut_mode=cut_mode)
            rep = run_sequence(instance, M, K, methods, master_seed, opt, time_limit=None)
            for r in range(1, M + 1):
                key = (mode, r)
                if key not in refs:
                    scen = _scenarios(rep, instance, K, r)
                    refs[key] = de_optimum(instance, scen, integer=(mode == "ip"))
                for rec in rep.records:
                    if rec.replication == r and rec.value is not None:
                        rows.append(CheckRow(instance.name, K, rec.method, mode, cut_mode, r, rec.value, refs[key]))
    return rows


def _scenarios(report, instance, K, r) -> ScenarioSet:
    return sample_scenarios(instance, K, report.seeds[r - 1])


def format_table(rows: Sequence[CheckRow]) -> str:
    head = f"{'instance':<18} {'K':>3} {'method':<15} {'mode':<4} {'cuts':<6} {'rep':>3} {'value':>16} {'rel.err':>9}  result"
    lines = [head, "-" * len(head)]
    for r in rows:
        lines.append(f"{r.instance:<18} {r.K:>3} {r.method:<15} {r.mode:<4} {r.cut_mode:<6} {r.replication:>3} "
                     f"{r.value:>16.6f} {r.error:>9.2e}  {'pass' if r.ok else 'FAIL'}")
    return "\n".join(lines)


def run_verify(K: int = 5, M: int = 3, master_seed: int = 0) -> list:
    rows = []
    for inst in tiny_instances():
        rows += check_instance(inst, K, M=M, master_seed=master_seed)
    return rows


def all_pass(rows: Sequence[CheckRow]) -> bool:
    return bool(rows) and all(r.ok for r in rows)


__all__ = ["CheckRow", "check_instance", "de_optimum", "format_table", "relative_error", "run_verify",
           "tiny_instances", "all_pass"]
