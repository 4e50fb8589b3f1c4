"""LP-based branch-and-bound with an optional separation hook.

The same search drives both the extensive-form oracle (no separation) and
Benders branch-and-cut, where integer candidates are handed to a separation
callback that may tighten the model with new rows before the candidate is
accepted.

Node selection is best-bound (ties by creation order); branching picks the
integer variable whose fractional part is closest to 0.5, lowest index on
ties. Children inherit the parent's optimal basis.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import NodeLimit, TimeLimit
from .lp import Basis, LpModel, LpSolution, LpStatus, solve

INT_TOL = 1e-6
ABS_TOL = 1e-6
REL_GAP_PCT = 1e-4


@dataclass(order=True)
class Node:
    bound: float
    seq: int
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)
    basis: Optional[Basis] = field(compare=False, default=None)
    depth: int = field(compare=False, default=0)


@dataclass
class Accept:
    """Separation verdict: ``x`` is feasible with true objective ``value``."""

    value: float


@dataclass
class BranchResult:
    status: str
    x: Optional[np.ndarray]
    value: float
    bound: float
    nodes: int
    root_bound: float
    lp_solves: int = 0
    separations: int = 0


def branching_variable(x: np.ndarray, integer_mask: np.ndarray, tol: float = INT_TOL) -> int:
    """Index of the fractional integer variable nearest to 0.5, or -1."""
    frac = x - np.floor(x)
    dist = np.minimum(frac, 1.0 - frac)
    cand = integer_mask & (dist > tol)
    if not cand.any():
        return -1
    score = np.where(cand, np.abs(frac - 0.5), np.inf)
    return int(np.argmin(score))


def relative_gap_pct(upper: float, lower: float) -> float:
    if not math.isfinite(upper):
        return math.inf
    return 100.0 * (upper - lower) / max(abs(upper), 1e-10)


def _prunable(bound, incumbent, abs_tol, rel_gap_pct) -> bool:
    if not math.isfinite(incumbent):
        return False
    return bound >= incumbent - abs_tol or relative_gap_pct(incumbent, bound) <= rel_gap_pct


def branch_and_bound(
    solve_node: Callable[[np.ndarray, np.ndarray, Optional[Basis]], LpSolution],
    lower: np.ndarray,
    upper: np.ndarray,
    integer_mask: np.ndarray,
    *,
    separate: Optional[Callable[[LpSolution], Optional[Accept]]] = None,
    incumbent: Optional[tuple] = None,
    node_limit: int = 10**6,
    int_tol: float = INT_TOL,
    abs_tol: float = ABS_TOL,
    rel_gap_pct: float = REL_GAP_PCT,
    deadline: Optional[float] = None,
    on_root: Optional[Callable[[float], None]] = None,
) -> BranchResult:
    """Minimize over the integer points of the relaxation given by ``solve_node``.

    ``separate(sol)`` is called at integer candidates. Returning ``None``
    means the model was tightened and the node LP must be re-solved;
    returning :class:`Accept` installs the candidate as an incumbent (when it
    improves). Without a callback the LP value is accepted as is.
    ``incumbent`` is an optional ``(x, value)`` starting solution.
    """
    mask = np.asarray(integer_mask, dtype=bool)
    best_x, best_val = (None, math.inf) if incumbent is None else (np.asarray(incumbent[0], float), float(incumbent[1]))
    heap = [Node(-math.inf, 0, np.asarray(lower, float).copy(), np.asarray(upper, float).copy())]
    seq = 1
    nodes = 0
    lp_solves = 0
    separations = 0
    root_bound = math.nan
    global_bound = math.inf

    while heap:
        node = heapq.heappop(heap)
        if _prunable(node.bound, best_val, abs_tol, rel_gap_pct):
            continue
        if nodes >= node_limit:
            raise NodeLimit(f"node limit {node_limit} reached")
        if deadline is not None and time.monotonic() > deadline:
            raise TimeLimit("time limit reached during branch-and-bound")
        nodes += 1
        basis = node.basis
        while True:
            sol = solve_node(node.lower, node.upper, basis)
            lp_solves += 1
            if sol.status is LpStatus.UNBOUNDED:
                raise ValueError("relaxation is unbounded")
            if sol.status is LpStatus.INFEASIBLE:
                break
            basis = sol.basis
            value = sol.objective_value
            if _prunable(value, best_val, abs_tol, rel_gap_pct):
                break
            j = branching_variable(sol.primal, mask, int_tol)
            if j >= 0:
                break
            if separate is None:
                verdict = Accept(value)
            else:
                separations += 1
                verdict = separate(sol)
            if verdict is None:
                continue
            if verdict.value < best_val:
                best_val = verdict.value
                best_x = sol.primal.copy()
                best_x[mask] = np.round(best_x[mask])
            break
        if node.seq == 0:
            root_bound = sol.objective_value if sol.status is LpStatus.OPTIMAL else math.inf
            if on_root is not None:
                on_root(root_bound)
        if sol.status is not LpStatus.OPTIMAL or _prunable(sol.objective_value, best_val, abs_tol, rel_gap_pct):
            continue
        j = branching_variable(sol.primal, mask, int_tol)
        if j < 0:
            continue
        v = sol.primal[j]
        down_up = node.upper.copy()
        down_up[j] = math.floor(v)
        up_lo = node.lower.copy()
        up_lo[j] = math.ceil(v)
        for lo, up in ((node.lower, down_up), (up_lo, node.upper)):
            heapq.heappush(heap, Node(sol.objective_value, seq, lo, up, sol.basis, node.depth + 1))
            seq += 1

    if best_x is None:
        return BranchResult("infeasible", None, math.inf, math.inf, nodes, root_bound, lp_solves, separations)
    return BranchResult("optimal", best_x, best_val, min(best_val, global_bound), nodes, root_bound, lp_solves, separations)


def solve_mip(model: LpModel, integer_mask, **kwargs) -> BranchResult:
    """Branch-and-bound on a fixed model (the extensive-form oracle)."""

    def node_lp(lo, up, basis):
        return solve(model.with_bounds(lo, up), basis)

    return branch_and_bound(node_lp, model.lower, model.upper, integer_mask, **kwargs)
