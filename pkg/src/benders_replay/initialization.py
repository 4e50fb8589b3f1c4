"""Initial cuts for a new replication from archived solutions and pooled duals.

Static initialization picks, for the first two archived optima, the best
pooled dual of every scenario. Adaptive initialization first identifies the
archived optimum with the lowest true objective (phase one) and then selects
per-scenario dual sets so that every archived feasible solution looks no
better than that warm start under the selected cuts (phase two).

All selection works on a :class:`WorkingPool`, which is a snapshot of a pool
view extended with duals discovered while initializing. The shared pool is
never mutated here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cuts import FROM_INIT, Cut, aggregate_single_cut, make_feasibility_cut, make_optimality_cut
from .errors import EmptyArchive, EmptyPool, IterationLimit
from .model import CoreInstance, ScenarioSet
from .pool import RAY, VERTEX, DualPool, PoolView, fingerprint
from .recourse import Recourse, scenario_rhs

IP = "ip"
LP = "lp"


@dataclass
class SolutionArchive:
    """Optimal solutions per replication (``opt``) and all feasible ones seen (``feas``)."""

    opt: list = field(default_factory=list)
    feas: list = field(default_factory=list)
    opt_origin: list = field(default_factory=list)
    feas_origin: list = field(default_factory=list)
    _keys: set = field(default_factory=set, repr=False)

    def add_feas(self, x, replication: int = 0) -> bool:
        x = np.asarray(x, dtype=float)
        key = x.tobytes()
        if key in self._keys:
            return False
        self._keys.add(key)
        self.feas.append(x.copy())
        self.feas_origin.append(replication)
        return True

    def add_opt(self, x, replication: int = 0) -> None:
        x = np.asarray(x, dtype=float)
        self.opt.append(x.copy())
        self.opt_origin.append(replication)
        self.add_feas(x, replication)

    def copy(self) -> "SolutionArchive":
        out = SolutionArchive()
        for x, r in zip(self.feas, self.feas_origin):
            out.add_feas(x, r)
        out.opt = [x.copy() for x in self.opt]
        out.opt_origin = list(self.opt_origin)
        return out

    def __len__(self):
        return len(self.feas)


class WorkingPool:
    """Pool view plus locally discovered duals, with cached per-scenario products.

    Row ``r`` holds a dual vector; ``ids[r]`` is its pool id, or ``None`` for a
    vector not yet in the shared pool. For each row the values
    ``pi^T h(xi_k)`` (all k) and ``T^T pi`` are cached so that
    ``pi^T (h_k - T x) = a[r, k] - b[r] @ x`` is cheap for many ``x``.
    """

    def __init__(self, instance: CoreInstance, scenarios: ScenarioSet, view: PoolView,
                 pool: Optional[DualPool] = None, ray_view: Optional[PoolView] = None):
        self.instance = instance
        self.hk = scenario_rhs(instance, scenarios)
        self.pool = pool
        self.vectors: list = []
        self.ids: list = []
        self._rows: dict = {}
        self._a = np.zeros((0, self.hk.shape[0]))
        self._b = np.zeros((0, instance.n_first))
        self._pending_a: list = []
        self._pending_b: list = []
        self.rays: list = []
        self.ray_ids: list = []
        self._ray_fps: set = set()
        self._extend(view.matrix, [int(i) for i in view.ids])
        if ray_view is not None:
            for i, vec in zip(ray_view.ids, ray_view.matrix):
                self.add_ray(vec, int(i))

    def _extend(self, mat, ids):
        if len(ids) == 0:
            return
        for vec, i in zip(mat, ids):
            self._rows[fingerprint(vec)] = len(self.vectors)
            self.vectors.append(np.asarray(vec, dtype=float))
            self.ids.append(i)
        self._a = np.vstack([self._a, mat @ self.hk.T])
        self._b = np.vstack([self._b, mat @ self.instance.T])

    def __len__(self):
        return len(self.vectors)

    def add(self, vector) -> int:
        """Row of ``vector``, appending it if unseen."""
        vector = np.asarray(vector, dtype=float)
        fp = fingerprint(vector)
        row = self._rows.get(fp)
        if row is not None:
            return row
        pid = self.pool.find(vector) if self.pool is not None else None
        self._extend(vector[None, :], [pid])
        return len(self.vectors) - 1

    def add_ray(self, vector, pid=None) -> None:
        fp = fingerprint(vector)
        if fp in self._ray_fps:
            return
        self._ray_fps.add(fp)
        if pid is None and self.pool is not None:
            pid = self.pool.find(vector)
        self.rays.append(np.asarray(vector, dtype=float))
        self.ray_ids.append(pid)

    def values(self, X: np.ndarray) -> np.ndarray:
        """Array (rows, K, len(X)) of ``pi_r^T (h_k - T x)``."""
        X = np.atleast_2d(X)
        return self._a[:, :, None] - (self._b @ X.T)[:, None, :]

    def best(self, X: np.ndarray):
        """Per scenario and ``x``: best value and row, arrays of shape (K, len(X))."""
        if not self.vectors:
            raise EmptyPool("no dual solutions available for initialization")
        vals = self.values(X)
        rows = np.argmax(vals, axis=0)
        return np.take_along_axis(vals, rows[None], axis=0)[0], rows

    def sel_values(self, sel: list, X: np.ndarray) -> np.ndarray:
        """``Q_sel`` per scenario and ``x``: (K, len(X)); ``-inf`` for empty sets."""
        X = np.atleast_2d(X)
        out = np.full((len(sel), X.shape[0]), -np.inf)
        for k, rows in enumerate(sel):
            if rows:
                r = np.fromiter(rows, dtype=np.int64)
                out[k] = (self._a[r, k][:, None] - self._b[r] @ X.T).max(axis=0)
        return out


@dataclass
class InitOutcome:
    cuts: list = field(default_factory=list)
    x_ws: Optional[np.ndarray] = None
    z_ws: float = math.nan
    new_duals: list = field(default_factory=list)
    used_ids: set = field(default_factory=set)
    init_time: float = 0.0
    sp_solves: int = 0
    converged: bool = True
    phase_one_iterations: int = 0
    phase_two_iterations: int = 0
    min_v_sel: float = math.nan
    sel_sizes: list = field(default_factory=list)


def approx_objective(x, view: PoolView, scenarios: ScenarioSet, instance: CoreInstance) -> float:
    """``c^T x + sum_k p_k max_{pi in view} pi^T (h_k - T x)``."""
    if len(view) == 0:
        raise EmptyPool("pool view is empty")
    x = np.asarray(x, dtype=float)
    R = scenario_rhs(instance, scenarios) - instance.T @ x
    vals = (view.matrix @ R.T).max(axis=0)
    return float(instance.c @ x + scenarios.probabilities @ vals)


def _v_hat(wp: WorkingPool, X, scenarios, instance):
    X = np.atleast_2d(X)
    vals, rows = wp.best(X)
    return X @ instance.c + scenarios.probabilities @ vals, vals, rows


# ---------------------------------------------------------------------------
# static


def _record(outcome: InitOutcome, wp: WorkingPool, row: int):
    pid = wp.ids[row]
    if pid is not None:
        outcome.used_ids.add(pid)


def _cut_from_row(wp: WorkingPool, row: int, scenario, instance) -> Cut:
    cut = make_optimality_cut(wp.vectors[row], scenario, instance, source=FROM_INIT)
    cut.dual_id = wp.ids[row]
    return cut


def static_cuts(archive: SolutionArchive, view: PoolView, scenarios: ScenarioSet, instance: CoreInstance,
                *, rng: Optional[np.random.Generator] = None, single_cut: bool = False,
                pool: Optional[DualPool] = None, n_solutions: int = 2) -> InitOutcome:
    """One pool dual per scenario for each of the first ``n_solutions`` archived optima."""
    t0 = time.perf_counter()
    if not archive.opt:
        raise EmptyArchive("static initialization needs at least one archived optimum")
    rng = rng or np.random.default_rng(0)
    wp = WorkingPool(instance, scenarios, view, pool)
    if len(wp) == 0:
        raise EmptyPool("pool view is empty")
    out = InitOutcome()
    K = scenarios.K
    chosen = [[] for _ in range(K)]
    for x in archive.opt[:n_solutions]:
        vals = wp.values(x)[:, :, 0]
        picks = []
        for k in range(K):
            col = vals[:, k]
            top = col.max()
            ties = np.flatnonzero(col >= top - 1e-12 * (1.0 + abs(top)))
            row = int(ties[0] if ties.size == 1 else rng.choice(ties))
            picks.append(row)
            if row not in chosen[k]:
                chosen[k].append(row)
        if single_cut:
            cut = aggregate_single_cut([wp.vectors[r] for r in picks], scenarios, instance, source=FROM_INIT)
            cut.dual_id = tuple(wp.ids[r] for r in picks)
            out.cuts.append(cut)
    for k in range(K):
        for row in chosen[k]:
            _record(out, wp, row)
            if not single_cut:
                out.cuts.append(_cut_from_row(wp, row, scenarios[k], instance))
    out.sel_sizes = [len(c) for c in chosen]
    out.init_time = time.perf_counter() - t0
    return out


def boosted_static_cuts(archive: SolutionArchive, view: PoolView, scenarios: ScenarioSet, instance: CoreInstance,
                        n_total: int, *, single_cut: bool = False, pool: Optional[DualPool] = None) -> InitOutcome:
    """Top ``ceil(n_total / K)`` pool duals per scenario, ranked at the first two optima."""
    t0 = time.perf_counter()
    if not archive.opt:
        raise EmptyArchive("static initialization needs at least one archived optimum")
    K = scenarios.K
    if n_total < 1:
        raise ValueError("n_total must be positive")
    per = math.ceil(n_total / K)
    wp = WorkingPool(instance, scenarios, view, pool)
    if len(wp) == 0:
        raise EmptyPool("pool view is empty")
    X = np.array(archive.opt[:2])
    score = wp.values(X).max(axis=2)  # (rows, K)
    out = InitOutcome()
    ranked = []
    for k in range(K):
        order = np.argsort(-score[:, k], kind="stable")[:per]
        ranked.append([int(r) for r in order])
        for row in order:
            _record(out, wp, int(row))
            if not single_cut:
                out.cuts.append(_cut_from_row(wp, int(row), scenarios[k], instance))
    if single_cut:
        for i in range(max(len(r) for r in ranked)):
            rows = [r[min(i, len(r) - 1)] for r in ranked]
            cut = aggregate_single_cut([wp.vectors[r] for r in rows], scenarios, instance, source=FROM_INIT)
            cut.dual_id = tuple(wp.ids[r] for r in rows)
            out.cuts.append(cut)
    out.sel_sizes = [len(r) for r in ranked]
    out.init_time = time.perf_counter() - t0
    return out


# ---------------------------------------------------------------------------
# adaptive


class _Evaluator:
    """Subproblem solves during initialization; feeds duals into the working pool."""

    def __init__(self, instance, scenarios, wp: WorkingPool, outcome: InitOutcome, recourse: Recourse):
        self.instance = instance
        self.scenarios = scenarios
        self.wp = wp
        self.out = outcome
        self.recourse = recourse
        self._seen: set = set()

    def solve(self, x):
        """Return ``(z, rows, rays)``: true objective, dual rows per scenario and infeasibility rays."""
        rows, rays = [], []
        total = float(self.instance.c @ x)
        feasible = True
        for s in self.scenarios:
            res = self.recourse.solve(x, s.xi)
            self.out.sp_solves += 1
            if res.feasible:
                rows.append(self._keep(res.dual, VERTEX))
                total += s.probability * res.value
            else:
                feasible = False
                rows.append(None)
                rays.append((s.id, res.ray))
                self._keep(res.ray, RAY)
        return (total if feasible else math.inf), rows, rays

    def _keep(self, vec, kind):
        fp = (kind, fingerprint(vec))
        if kind == RAY:
            self.wp.add_ray(vec)
            pid = self.wp.pool.find(vec) if self.wp.pool is not None else None
            row = None
        else:
            row = self.wp.add(vec)
            pid = self.wp.ids[row]
        if fp not in self._seen:
            self._seen.add(fp)
            if pid is None:
                self.out.new_duals.append((np.asarray(vec, dtype=float).copy(), kind))
            else:
                self.out.used_ids.add(pid)
        return row


def adaptive_phase_one(archive: SolutionArchive, wp: WorkingPool, scenarios: ScenarioSet, instance: CoreInstance,
                       mode: str = IP, evaluator: Optional[_Evaluator] = None):
    """Return ``(index into archive.opt, x_ws, iterations, infeasible indices)``."""
    if not archive.opt:
        raise EmptyArchive("adaptive initialization requires replication history")
    X = np.array(archive.opt)
    if mode == LP:
        v, _, _ = _v_hat(wp, X, scenarios, instance)
        i = int(np.argmin(v))
        return i, X[i], 0, set()
    verified: dict = {}
    iterations = 0
    while True:
        v, _, _ = _v_hat(wp, X, scenarios, instance)
        for j, z in verified.items():
            if not math.isfinite(z):
                v[j] = math.inf
        i = int(np.argmin(v))
        if i in verified or iterations >= len(X):
            break
        z, _, _ = evaluator.solve(X[i])
        verified[i] = z
        iterations += 1
    infeasible = {j for j, z in verified.items() if not math.isfinite(z)}
    return i, X[i], iterations, infeasible


def adaptive_initialization(archive: SolutionArchive, view: PoolView, scenarios: ScenarioSet, instance: CoreInstance,
                            *, mode: str = IP, pool: Optional[DualPool] = None, ray_view: Optional[PoolView] = None,
                            active_lp_duals: Optional[list] = None, single_cut: bool = False,
                            recourse: Optional[Recourse] = None, iteration_limit: Optional[int] = None) -> InitOutcome:
    """Run phase one then phase two and emit the initial cuts."""
    t0 = time.perf_counter()
    out = InitOutcome()
    wp = WorkingPool(instance, scenarios, view, pool, ray_view)
    ev = _Evaluator(instance, scenarios, wp, out, recourse or Recourse(instance))
    i_ws, x_ws, it1, _ = adaptive_phase_one(archive, wp, scenarios, instance, mode, ev)
    out.phase_one_iterations = it1
    adaptive_phase_two(x_ws, archive, wp, scenarios, instance, out, ev, mode=mode,
                       active_lp_duals=active_lp_duals or [], single_cut=single_cut,
                       iteration_limit=iteration_limit)
    out.init_time = time.perf_counter() - t0
    return out


def adaptive_phase_two(x_ws, archive: SolutionArchive, wp: WorkingPool, scenarios: ScenarioSet,
                       instance: CoreInstance, out: InitOutcome, ev: _Evaluator, *, mode: str = IP,
                       active_lp_duals=(), single_cut: bool = False, iteration_limit: Optional[int] = None) -> InitOutcome:
    K = scenarios.K
    p = scenarios.probabilities
    c = instance.c
    x_ws = np.asarray(x_ws, dtype=float)
    if len(wp) == 0:
        # nothing pooled yet: the warm start's own duals are the only source
        ev.solve(x_ws)
    X = np.array(archive.feas) if archive.feas else x_ws[None, :]
    excluded = np.zeros(len(X), dtype=bool)
    feas_cuts = []

    # seed with the best pooled duals at x_ws (its own optima in ip mode)
    _, rows_ws = wp.best(x_ws)
    sel = [{int(rows_ws[k, 0])} for k in range(K)]
    seeded_lp = [set() for _ in range(K)]
    for k, vec in active_lp_duals:
        row = wp.add(vec)
        sel[k].add(row)
        seeded_lp[k].add(row)
    z_ws = float(_v_hat(wp, x_ws, scenarios, instance)[0][0])
    out.x_ws, out.z_ws = x_ws.copy(), z_ws

    limit = iteration_limit or 10 * len(X) + 10
    iterations = 0
    while True:
        tol = 1e-9 * (1.0 + abs(z_ws))
        v_sel = X @ c + p @ wp.sel_values(sel, X)
        v_sel[excluded] = np.inf
        j = int(np.argmin(v_sel))
        if v_sel[j] >= z_ws - tol:
            break
        iterations += 1
        if iterations > limit:
            raise IterationLimit("adaptive phase two did not converge")
        xb = X[j]
        v_hat, q_hat, rows = _v_hat(wp, xb, scenarios, instance)
        if v_hat[0] >= z_ws - tol:
            q_sel = wp.sel_values(sel, xb)[:, 0]
            gain = q_hat[:, 0] - q_sel
            current = v_sel[j]
            for k in np.argsort(-gain, kind="stable"):
                if gain[k] <= 0:
                    continue
                sel[k].add(int(rows[k, 0]))
                current += p[k] * gain[k]
                if current >= z_ws - tol:
                    break
        elif mode == IP:
            z_bar, sp_rows, rays = ev.solve(xb)
            for k, row in enumerate(sp_rows):
                if row is not None:
                    sel[k].add(row)
            if rays:
                excluded[j] = True
                for k, ray in rays:
                    cut = make_feasibility_cut(ray, scenarios[k], instance, source=FROM_INIT)
                    cut.dual_id = wp.pool.find(ray) if wp.pool is not None else None
                    feas_cuts.append(cut)
            elif z_bar < z_ws:
                x_ws, z_ws = xb.copy(), z_bar
        else:
            # LP variant: take the candidate as warm start and stop
            x_ws = xb.copy()
            for k in range(K):
                sel[k].add(int(rows[k, 0]))
            out.converged = False
            break
    out.phase_two_iterations = iterations
    out.x_ws, out.z_ws = x_ws, z_ws
    vs = X @ c + p @ wp.sel_values(sel, X)
    vs[excluded] = np.inf
    out.min_v_sel = float(vs.min()) if len(vs) else math.inf

    for k in range(K):
        for row in sel[k]:
            _record(out, wp, row)
    out.sel_sizes = [len(s) for s in sel]
    if single_cut:
        out.cuts = _single_cut_selection(x_ws, z_ws, X, excluded, sel, wp, scenarios, instance, ev)
    else:
        for k in range(K):
            for row in sorted(sel[k] - seeded_lp[k]):
                out.cuts.append(_cut_from_row(wp, row, scenarios[k], instance))
    out.cuts.extend(feas_cuts)
    return out


def _single_cut_selection(x_ws, z_ws, X, excluded, sel, wp, scenarios, instance, ev):
    K = scenarios.K
    z_true, rows_ws, _ = ev.solve(x_ws)
    if any(r is None for r in rows_ws):
        rows_ws = [int(r) for r in wp.best(x_ws)[1][:, 0]]
    cuts = [_aggregate(wp, rows_ws, scenarios, instance)]
    tol = 1e-9 * (1.0 + abs(z_ws))
    for j, xb in enumerate(X):
        if excluded[j]:
            continue
        theta = max(cut.value(xb) for cut in cuts)
        if instance.c @ xb + theta >= z_ws - tol:
            continue
        rows = []
        for k in range(K):
            r = np.fromiter(sel[k], dtype=np.int64)
            vals = wp._a[r, k] - wp._b[r] @ xb
            rows.append(int(r[int(np.argmax(vals))]))
        cuts.append(_aggregate(wp, rows, scenarios, instance))
    return cuts


def _aggregate(wp, rows, scenarios, instance) -> Cut:
    cut = aggregate_single_cut([wp.vectors[r] for r in rows], scenarios, instance, source=FROM_INIT)
    cut.dual_id = tuple(wp.ids[r] for r in rows)
    return cut
