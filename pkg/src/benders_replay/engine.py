"""Benders decomposition for one SAA replication.

LP mode runs the cutting-plane loop on the main problem; before solving
subproblems at a main-problem solution it scans the configured pool view
for violated cuts and, when it finds any, adds only those. IP mode first
solves the LP relaxation the same way, keeps the cuts active at its optimum,
adds initialization cuts and then runs branch-and-cut, separating Benders
cuts at integer candidates.

Shared state (pool, solution archive) is only read during a replication;
:func:`commit_replication` folds a finished replication back into it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .cuts import (
    AGGREGATE,
    FEASIBILITY,
    FROM_INIT,
    FROM_POOL,
    FROM_SUBPROBLEM,
    OPTIMALITY,
    Cut,
    aggregate_single_cut,
    make_feasibility_cut,
    make_optimality_cut,
)
from .errors import EmptyArchive, EmptyPool, InvalidConfig, IterationLimit, TimeLimit
from .initialization import (
    IP,
    LP,
    InitOutcome,
    SolutionArchive,
    adaptive_initialization,
    boosted_static_cuts,
    static_cuts,
)
from .lp import LpModel, LpStatus, solve
from .metrics import ReplicationMetrics
from .mip import Accept, branch_and_bound, relative_gap_pct
from .model import CoreInstance, ScenarioSet
from .pool import CURATED, FULL, RANDOM_CURATED, RAY, VERTEX, DualPool, empty_view, fingerprint
from .recourse import Recourse, scenario_rhs

METHODS = ("baseline", "dsp", "curated", "random_curated", "static", "boosted_static", "adaptive")
CUT_MODES = ("multi", "single")
MODES = ("auto", "lp", "ip")

_VIEW = {"baseline": None, "dsp": FULL}
_CURATION = {"dsp": FULL, "random_curated": RANDOM_CURATED}


def pool_view_for(method: str) -> Optional[str]:
    return _VIEW.get(method, CURATED)


def curation_mode_for(method: str) -> str:
    return _CURATION.get(method, CURATED)


@dataclass
class BendersOptions:
    method: str = "baseline"
    cut_mode: str = "multi"
    mode: str = "auto"
    gap_pct: float = 1e-4
    violation_tol: float = 1e-5
    iteration_limit: int = 10_000
    node_limit: int = 10**6
    warm_start: bool = True
    theta_lower_bound: Optional[float] = None
    time_limit: Optional[float] = None
    seed: int = 0
    boost_n: Optional[int] = None
    gap_fallback: bool = True
    active_tol: float = 1e-7

    def validate(self) -> "BendersOptions":
        if self.method not in METHODS:
            raise InvalidConfig(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.cut_mode not in CUT_MODES:
            raise InvalidConfig(f"cut_mode must be one of {CUT_MODES}")
        if self.mode not in MODES:
            raise InvalidConfig(f"mode must be one of {MODES}")
        if self.gap_pct < 0 or self.violation_tol < 0:
            raise InvalidConfig("tolerances must be nonnegative")
        if self.iteration_limit < 1 or self.node_limit < 1:
            raise InvalidConfig("limits must be positive")
        return self

    @property
    def single(self) -> bool:
        return self.cut_mode == "single"


@dataclass
class SharedState:
    """Information carried between replications of one method."""

    pool: DualPool
    archive: SolutionArchive = field(default_factory=SolutionArchive)
    replication: int = 0

    @classmethod
    def empty(cls, instance: CoreInstance, seed: int = 0) -> "SharedState":
        return cls(DualPool(instance.n_recourse_rows, seed=seed))

    def copy(self) -> "SharedState":
        return SharedState(self.pool.copy(), self.archive.copy(), self.replication)


@dataclass
class ReplicationResult:
    x: np.ndarray
    value: float
    metrics: ReplicationMetrics
    method: str
    cut_mode: str
    mode: str
    feas_trail: list = field(default_factory=list)
    used_ids: set = field(default_factory=set)
    new_duals: list = field(default_factory=list)
    lower_bounds: list = field(default_factory=list)
    upper_bounds: list = field(default_factory=list)
    cuts: list = field(default_factory=list)
    init: Optional[InitOutcome] = None
    lp_init: Optional[InitOutcome] = None
    theta: Optional[np.ndarray] = None


# ---------------------------------------------------------------------------
# main problem


class MainProblem:
    """``min c^T x + sum_k p_k theta_k`` (or ``+ Theta``) over the registered cuts."""

    def __init__(self, instance: CoreInstance, probabilities, single: bool, theta_lb: float):
        self.instance = instance
        self.single = single
        n1 = instance.n_first
        self.n1 = n1
        self.n_theta = 1 if single else len(probabilities)
        n = n1 + self.n_theta
        self.n = n
        self.objective = np.concatenate([instance.c, [1.0] if single else probabilities])
        self.lower = np.concatenate([instance.x_lower, np.full(self.n_theta, theta_lb)])
        self.upper = np.concatenate([instance.x_upper, np.full(self.n_theta, np.inf)])
        r0 = instance.A.shape[0]
        self._base = np.zeros((r0, n))
        self._base[:, :n1] = instance.A
        self._base_senses = list(instance.first_senses)
        self._base_rhs = instance.b.copy()
        self._rows = np.zeros((16, n))
        self._rhs = np.zeros(16)
        self.cuts: list = []
        self.cut_duals: list = []
        self._keys: set = set()
        self.basis = None

    def __len__(self):
        return len(self.cuts)

    def add(self, cut: Cut, duals=()) -> bool:
        """Register ``cut``; ``duals`` lists ``(scenario, vector)`` pairs that define it."""
        key = cut.key()
        if key in self._keys:
            return False
        self._keys.add(key)
        i = len(self.cuts)
        if i == self._rows.shape[0]:
            self._rows = np.vstack([self._rows, np.zeros_like(self._rows)])
            self._rhs = np.concatenate([self._rhs, np.zeros_like(self._rhs)])
        row = self._rows[i]
        row[:] = 0.0
        row[: self.n1] = cut.beta
        if cut.kind == OPTIMALITY:
            row[self.n1 + (0 if cut.scenario_id == AGGREGATE else cut.scenario_id)] = 1.0
        self._rhs[i] = cut.alpha
        self.cuts.append(cut)
        self.cut_duals.append(list(duals))
        return True

    def model(self, lower=None, upper=None) -> LpModel:
        m = len(self.cuts)
        mat = np.vstack([self._base, self._rows[:m]])
        return LpModel(
            self.objective,
            mat,
            self._base_senses + [">"] * m,
            np.concatenate([self._base_rhs, self._rhs[:m]]),
            self.lower if lower is None else lower,
            self.upper if upper is None else upper,
        )

    def solve(self, lower=None, upper=None, basis="last"):
        if isinstance(basis, str):
            basis = self.basis
        sol = solve(self.model(lower, upper), basis)
        if sol.basis is not None and lower is None:
            self.basis = sol.basis
        return sol

    def split(self, primal):
        return primal[: self.n1], primal[self.n1 :]

    def retain_active(self, x, theta, tol: float) -> int:
        """Drop cuts with slack above ``tol * norm`` at ``(x, theta)``; returns the kept count."""
        keep = []
        for cut, duals in zip(self.cuts, self.cut_duals):
            th = 0.0
            if cut.kind == OPTIMALITY:
                th = theta[0 if cut.scenario_id == AGGREGATE else cut.scenario_id]
            slack = th - cut.value(x)
            if slack <= tol * cut.norm:
                keep.append((cut, duals))
        self.cuts, self.cut_duals, self._keys = [], [], set()
        self._rows = np.zeros((max(16, len(keep)), self.n))
        self._rhs = np.zeros(self._rows.shape[0])
        for cut, duals in keep:
            self.add(cut, duals)
        self.basis = None
        return len(keep)


# ---------------------------------------------------------------------------


class _Replication:
    def __init__(self, instance: CoreInstance, scenarios: ScenarioSet, options: BendersOptions,
                 shared: SharedState, lp_mode: bool):
        self.instance = instance
        self.scenarios = scenarios
        self.opt = options
        self.shared = shared
        self.lp_mode = lp_mode
        self.K = scenarios.K
        self.p = scenarios.probabilities
        self.hk = scenario_rhs(instance, scenarios)
        self.metrics = ReplicationMetrics()
        self.recourse = Recourse(instance, warm_start=options.warm_start)
        lb = instance.theta_lower_bound if options.theta_lower_bound is None else options.theta_lower_bound
        self.mp = MainProblem(instance, self.p, options.single, lb)
        which = pool_view_for(options.method)
        m2 = instance.n_recourse_rows
        if which is None:
            self.view, self.ray_view = empty_view(m2), empty_view(m2)
        else:
            self.view = shared.pool.view(which, VERTEX)
            self.ray_view = shared.pool.view(which, RAY)
        self.used_ids: set = set()
        self.new_duals: dict = {}
        self.feas_trail: list = []
        self._feas_keys: set = set()
        self.U = math.inf
        self.x_best = None
        self.lower_bounds: list = []
        self.upper_bounds: list = []
        self.deadline = None if options.time_limit is None else time.monotonic() + options.time_limit
        self.TmatT = instance.T.T

    # -- bookkeeping ------------------------------------------------------

    def _check_time(self):
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise TimeLimit("replication time limit reached")

    def _note_dual(self, vec, kind, pid):
        if pid is None:
            pid = self.shared.pool.find(vec)
        if pid is not None:
            self.used_ids.add(int(pid))
        else:
            self.new_duals.setdefault((kind, fingerprint(vec)), (np.asarray(vec, dtype=float).copy(), kind))

    def register(self, cut: Cut, duals) -> bool:
        """Add ``cut`` defined by ``duals = [(k, vector, kind, pool_id)]``."""
        if not self.mp.add(cut, [(k, v) for k, v, kind, _ in duals if kind == VERTEX]):
            return False
        for _, vec, kind, pid in duals:
            self._note_dual(vec, kind, pid)
        m = self.metrics
        if cut.kind == FEASIBILITY:
            m.cuts_feasibility += 1
        if cut.source == FROM_POOL:
            m.cuts_dsp += 1
        elif cut.source == FROM_INIT:
            m.cuts_init += 1
        else:
            m.cuts_sp += 1
        return True

    def add_init_cuts(self, outcome: InitOutcome) -> None:
        for cut in outcome.cuts:
            if self.mp.add(cut, self._init_duals(cut)):
                self.metrics.cuts_init += 1
        self.used_ids |= outcome.used_ids
        for vec, kind in outcome.new_duals:
            self._note_dual(vec, kind, None)
        self.metrics.init_sp_solves += outcome.sp_solves

    def _init_duals(self, cut: Cut):
        if cut.kind != OPTIMALITY:
            return []
        if cut.scenario_id != AGGREGATE:
            pid = cut.dual_id
            if pid is not None and pid in self.shared.pool:
                return [(cut.scenario_id, self.shared.pool.get(pid).vector)]
            return []
        return []

    def record_feasible(self, x):
        key = np.asarray(x, dtype=float).tobytes()
        if key not in self._feas_keys:
            self._feas_keys.add(key)
            self.feas_trail.append(np.asarray(x, dtype=float).copy())

    # -- cut generation ---------------------------------------------------

    def _norm(self, alpha, beta):
        return math.sqrt(1.0 + alpha * alpha + beta @ beta)

    def pool_cuts(self, x, theta) -> int:
        """Alg. 3 pool scan; registers violated pool cuts and returns how many were added."""
        if len(self.view) == 0 and len(self.ray_view) == 0:
            return 0
        t0 = time.perf_counter()
        tol = self.opt.violation_tol
        R = self.hk - self.instance.T @ x
        found = []
        if len(self.ray_view):
            vals = self.ray_view.values(R)  # (n_rays, K)
            rows = np.argmax(vals, axis=0)
            for k in np.flatnonzero(vals[rows, np.arange(self.K)] > 0):
                r = self.ray_view.matrix[rows[k]]
                cut = make_feasibility_cut(r, self.scenarios[k], self.instance, source=FROM_POOL)
                cut.dual_id = int(self.ray_view.ids[rows[k]])
                if cut.value(x) >= tol * cut.norm:
                    found.append((cut, [(int(k), r, RAY, cut.dual_id)]))
        if len(self.view):
            vals, ids, rows = self.view.best_all(R)
            if self.opt.single:
                amount = self.p @ vals - theta[0]
                if amount > 0:
                    P = self.view.matrix[rows]
                    cut = aggregate_single_cut(P, self.scenarios, self.instance, source=FROM_POOL)
                    cut.dual_id = tuple(int(i) for i in ids)
                    if amount >= tol * cut.norm:
                        found.append((cut, [(k, P[k], VERTEX, int(ids[k])) for k in range(self.K)]))
            else:
                for k in np.flatnonzero(vals - theta > 0):
                    pi = self.view.matrix[rows[k]]
                    alpha = float(pi @ self.hk[k])
                    beta = self.TmatT @ pi
                    if vals[k] - theta[k] >= tol * self._norm(alpha, beta):
                        cut = Cut(int(k), alpha, beta, OPTIMALITY, FROM_POOL, int(ids[k]))
                        found.append((cut, [(int(k), pi, VERTEX, int(ids[k]))]))
        self.metrics.dsp_t += time.perf_counter() - t0
        return sum(self.register(c, d) for c, d in found)

    def solve_subproblems(self, x):
        t0 = time.perf_counter()
        R = self.hk - self.instance.T @ x
        results = [self.recourse.solve_rhs(R[k]) for k in range(self.K)]
        self.metrics.sp_t += time.perf_counter() - t0
        self.metrics.sp_count += 1
        self.metrics.sp_solves += self.K
        feasible = all(r.feasible for r in results)
        z = float(self.instance.c @ x + sum(self.p[k] * results[k].value for k in range(self.K))) if feasible else math.inf
        return results, z, R

    def sp_cut_candidates(self, x, theta, results, R):
        """All cuts from subproblem results with their violation amounts and thresholds."""
        cands = []
        if self.opt.single and all(r.feasible for r in results):
            P = np.array([r.dual for r in results])
            cut = aggregate_single_cut(P, self.scenarios, self.instance)
            amount = cut.value(x) - theta[0]
            q = float(self.p @ np.array([r.value for r in results]))
            cands.append((cut, amount, q, [(k, P[k], VERTEX, None) for k in range(self.K)]))
            return cands
        for k, res in enumerate(results):
            if res.feasible:
                if self.opt.single:
                    continue
                cut = make_optimality_cut(res.dual, self.scenarios[k], self.instance)
                cands.append((cut, cut.value(x) - theta[k], res.value, [(k, res.dual, VERTEX, None)]))
            else:
                cut = make_feasibility_cut(res.ray, self.scenarios[k], self.instance)
                cands.append((cut, cut.value(x), 0.0, [(k, res.ray, RAY, None)]))
        return cands

    def add_sp_cuts(self, cands, force_positive: bool) -> int:
        t0 = time.perf_counter()
        tol = self.opt.violation_tol
        added = 0
        for cut, amount, q, duals in cands:
            ok = amount >= tol * cut.norm
            if not ok and force_positive:
                ok = amount > 1e-9 * (1.0 + abs(q))
            if ok:
                added += self.register(cut, duals)
        self.metrics.sp_t += time.perf_counter() - t0
        return added

    # -- LP phase ----------------------------------------------------------

    def gap(self, L):
        if not math.isfinite(self.U):
            return math.inf
        if self.U - L <= 1e-12 * (1.0 + abs(self.U)):
            return 0.0
        return 100.0 * (self.U - L) / max(abs(L), 1e-10)

    def lp_loop(self, record_trail: bool):
        t_lp = time.perf_counter()
        sol = None
        for _ in range(self.opt.iteration_limit):
            self._check_time()
            sol = self.mp.solve()
            if sol.status is LpStatus.INFEASIBLE:
                raise InvalidConfig("main problem is infeasible; the replication has no feasible first stage")
            if sol.status is not LpStatus.OPTIMAL:
                raise InvalidConfig("main problem is unbounded; set a finite theta lower bound")
            self.metrics.iterations += 1
            x, theta = self.mp.split(sol.primal)
            L = sol.objective_value
            self.lower_bounds.append(L)
            self.upper_bounds.append(self.U)
            if self.gap(L) <= self.opt.gap_pct:
                break
            if self.pool_cuts(x, theta):
                continue
            results, z, R = self.solve_subproblems(x)
            if z < self.U:
                self.U, self.x_best = z, x.copy()
                self.upper_bounds[-1] = self.U
            if record_trail and math.isfinite(z):
                self.record_feasible(x)
            cands = self.sp_cut_candidates(x, theta, results, R)
            added = self.add_sp_cuts(cands, False)
            if not added and self.opt.gap_fallback and self.gap(L) > self.opt.gap_pct:
                added = self.add_sp_cuts(cands, True)
            if not added:
                break
        else:
            raise IterationLimit(f"no convergence within {self.opt.iteration_limit} iterations")
        self.metrics.lp_t += time.perf_counter() - t_lp
        self.metrics.final_gap_pct = self.gap(self.lower_bounds[-1])
        if self.x_best is None:
            raise InvalidConfig("no first-stage solution with feasible recourse was found")
        return sol

    # -- IP phase ---------------------------------------------------------

    def separate(self, sol):
        self._check_time()
        self.metrics.callback_calls += 1
        x, theta = self.mp.split(sol.primal)
        x = x.copy()
        mask = self.instance.integer
        x[mask] = np.round(x[mask])
        if self.pool_cuts(x, theta):
            return None
        results, z, R = self.solve_subproblems(x)
        if math.isfinite(z):
            self.record_feasible(x)
        cands = self.sp_cut_candidates(x, theta, results, R)
        if self.add_sp_cuts(cands, False):
            return None
        if math.isfinite(z) and relative_gap_pct(z, sol.objective_value) > self.opt.gap_pct and self.opt.gap_fallback:
            if self.add_sp_cuts(cands, True):
                return None
        if not math.isfinite(z):
            # infeasible but no usable feasibility cut: reject the candidate
            return Accept(math.inf)
        return Accept(z)

    def evaluate(self, x):
        """True objective at ``x`` (counts towards initialization)."""
        R = self.hk - self.instance.T @ x
        results = [self.recourse.solve_rhs(R[k]) for k in range(self.K)]
        self.metrics.init_sp_solves += self.K
        if not all(r.feasible for r in results):
            return math.inf
        return float(self.instance.c @ x + sum(self.p[k] * results[k].value for k in range(self.K)))


# ---------------------------------------------------------------------------
# initialization hooks


def _needs_history(method: str) -> bool:
    return method in ("static", "boosted_static", "adaptive")


def _initialize(run: _Replication, stage: str, active_duals=None) -> Optional[InitOutcome]:
    """Initialization cuts for ``stage`` ('lp' phase or 'ip' phase)."""
    opt = run.opt
    method = opt.method
    if not _needs_history(method):
        return None
    archive = run.shared.archive
    if not archive.opt:
        raise EmptyArchive(f"method {method!r} requires replication history")
    view = run.view
    rng = np.random.default_rng([opt.seed, run.shared.replication, 0 if stage == LP else 1])
    if method == "static" or (method == "boosted_static" and stage == LP):
        if len(view) == 0:
            return None
        return static_cuts(archive, view, run.scenarios, run.instance, rng=rng, single_cut=opt.single,
                           pool=run.shared.pool)
    if method == "boosted_static":
        if len(view) == 0:
            return None
        n = opt.boost_n
        if n is None:
            probe = adaptive_initialization(archive, view, run.scenarios, run.instance, mode=IP,
                                            pool=run.shared.pool, ray_view=run.ray_view,
                                            active_lp_duals=active_duals, single_cut=opt.single)
            n = len(probe.cuts)
        n = max(n, run.K)
        return boosted_static_cuts(archive, view, run.scenarios, run.instance, n, single_cut=opt.single,
                                   pool=run.shared.pool)
    mode = IP if stage == IP else LP
    return adaptive_initialization(archive, view, run.scenarios, run.instance, mode=mode, pool=run.shared.pool,
                                   ray_view=run.ray_view, active_lp_duals=active_duals, single_cut=opt.single,
                                   recourse=run.recourse)


def _result(run: _Replication, x, value, mode: str, init=None, lp_init=None, theta=None) -> ReplicationResult:
    m = run.metrics
    m.cut_t = m.dsp_t + m.sp_t
    m.pool_full = len(run.shared.pool)
    m.pool_curated = len(run.shared.pool.curated)
    return ReplicationResult(
        x=np.asarray(x, dtype=float),
        value=float(value),
        metrics=m,
        method=run.opt.method,
        cut_mode=run.opt.cut_mode,
        mode=mode,
        feas_trail=run.feas_trail,
        used_ids=set(run.used_ids),
        new_duals=list(run.new_duals.values()),
        lower_bounds=run.lower_bounds,
        upper_bounds=run.upper_bounds,
        cuts=list(run.mp.cuts),
        init=init,
        lp_init=lp_init,
        theta=theta,
    )


def solve_replication_lp(instance: CoreInstance, scenarios: ScenarioSet, options: Optional[BendersOptions] = None,
                         shared: Optional[SharedState] = None) -> ReplicationResult:
    """Benders decomposition of the (relaxed) SAA problem."""
    options = (options or BendersOptions()).validate()
    shared = shared or SharedState.empty(instance)
    t0 = time.perf_counter()
    run = _Replication(instance, scenarios, options, shared, lp_mode=True)
    init = _initialize(run, LP)
    if init is not None:
        run.add_init_cuts(init)
        run.metrics.init_t = init.init_time
    sol = run.lp_loop(record_trail=True)
    run.metrics.total_t = time.perf_counter() - t0
    _, theta = run.mp.split(sol.primal)
    return _result(run, run.x_best, run.U, "lp", init=init, theta=theta)


def _active_duals(mp: MainProblem) -> list:
    out = []
    for duals in mp.cut_duals:
        out.extend(duals)
    return out


def solve_replication_ip(instance: CoreInstance, scenarios: ScenarioSet, options: Optional[BendersOptions] = None,
                         shared: Optional[SharedState] = None) -> ReplicationResult:
    """LP-relaxation phase, active-cut retention, initialization, then branch-and-cut."""
    options = (options or BendersOptions()).validate()
    shared = shared or SharedState.empty(instance)
    t0 = time.perf_counter()
    run = _Replication(instance, scenarios, options, shared, lp_mode=False)
    m = run.metrics

    lp_init = _initialize(run, LP)
    if lp_init is not None:
        run.add_init_cuts(lp_init)
        m.init_t += lp_init.init_time
    sol = run.lp_loop(record_trail=False)
    lp_bound = sol.objective_value

    t_init = time.perf_counter()
    x_lp, theta_lp = run.mp.split(sol.primal)
    m.cuts_lp_retained = run.mp.retain_active(x_lp, theta_lp, options.active_tol)
    init = _initialize(run, IP, _active_duals(run.mp))
    if init is not None:
        run.add_init_cuts(init)
    incumbent = None
    if options.method == "adaptive":
        if init is not None and init.x_ws is not None and math.isfinite(init.z_ws):
            incumbent = (init.x_ws, init.z_ws)
    elif shared.archive.opt:
        x_prev = shared.archive.opt[-1]
        z_prev = run.evaluate(x_prev)
        if math.isfinite(z_prev):
            incumbent = (x_prev, z_prev)
    if incumbent is not None:
        run.record_feasible(incumbent[0])
    m.init_t += time.perf_counter() - t_init

    t_ip = time.perf_counter()
    root = {}
    mp = run.mp
    mask = np.concatenate([instance.integer, np.zeros(mp.n_theta, dtype=bool)])

    def node_lp(lo, up, basis):
        s = solve(mp.model(lo, up), basis)
        root.setdefault("bound", s.objective_value)
        return s

    def separate(s):
        return run.separate(s)

    inc = None
    if incumbent is not None:
        inc = (np.concatenate([incumbent[0], np.zeros(mp.n_theta)]), incumbent[1])
    bb = branch_and_bound(
        node_lp, mp.lower, mp.upper, mask, separate=separate, incumbent=inc,
        node_limit=options.node_limit, rel_gap_pct=options.gap_pct, deadline=run.deadline,
    )
    m.ip_t = time.perf_counter() - t_ip
    m.nodes = bb.nodes
    if bb.x is None:
        raise InvalidConfig("integer problem is infeasible")
    x_star = bb.x[: instance.n_first]
    z_star = bb.value
    L_root = root.get("bound", lp_bound)
    m.root_gap_pct = max(0.0, 100.0 * (z_star - L_root) / max(abs(z_star), 1e-10))
    m.final_gap_pct = relative_gap_pct(z_star, min(z_star, bb.bound))
    m.total_t = time.perf_counter() - t0
    return _result(run, x_star, z_star, "ip", init=init, lp_init=lp_init, theta=bb.x[instance.n_first:])


def solve_replication(instance, scenarios, options: Optional[BendersOptions] = None, shared=None) -> ReplicationResult:
    """Dispatch on ``options.mode`` ('auto' picks IP when the instance has integer variables)."""
    options = (options or BendersOptions()).validate()
    mode = options.mode
    if mode == "auto":
        mode = "ip" if instance.is_integer else "lp"
    if mode == "lp":
        return solve_replication_lp(instance, scenarios, options, shared)
    return solve_replication_ip(instance, scenarios, options, shared)


def commit_replication(shared: SharedState, result: ReplicationResult, method: Optional[str] = None,
                       replication: Optional[int] = None) -> None:
    """Fold a finished replication into the shared pool and archive."""
    rep = shared.replication + 1 if replication is None else replication
    shared.pool.end_of_replication_update(result.used_ids, result.new_duals,
                                          curation_mode_for(method or result.method), rep)
    for x in result.feas_trail:
        shared.archive.add_feas(x, rep)
    shared.archive.add_opt(result.x, rep)
    shared.replication = rep
