"""Dense bounded-variable revised simplex.

The kernel solves

    min/max  c^T x   s.t.  A x (<=, =, >=) b,   l <= x <= u

and always returns basic (vertex) solutions, row duals that are extreme
points of the dual polyhedron, and a Farkas ray when the rows are
inconsistent with the bounds. Right-hand-side changes are re-optimized
with the dual simplex method starting from a previous basis, which is how
scenario subproblems and branch-and-bound nodes are warm started.

Internally every row ``i`` gets a slack ``s_i`` with ``A x + s = b``:
``<=`` rows have ``s in [0, inf)``, ``>=`` rows ``s in (-inf, 0]`` and
equality rows ``s = 0``. Column ``n + i`` of the working matrix is the slack
of row ``i``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatch, NumericalBreakdown, StaleBasis

FEAS_TOL = 1e-8
OPT_TOL = 1e-9
PIVOT_TOL = 1e-11
REFACTOR_EVERY = 100
BLAND_AFTER = 1000

AT_LOWER = 0
AT_UPPER = 1
AT_ZERO = 2
BASIC = 3

_SENSES = ("<", "=", ">")


class LpStatus(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LpModel:
    """Linear program data.

    ``constraint_matrix`` may be a dense array or any scipy sparse matrix.
    ``row_senses`` holds one of ``"<"``, ``"="``, ``">"`` per row.
    """

    objective: np.ndarray
    constraint_matrix: object
    row_senses: Sequence[str]
    rhs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    objective_sense: str = "min"

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if sp.issparse(self.constraint_matrix):
            self.constraint_matrix = sp.csr_matrix(self.constraint_matrix, dtype=float)
        else:
            mat = np.asarray(self.constraint_matrix, dtype=float)
            if mat.ndim == 1 and mat.size == 0:
                mat = mat.reshape(0, self.objective.size)
            self.constraint_matrix = mat
        self.row_senses = np.asarray(list(self.row_senses), dtype="<U1")
        self.rhs = np.asarray(self.rhs, dtype=float)
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.validate()

    @property
    def n_cols(self) -> int:
        return self.objective.size

    @property
    def n_rows(self) -> int:
        return self.rhs.size

    def dense_matrix(self) -> np.ndarray:
        if sp.issparse(self.constraint_matrix):
            return self.constraint_matrix.toarray()
        return self.constraint_matrix

    def validate(self) -> None:
        m, n = self.constraint_matrix.shape
        if n != self.objective.size or n != self.lower.size or n != self.upper.size:
            raise DimensionMismatch(
                f"matrix has {n} columns, objective {self.objective.size}, "
                f"bounds {self.lower.size}/{self.upper.size}"
            )
        if m != self.rhs.size or m != self.row_senses.size:
            raise DimensionMismatch(
                f"matrix has {m} rows, rhs {self.rhs.size}, senses {self.row_senses.size}"
            )
        if self.objective_sense not in ("min", "max"):
            raise DimensionMismatch(f"unknown objective sense {self.objective_sense!r}")
        if not set(self.row_senses.tolist()) <= set(_SENSES):
            raise DimensionMismatch(f"row senses must be drawn from {_SENSES}")
        data = self.constraint_matrix.data if sp.issparse(self.constraint_matrix) else self.constraint_matrix
        if not (np.all(np.isfinite(data)) and np.all(np.isfinite(self.objective))):
            raise DimensionMismatch("matrix and objective must be finite")
        if not np.all(np.isfinite(self.rhs)):
            raise DimensionMismatch("rhs must be finite")
        if np.any(np.isnan(self.lower)) or np.any(np.isnan(self.upper)):
            raise DimensionMismatch("bounds may not be NaN")

    def with_rhs(self, rhs) -> "LpModel":
        return replace(self, rhs=np.asarray(rhs, dtype=float))

    def with_bounds(self, lower, upper) -> "LpModel":
        return replace(self, lower=np.asarray(lower, dtype=float), upper=np.asarray(upper, dtype=float))


@dataclass(frozen=True)
class Basis:
    """A simplex basis over structural columns followed by row slacks.

    ``head[i]`` is the column basic in row position ``i``; ``status`` holds
    one of ``AT_LOWER``, ``AT_UPPER``, ``AT_ZERO`` or ``BASIC`` per column.
    """

    head: np.ndarray
    status: np.ndarray
    n_struct: int

    @property
    def n_rows(self) -> int:
        return self.head.size

    def basic_columns(self) -> frozenset:
        return frozenset(int(j) for j in self.head)


@dataclass
class LpSolution:
    status: LpStatus
    primal: np.ndarray
    dual: np.ndarray
    objective_value: float
    basis: Optional[Basis]
    farkas_ray: Optional[np.ndarray] = None
    reduced_costs: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def _slack_bounds(senses: np.ndarray):
    lo = np.where(senses == ">", -np.inf, 0.0)
    up = np.where(senses == "<", np.inf, 0.0)
    return lo, up


class _Simplex:
    """Working state of one solve. Slack columns are kept implicit."""

    def __init__(self, A, b, c, lo, up, n_struct):
        self.A = A
        self.b = b
        self.m, self.n = A.shape
        self.n_struct = n_struct
        self.k = 0
        self.art = np.zeros((self.m, 0))
        self.c = c
        self.lo = lo
        self.up = up
        self.head = None
        self.status = None
        self.x = None
        self.Binv = None
        self.iterations = 0
        self.since_refactor = 0

    # -- column access -------------------------------------------------
    @property
    def ncol(self):
        return self.n + self.m + self.k

    def column(self, j):
        if j < self.n:
            return self.A[:, j]
        if j < self.n + self.m:
            col = np.zeros(self.m)
            col[j - self.n] = 1.0
            return col
        return self.art[:, j - self.n - self.m]

    def binv_column(self, j):
        if j < self.n:
            return self.Binv @ self.A[:, j]
        if j < self.n + self.m:
            return self.Binv[:, j - self.n].copy()
        return self.Binv @ self.art[:, j - self.n - self.m]

    def row_times_columns(self, rho):
        parts = [rho @ self.A, rho]
        if self.k:
            parts.append(rho @ self.art)
        return np.concatenate(parts)

    def add_artificials(self, rows, signs):
        self.k = len(rows)
        self.art = np.zeros((self.m, self.k))
        self.art[rows, np.arange(self.k)] = signs
        self.c = np.concatenate([self.c, np.zeros(self.k)])
        self.lo = np.concatenate([self.lo, np.zeros(self.k)])
        self.up = np.concatenate([self.up, np.full(self.k, np.inf)])
        self.status = np.concatenate([self.status, np.full(self.k, AT_LOWER, dtype=np.int8)])
        self.x = np.concatenate([self.x, np.zeros(self.k)])

    def drop_artificials(self):
        keep = self.n + self.m
        self.k = 0
        self.art = np.zeros((self.m, 0))
        self.c = self.c[:keep]
        self.lo = self.lo[:keep]
        self.up = self.up[:keep]
        self.status = self.status[:keep]
        self.x = self.x[:keep]

    # -- factorization -------------------------------------------------
    def refactor(self):
        B = np.empty((self.m, self.m))
        for i, j in enumerate(self.head):
            B[:, i] = self.column(j)
        try:
            Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise StaleBasis("basis matrix is singular") from exc
        if self.m and np.abs(B @ Binv - np.eye(self.m)).max() > 1e-6:
            raise StaleBasis("basis matrix is numerically singular")
        self.Binv = Binv
        self.since_refactor = 0

    def nonbasic_values(self):
        st = self.status
        x = np.zeros(self.ncol)
        x[st == AT_LOWER] = self.lo[st == AT_LOWER]
        x[st == AT_UPPER] = self.up[st == AT_UPPER]
        return x

    def recompute_primal(self):
        x = self.nonbasic_values()
        resid = self.b - self.A @ x[: self.n] - x[self.n : self.n + self.m]
        if self.k:
            resid = resid - self.art @ x[self.n + self.m :]
        x[self.head] = self.Binv @ resid
        self.x = x

    def reduced_costs(self):
        y = self.c[self.head] @ self.Binv
        d = self.c - self.row_times_columns(y)
        d[self.head] = 0.0
        return y, d

    def pivot(self, r, q, alpha):
        piv = alpha[r]
        row = self.Binv[r] / piv
        self.Binv -= np.outer(alpha, row)
        self.Binv[r] = row
        self.head[r] = q
        self.iterations += 1
        self.since_refactor += 1

    def maybe_refactor(self):
        if self.since_refactor >= REFACTOR_EVERY:
            self.refactor()
            self.recompute_primal()

    # -- feasibility tests ---------------------------------------------
    def primal_infeasibility(self):
        xb = self.x[self.head]
        below = self.lo[self.head] - xb
        above = xb - self.up[self.head]
        return np.maximum(below, above)

    def is_primal_feasible(self):
        return self.m == 0 or self.primal_infeasibility().max() <= FEAS_TOL

    def dual_infeasible_mask(self, d):
        st = self.status
        fixed = self.lo == self.up
        bad = ((st == AT_LOWER) & (d < -OPT_TOL)) | ((st == AT_UPPER) & (d > OPT_TOL))
        bad |= (st == AT_ZERO) & (np.abs(d) > OPT_TOL)
        return bad & ~fixed

    # -- primal simplex --------------------------------------------------
    def primal(self, limit):
        """Returns "optimal" or "unbounded". Assumes a primal feasible basis."""
        degenerate = 0
        bland = False
        for _ in range(limit):
            self.maybe_refactor()
            _, d = self.reduced_costs()
            bad = self.dual_infeasible_mask(d)
            if not bad.any():
                return "optimal"
            cand = np.flatnonzero(bad)
            if bland:
                q = int(cand[0])
            else:
                q = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if d[q] < 0 else -1.0
            alpha = self.binv_column(q)
            delta = -direction * alpha
            hb = self.head
            xb = self.x[hb]
            lob = self.lo[hb]
            upb = self.up[hb]
            dec = delta < -PIVOT_TOL
            inc = delta > PIVOT_TOL
            span = self.up[q] - self.lo[q]
            ratios = np.full(self.m, np.inf)
            with np.errstate(invalid="ignore", divide="ignore"):
                ratios[dec] = (xb[dec] - lob[dec]) / (-delta[dec])
                ratios[inc] = (upb[inc] - xb[inc]) / delta[inc]
            ratios = np.maximum(ratios, 0.0)
            if bland:
                t = ratios.min() if self.m else np.inf
                r = -1
                if np.isfinite(t):
                    ties = np.flatnonzero(ratios <= t + 1e-12)
                    r = int(ties[np.argmin(hb[ties])])
            else:
                relaxed = np.full(self.m, np.inf)
                with np.errstate(invalid="ignore", divide="ignore"):
                    relaxed[dec] = (xb[dec] - lob[dec] + FEAS_TOL) / (-delta[dec])
                    relaxed[inc] = (upb[inc] - xb[inc] + FEAS_TOL) / delta[inc]
                tmax = relaxed.min() if self.m else np.inf
                r = -1
                t = np.inf
                if np.isfinite(tmax):
                    ok = np.flatnonzero(ratios <= tmax)
                    r = int(ok[np.argmax(np.abs(delta[ok]))])
                    t = ratios[r]
            if np.isfinite(span) and span <= t:
                # bound flip, basis unchanged
                self.x[hb] = xb + span * delta
                self.x[q] += direction * span
                self.status[q] = AT_UPPER if direction > 0 else AT_LOWER
                self.iterations += 1
                degenerate = 0
                continue
            if r < 0:
                return "unbounded"
            if abs(alpha[r]) < PIVOT_TOL:
                raise NumericalBreakdown(f"pivot magnitude {abs(alpha[r]):.3e} below tolerance")
            leaving = hb[r]
            self.x[hb] = xb + t * delta
            self.x[q] += direction * t
            leave_at_lower = delta[r] < 0
            self.x[leaving] = self.lo[leaving] if leave_at_lower else self.up[leaving]
            if self.lo[leaving] == self.up[leaving]:
                self.status[leaving] = AT_LOWER
            elif leave_at_lower:
                self.status[leaving] = AT_LOWER if np.isfinite(self.lo[leaving]) else AT_ZERO
            else:
                self.status[leaving] = AT_UPPER if np.isfinite(self.up[leaving]) else AT_ZERO
            xq = self.x[q]
            self.status[q] = BASIC
            self.pivot(r, q, alpha)
            self.x[q] = xq
            if t <= 1e-12:
                degenerate += 1
                if degenerate > BLAND_AFTER:
                    bland = True
            else:
                degenerate = 0
        raise NumericalBreakdown("primal simplex iteration limit reached")

    # -- dual simplex ----------------------------------------------------
    def dual(self, limit):
        """Returns ("optimal", None) or ("infeasible", ray). Assumes dual feasibility."""
        degenerate = 0
        bland = False
        for _ in range(limit):
            self.maybe_refactor()
            infeas = self.primal_infeasibility()
            if self.m == 0 or infeas.max() <= FEAS_TOL:
                return "optimal", None
            hb = self.head
            if bland:
                viol = np.flatnonzero(infeas > FEAS_TOL)
                r = int(viol[np.argmin(hb[viol])])
            else:
                r = int(np.argmax(infeas))
            leaving = hb[r]
            below = self.x[leaving] < self.lo[leaving]
            rho = self.Binv[r]
            alpha_row = self.row_times_columns(rho)
            _, d = self.reduced_costs()
            st = self.status
            movable = (st != BASIC) & (self.lo != self.up)
            if below:
                elig = movable & (
                    ((st == AT_LOWER) & (alpha_row < -PIVOT_TOL))
                    | ((st == AT_UPPER) & (alpha_row > PIVOT_TOL))
                    | ((st == AT_ZERO) & (np.abs(alpha_row) > PIVOT_TOL))
                )
            else:
                elig = movable & (
                    ((st == AT_LOWER) & (alpha_row > PIVOT_TOL))
                    | ((st == AT_UPPER) & (alpha_row < -PIVOT_TOL))
                    | ((st == AT_ZERO) & (np.abs(alpha_row) > PIVOT_TOL))
                )
            cand = np.flatnonzero(elig)
            if cand.size == 0:
                ray = -rho if below else rho.copy()
                return "infeasible", ray
            absd = np.abs(d[cand])
            absd[st[cand] == AT_ZERO] = 0.0
            # reduced costs on the wrong side of zero by less than OPT_TOL count as zero
            wrong = ((st[cand] == AT_LOWER) & (d[cand] < 0)) | ((st[cand] == AT_UPPER) & (d[cand] > 0))
            absd[wrong] = 0.0
            absa = np.abs(alpha_row[cand])
            ratios = absd / absa
            if bland:
                t = ratios.min()
                ties = cand[ratios <= t + 1e-12]
                q = int(ties.min())
            else:
                tmax = ((absd + OPT_TOL) / absa).min()
                ok = np.flatnonzero(ratios <= tmax)
                q = int(cand[ok[np.argmax(absa[ok])]])
                t = ratios[ok[np.argmax(absa[ok])]]
            alpha = self.binv_column(q)
            if abs(alpha[r]) < PIVOT_TOL:
                raise NumericalBreakdown(f"pivot magnitude {abs(alpha[r]):.3e} below tolerance")
            target = self.lo[leaving] if below else self.up[leaving]
            step = (self.x[leaving] - target) / alpha[r]
            self.x[hb] = self.x[hb] - step * alpha
            self.x[q] += step
            self.x[leaving] = target
            self.status[leaving] = AT_LOWER if below else AT_UPPER
            if self.lo[leaving] == self.up[leaving]:
                self.status[leaving] = AT_LOWER
            xq = self.x[q]
            self.status[q] = BASIC
            self.pivot(r, q, alpha)
            self.x[q] = xq
            if t <= 1e-12:
                degenerate += 1
                if degenerate > BLAND_AFTER:
                    bland = True
            else:
                degenerate = 0
        raise NumericalBreakdown("dual simplex iteration limit reached")


def _normalize_status(status, lo, up):
    status = status.copy()
    nb = status != BASIC
    lo_fin = np.isfinite(lo)
    up_fin = np.isfinite(up)
    lower_bad = nb & (status == AT_LOWER) & ~lo_fin
    status[lower_bad & up_fin] = AT_UPPER
    status[lower_bad & ~up_fin] = AT_ZERO
    upper_bad = nb & (status == AT_UPPER) & ~up_fin
    status[upper_bad & lo_fin] = AT_LOWER
    status[upper_bad & ~lo_fin] = AT_ZERO
    zero_bad = nb & (status == AT_ZERO) & (lo_fin | up_fin)
    status[zero_bad & lo_fin] = AT_LOWER
    status[zero_bad & ~lo_fin] = AT_UPPER
    return status


def _extend_basis(basis: Basis, n: int, m: int) -> Basis:
    """Adapt a basis to a model with the same columns and possibly more rows."""
    if basis.n_struct != n:
        raise StaleBasis(f"basis has {basis.n_struct} structural columns, model has {n}")
    m0 = basis.n_rows
    if m0 == m:
        return basis
    if m0 > m:
        raise StaleBasis(f"basis has {m0} rows, model has {m}")
    status = np.concatenate([basis.status, np.full(m - m0, BASIC, dtype=np.int8)])
    head = np.concatenate([basis.head, np.arange(n + m0, n + m)])
    return Basis(head=head, status=status, n_struct=n)


def _setup(model: LpModel):
    A = np.ascontiguousarray(model.dense_matrix(), dtype=float)
    m, n = A.shape
    c = model.objective.copy()
    if model.objective_sense == "max":
        c = -c
    slo, sup = _slack_bounds(model.row_senses)
    lo = np.concatenate([model.lower, slo])
    up = np.concatenate([model.upper, sup])
    cfull = np.concatenate([c, np.zeros(m)])
    if np.any(lo > up):
        return None
    return _Simplex(A, model.rhs.copy(), cfull, lo, up, n)


def _slack_basis(tab: _Simplex):
    n, m = tab.n, tab.m
    status = np.empty(n + m, dtype=np.int8)
    c = tab.c[:n]
    lo = tab.lo[:n]
    up = tab.up[:n]
    lo_fin = np.isfinite(lo)
    up_fin = np.isfinite(up)
    status[:n] = np.where(
        lo_fin & (~up_fin | (c >= 0)), AT_LOWER, np.where(up_fin, AT_UPPER, AT_ZERO)
    )
    status[n:] = BASIC
    tab.status = status
    tab.head = np.arange(n, n + m)
    tab.Binv = np.eye(m)
    tab.since_refactor = 0
    tab.recompute_primal()


def _phase_one(tab: _Simplex, limit):
    """Artificial-variable phase one from the slack basis.

    Returns None when a feasible basis was found (artificials removed), or the
    phase-one dual vector when the rows are infeasible.
    """
    n, m = tab.n, tab.m
    x = tab.nonbasic_values()
    resid = tab.b - tab.A @ x[:n]
    slo = tab.lo[n:]
    sup = tab.up[n:]
    fits = (resid >= slo - FEAS_TOL) & (resid <= sup + FEAS_TOL)
    need = np.flatnonzero(~fits)
    status = tab.status
    head = np.arange(n, n + m)
    slack_val = np.clip(resid, slo, sup)
    signs = np.sign(resid[need] - slack_val[need])
    for i in need:
        status[n + i] = AT_LOWER if slack_val[i] == slo[i] else AT_UPPER
        if slo[i] == sup[i]:
            status[n + i] = AT_LOWER
    tab.add_artificials(need, signs)
    for a, i in enumerate(need):
        head[i] = n + m + a
    tab.status[head] = BASIC
    tab.head = head
    phase2_cost = tab.c.copy()
    tab.c = np.concatenate([np.zeros(n + m), np.ones(tab.k)])
    tab.refactor()
    tab.recompute_primal()
    outcome = tab.primal(limit)
    if outcome != "optimal":
        raise NumericalBreakdown("phase one reported unbounded")
    tab.refactor()
    tab.recompute_primal()
    y, _ = tab.reduced_costs()
    infeas = float(tab.c[tab.head] @ tab.x[tab.head])
    scale = 1.0 + (np.abs(tab.b).max() if m else 0.0)
    if infeas > FEAS_TOL * scale:
        return y
    # fix artificials at zero and pivot the basic ones out
    tab.c = phase2_cost
    tab.up[n + m :] = 0.0
    for r in range(m):
        if tab.head[r] < n + m:
            continue
        rho = tab.Binv[r]
        row = tab.row_times_columns(rho)[: n + m]
        row[tab.head[tab.head < n + m]] = 0.0
        q = int(np.argmax(np.abs(row)))
        if abs(row[q]) < 1e-9:
            raise NumericalBreakdown("cannot remove artificial variable from basis")
        alpha = tab.binv_column(q)
        leaving = tab.head[r]
        tab.status[leaving] = AT_LOWER
        xq = tab.x[q]
        tab.status[q] = BASIC
        tab.pivot(r, q, alpha)
        tab.x[q] = xq
    tab.drop_artificials()
    tab.refactor()
    tab.recompute_primal()
    return None


def _finish(model: LpModel, tab: _Simplex, status: LpStatus, ray=None) -> LpSolution:
    n, m = model.n_cols, model.n_rows
    sign = -1.0 if model.objective_sense == "max" else 1.0
    basis = Basis(head=tab.head.copy(), status=tab.status.copy(), n_struct=n)
    if status is LpStatus.INFEASIBLE:
        return LpSolution(
            status=status,
            primal=np.full(n, np.nan),
            dual=np.full(m, np.nan),
            objective_value=np.inf * sign,
            basis=basis,
            farkas_ray=np.asarray(ray, dtype=float),
            iterations=tab.iterations,
        )
    if status is LpStatus.UNBOUNDED:
        return LpSolution(
            status=status,
            primal=tab.x[:n].copy(),
            dual=np.full(m, np.nan),
            objective_value=-np.inf * sign,
            basis=basis,
            iterations=tab.iterations,
        )
    y, d = tab.reduced_costs()
    x = tab.x[:n].copy()
    # snap nonbasic structurals exactly onto their bounds
    return LpSolution(
        status=status,
        primal=x,
        dual=sign * y,
        objective_value=float(sign * (tab.c[:n] @ x)),
        basis=basis,
        reduced_costs=sign * d[:n],
        iterations=tab.iterations,
    )


def _drive(model: LpModel, tab: _Simplex, warm: bool, limit: int) -> LpSolution:
    restarted = not warm
    for _ in range(8):
        pf = tab.is_primal_feasible()
        _, d = tab.reduced_costs()
        df = not tab.dual_infeasible_mask(d).any()
        if pf and df:
            return _finish(model, tab, LpStatus.OPTIMAL)
        if pf:
            if tab.primal(limit) == "unbounded":
                return _finish(model, tab, LpStatus.UNBOUNDED)
        elif df:
            outcome, ray = tab.dual(limit)
            if outcome == "infeasible":
                return _finish(model, tab, LpStatus.INFEASIBLE, ray)
        elif not restarted:
            # warm basis is neither primal nor dual feasible: start over
            _slack_basis(tab)
            restarted = True
            continue
        else:
            ray = _phase_one(tab, limit)
            if ray is not None:
                return _finish(model, tab, LpStatus.INFEASIBLE, ray)
        if tab.since_refactor:
            tab.refactor()
            tab.recompute_primal()
    raise NumericalBreakdown("simplex failed to settle on a feasible optimal basis")


def solve(model: LpModel, warm_basis: Optional[Basis] = None, *, iteration_limit: int = 50_000) -> LpSolution:
    """Solve ``model``; start from ``warm_basis`` when it is usable.

    A basis with fewer rows than the model (rows appended since it was
    computed) is extended with the new rows' slacks.
    """
    model.validate()
    tab = _setup(model)
    if tab is None:
        return _empty_box(model)
    if warm_basis is not None:
        try:
            basis = _extend_basis(warm_basis, tab.n, tab.m)
            tab.head = basis.head.astype(np.int64).copy()
            tab.status = _normalize_status(basis.status.astype(np.int8), tab.lo, tab.up)
            tab.refactor()
            tab.recompute_primal()
        except StaleBasis:
            warm_basis = None
    if warm_basis is None:
        _slack_basis(tab)
    return _drive(model, tab, warm_basis is not None, iteration_limit)


def reoptimize_rhs(model: LpModel, new_rhs, prior_basis: Basis, *, iteration_limit: int = 50_000) -> LpSolution:
    """Re-solve ``model`` with ``new_rhs`` by dual simplex from ``prior_basis``.

    Raises ``StaleBasis`` if the basis does not fit or is singular.
    """
    new_rhs = np.asarray(new_rhs, dtype=float)
    if new_rhs.size != model.n_rows:
        raise DimensionMismatch(f"new rhs has length {new_rhs.size}, model has {model.n_rows} rows")
    model = model.with_rhs(new_rhs)
    tab = _setup(model)
    if tab is None:
        return _empty_box(model)
    basis = _extend_basis(prior_basis, tab.n, tab.m)
    if basis.n_rows != tab.m:
        raise StaleBasis("basis row count does not match the model")
    tab.head = basis.head.astype(np.int64).copy()
    tab.status = _normalize_status(basis.status.astype(np.int8), tab.lo, tab.up)
    tab.refactor()
    tab.recompute_primal()
    return _drive(model, tab, True, iteration_limit)


class RhsSession:
    """Repeated solves of one model whose right-hand side changes between calls.

    The factorized basis of the previous call is kept, so each new right-hand
    side costs one primal update plus whatever dual simplex pivots are needed.
    Results agree with :func:`reoptimize_rhs`; only the setup work is saved.
    """

    def __init__(self, model: LpModel, *, iteration_limit: int = 50_000):
        model.validate()
        self.model = model
        self.iteration_limit = iteration_limit
        self._tab: Optional[_Simplex] = None

    def _cold(self, rhs) -> LpSolution:
        tab = _setup(self.model.with_rhs(rhs))
        if tab is None:
            self._tab = None
            return _empty_box(self.model)
        _slack_basis(tab)
        sol = _drive(self.model, tab, False, self.iteration_limit)
        self._tab = tab
        return sol

    def solve(self, rhs) -> LpSolution:
        rhs = np.asarray(rhs, dtype=float)
        if rhs.size != self.model.n_rows:
            raise DimensionMismatch(f"rhs has length {rhs.size}, model has {self.model.n_rows} rows")
        tab = self._tab
        if tab is None:
            return self._cold(rhs)
        tab.b = rhs.copy()
        tab.iterations = 0
        try:
            tab.recompute_primal()
            return _drive(self.model, tab, True, self.iteration_limit)
        except (StaleBasis, NumericalBreakdown):
            return self._cold(rhs)


def _empty_box(model: LpModel) -> LpSolution:
    # some variable has lower > upper; no row multiplier can certify that
    n, m = model.n_cols, model.n_rows
    return LpSolution(
        status=LpStatus.INFEASIBLE,
        primal=np.full(n, np.nan),
        dual=np.full(m, np.nan),
        objective_value=np.inf,
        basis=None,
        farkas_ray=np.zeros(m),
    )


def certificate_margin(model: LpModel, ray) -> float:
    """Return ``ray^T b - max_{box} ray^T [A I] z``.

    A positive value proves that no point within the variable and slack
    bounds satisfies the rows, i.e. ``ray`` is a Farkas certificate.
    """
    ray = np.asarray(ray, dtype=float)
    A = model.dense_matrix()
    coef = np.concatenate([ray @ A, ray])
    scale = 1.0 + np.abs(ray).max(initial=0.0) * max(1.0, np.abs(A).max(initial=0.0))
    coef[np.abs(coef) <= 1e-9 * scale] = 0.0
    slo, sup = _slack_bounds(model.row_senses)
    lo = np.concatenate([model.lower, slo])
    up = np.concatenate([model.upper, sup])
    with np.errstate(invalid="ignore"):
        best = np.where(coef > 0, coef * up, np.where(coef < 0, coef * lo, 0.0))
    return float(ray @ model.rhs - best.sum())


def dual_objective(model: LpModel, solution: LpSolution) -> float:
    """Dual objective ``y^T b + sum_j d_j x_j`` over nonbasic structurals at bounds."""
    y = solution.dual
    d = solution.reduced_costs
    x = solution.primal
    nb = solution.basis.status[: model.n_cols] != BASIC
    return float(y @ model.rhs + d[nb] @ x[nb])


def primal_residual(model: LpModel, x) -> float:
    """Largest violation of the rows and bounds at ``x``."""
    A = model.dense_matrix()
    ax = A @ x
    s = model.row_senses
    viol = np.zeros(model.n_rows)
    viol = np.where(s == "<", ax - model.rhs, viol)
    viol = np.where(s == ">", model.rhs - ax, viol)
    viol = np.where(s == "=", np.abs(ax - model.rhs), viol)
    bound = np.maximum(model.lower - x, x - model.upper)
    return float(max(viol.max(initial=0.0), bound.max(initial=0.0), 0.0))
