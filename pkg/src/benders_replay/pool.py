"""Dual solution pool shared across SAA replications.

The recourse dual region ``{pi : W^T pi <= q}`` does not depend on the
scenario, so every vertex (or ray) found while solving one replication
defines a valid cut for any scenario of any later replication. The pool
stores those vectors, answers "best stored dual at this cost vector"
queries, and maintains the curated subset (permanent + trial) that is
searched instead of the full pool.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import EmptyPool, ThresholdViolation, UnknownId

FINGERPRINT_GRID = 1e-9
VERTEX = "vertex"
RAY = "ray"

FULL = "full"
CURATED = "curated"
RANDOM_CURATED = "random_curated"
CURATION_MODES = (FULL, CURATED, RANDOM_CURATED)


def fingerprint(vector) -> bytes:
    """Canonical key of ``vector`` rounded to a 1e-9 grid."""
    grid = np.round(np.asarray(vector, dtype=float) / FINGERPRINT_GRID).astype(np.int64)
    return grid.tobytes()


@dataclass(frozen=True)
class DualSolution:
    id: int
    vector: np.ndarray
    fingerprint: bytes
    kind: str = VERTEX
    origin: int = 0


@dataclass(frozen=True)
class PoolView:
    """Immutable snapshot of a subset of the pool, rows ordered by id."""

    ids: np.ndarray
    matrix: np.ndarray

    def __len__(self):
        return self.ids.size

    def values(self, costs: np.ndarray) -> np.ndarray:
        """``pi^T cost`` for every stored ``pi``; ``costs`` is (m,) or (K, m)."""
        return self.matrix @ np.asarray(costs, dtype=float).T

    def best(self, cost) -> tuple:
        """Maximum of ``pi^T cost`` over the view and the lowest id attaining it."""
        if self.ids.size == 0:
            raise EmptyPool("pool view is empty")
        vals = self.matrix @ cost
        i = int(np.argmax(vals))
        return float(vals[i]), int(self.ids[i])

    def best_all(self, costs: np.ndarray):
        """Row-wise :meth:`best` for a (K, m) cost matrix; returns (values, ids, rows)."""
        if self.ids.size == 0:
            raise EmptyPool("pool view is empty")
        vals = self.matrix @ costs.T
        rows = np.argmax(vals, axis=0)
        return vals[rows, np.arange(costs.shape[0])], self.ids[rows], rows

    def vector(self, row: int) -> np.ndarray:
        return self.matrix[row]


def empty_view(dim: int) -> PoolView:
    return PoolView(np.zeros(0, dtype=np.int64), np.zeros((0, dim)))


class DualPool:
    """Full pool plus the permanent/trial partition of the curated subset."""

    def __init__(self, dim: int, seed: int = 0):
        self.dim = dim
        self.entries: dict = {}
        self._by_fp: dict = {}
        self.perm: set = set()
        self.trial: set = set()
        self.curated: set = set()
        self.used: set = set()
        self._next_id = 0
        self._rng = np.random.default_rng(seed)
        self._views: dict = {}
        self.history: list = []

    def __len__(self):
        return len(self.entries)

    def __contains__(self, dual_id) -> bool:
        return dual_id in self.entries

    @property
    def dsp(self) -> set:
        return set(self.entries)

    @property
    def bench(self) -> set:
        return self.dsp - self.perm - self.trial

    def find(self, vector) -> Optional[int]:
        return self._by_fp.get(fingerprint(vector))

    def insert(self, vector, kind: str = VERTEX, origin: int = 0) -> tuple:
        """Add ``vector`` unless an entry with the same fingerprint exists.

        Returns ``(id, was_new)``.
        """
        vector = np.asarray(vector, dtype=float)
        if vector.size != self.dim or not np.all(np.isfinite(vector)):
            raise ValueError("dual vector must be finite with the pool's dimension")
        fp = fingerprint(vector)
        if fp in self._by_fp:
            return self._by_fp[fp], False
        dual_id = self._next_id
        self._next_id += 1
        self.entries[dual_id] = DualSolution(dual_id, vector.copy(), fp, kind, origin)
        self._by_fp[fp] = dual_id
        self._views.clear()
        return dual_id, True

    def get(self, dual_id: int) -> DualSolution:
        try:
            return self.entries[dual_id]
        except KeyError:
            raise UnknownId(dual_id) from None

    def view(self, which: str = FULL, kind: str = VERTEX) -> PoolView:
        key = (which, kind)
        if key not in self._views:
            ids = self.entries.keys() if which == FULL else self.curated
            chosen = sorted(i for i in ids if self.entries[i].kind == kind)
            mat = np.array([self.entries[i].vector for i in chosen]).reshape(len(chosen), self.dim)
            self._views[key] = PoolView(np.array(chosen, dtype=np.int64), mat)
        return self._views[key]

    def end_of_replication_update(
        self,
        used_ids: Iterable[int],
        new_duals: Iterable,
        curation_mode: str = CURATED,
        replication: int = 0,
    ) -> list:
        """Fold one finished replication into the pool.

        ``used_ids`` are pool ids that defined cuts; ``new_duals`` are
        ``(vector, kind)`` pairs for cut-defining duals found by solving
        subproblems. Used entries that were already pooled become permanent,
        new entries form the next trial set, and trial entries that were not
        used are benched. Returns the ids of the inserted duals.
        """
        if curation_mode not in CURATION_MODES:
            raise ValueError(f"unknown curation mode {curation_mode!r}")
        used_existing = set()
        for i in used_ids:
            if i not in self.entries:
                raise UnknownId(i)
            used_existing.add(int(i))
        inserted = []
        for vec, kind in new_duals:
            dual_id, was_new = self.insert(vec, kind, origin=replication)
            if was_new:
                inserted.append(dual_id)
            elif dual_id not in inserted:
                used_existing.add(dual_id)
        self.perm |= used_existing
        self.trial = set(inserted)
        self.used = set()
        curated_size = len(self.perm | self.trial)
        if curation_mode == CURATED:
            self.curated = self.perm | self.trial
        elif curation_mode == FULL:
            self.curated = set(self.entries)
        else:
            pool_ids = sorted(self.entries)
            pick = self._rng.choice(len(pool_ids), size=min(curated_size, len(pool_ids)), replace=False)
            self.curated = {pool_ids[i] for i in sorted(pick)}
        self._views.clear()
        self.history.append(
            {"replication": replication, "dsp": len(self.entries), "curated": len(self.curated),
             "perm": len(self.perm), "trial": len(self.trial)}
        )
        return inserted

    def copy(self) -> "DualPool":
        out = DualPool(self.dim)
        out.entries = dict(self.entries)
        out._by_fp = dict(self._by_fp)
        out.perm = set(self.perm)
        out.trial = set(self.trial)
        out.curated = set(self.curated)
        out.used = set(self.used)
        out._next_id = self._next_id
        out._rng = np.random.default_rng()
        out._rng.bit_generator.state = self._rng.bit_generator.state
        out.history = [dict(h) for h in self.history]
        return out


def lookup(view: PoolView, instance, scenario, x) -> tuple:
    """Best stored dual for ``scenario`` at ``x``: ``(value, id)``.

    The value never exceeds ``Q(x, xi)`` because every stored vector is dual
    feasible.
    """
    return view.best(instance.recourse_rhs(x, scenario.xi))


# ---------------------------------------------------------------------------
# probability bound for best-of-N stored optima


@dataclass(frozen=True)
class Lemma1Params:
    sigma: float
    diameter: float
    epsilon: float
    rho: float
    N: int
    mu: Optional[np.ndarray] = None

    def __post_init__(self):
        if not (self.sigma > 0 and self.diameter > 0 and self.epsilon > 0 and 0 < self.rho < 1):
            raise ValueError("need sigma, diameter, epsilon > 0 and rho in (0, 1)")


def failure_probability_bound(sigma: float, epsilon: float, N: int) -> float:
    """Bound ``[2 exp(-eps^2 / (8 sigma^2))]^N`` on missing an eps*D-optimal dual, capped at 1."""
    if sigma <= 0 or epsilon < 0 or N < 1:
        raise ValueError("need sigma > 0, epsilon >= 0 and N >= 1")
    per_trial = 2.0 * math.exp(-(epsilon**2) / (8.0 * sigma**2))
    if per_trial >= 1.0:
        return 1.0
    return per_trial**N


def sample_size_bound(sigma: float, epsilon: float, rho: float) -> int:
    """Smallest N with ``N >= 8 sigma^2 ln(1/rho) / (eps^2 - 8 sigma^2 ln 2)``."""
    if not 0 < rho < 1:
        raise ValueError("rho must lie in (0, 1)")
    denom = epsilon**2 - 8.0 * sigma**2 * math.log(2.0)
    if epsilon <= sigma * math.sqrt(8.0 * math.log(2.0)) * (1 + 1e-12) or denom <= 0:
        raise ThresholdViolation("epsilon must exceed sigma * sqrt(8 ln 2)")
    return max(1, math.ceil(8.0 * sigma**2 * math.log(1.0 / rho) / denom))


def empirical_failure_frequency(vertices, mean, cov_sqrt, epsilon, N, trials, rng) -> tuple:
    """Monte-Carlo frequency of ``max_i c^T pi_i <= z*(c) - eps * D``.

    ``vertices`` lists every vertex of a bounded polytope, so each LP
    ``max c^T pi`` is solved by enumeration. Costs are ``mean + cov_sqrt @ z``
    with standard normal ``z``. Returns ``(frequency, standard_error)``.
    """
    V = np.asarray(vertices, dtype=float)
    diffs = V[:, None, :] - V[None, :, :]
    diameter = float(np.sqrt((diffs**2).sum(axis=2)).max())
    dim = V.shape[1]
    fails = 0
    for _ in range(trials):
        costs = mean + rng.standard_normal((N + 1, dim)) @ np.asarray(cov_sqrt).T
        stored = V[np.argmax(costs[:N] @ V.T, axis=1)]
        new = costs[N]
        z_star = (V @ new).max()
        if (stored @ new).max() <= z_star - epsilon * diameter:
            fails += 1
    freq = fails / trials
    return freq, math.sqrt(max(freq * (1 - freq), 0.0) / trials)
