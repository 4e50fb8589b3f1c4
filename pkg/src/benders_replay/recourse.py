"""Scenario subproblem evaluation with warm-started dual simplex."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .lp import LpStatus, RhsSession, solve
from .model import CoreInstance, ScenarioSet


@dataclass
class SubproblemResult:
    feasible: bool
    value: float
    dual: Optional[np.ndarray] = None
    ray: Optional[np.ndarray] = None
    pivots: int = 0


class Recourse:
    """Evaluates ``Q(x, xi)`` for one instance.

    A single subproblem model is kept; each solve re-optimizes from the
    basis of the previous solve, since only the right-hand side changes.
    """

    def __init__(self, instance: CoreInstance, warm_start: bool = True):
        self.instance = instance
        self.model = instance.subproblem_model()
        self.warm_start = warm_start
        self._session = RhsSession(self.model)
        self.solves = 0

    def solve_rhs(self, rhs) -> SubproblemResult:
        if self.warm_start:
            sol = self._session.solve(rhs)
        else:
            sol = solve(self.model.with_rhs(rhs))
        self.solves += 1
        if sol.status is LpStatus.OPTIMAL:
            return SubproblemResult(True, sol.objective_value, dual=sol.dual, pivots=sol.iterations)
        if sol.status is LpStatus.INFEASIBLE:
            ray = sol.farkas_ray
            scale = np.abs(ray).max()
            if scale > 0:
                ray = ray / scale
            return SubproblemResult(False, np.inf, ray=ray, pivots=sol.iterations)
        raise RuntimeError("scenario subproblem is unbounded; the dual region is empty")

    def solve(self, x, xi) -> SubproblemResult:
        return self.solve_rhs(self.instance.recourse_rhs(x, xi))

    def solve_all(self, x, scenarios: ScenarioSet) -> list:
        return [self.solve(x, s.xi) for s in scenarios]

    def objective(self, x, scenarios: ScenarioSet) -> float:
        """True first-stage objective ``z(x) = c^T x + sum_k p_k Q(x, xi_k)``."""
        total = float(self.instance.c @ x)
        for s, res in zip(scenarios, self.solve_all(x, scenarios)):
            if not res.feasible:
                return np.inf
            total += s.probability * res.value
        return total


def scenario_rhs(instance: CoreInstance, scenarios: ScenarioSet) -> np.ndarray:
    """Matrix whose row ``k`` is ``h(xi_k)``."""
    return instance.h0[None, :] + scenarios.xi @ instance.H.T
