"""Benders cut construction and the relative violation test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidRay
from .model import CoreInstance, Scenario, ScenarioSet

AGGREGATE = -1

OPTIMALITY = "optimality"
FEASIBILITY = "feasibility"

FROM_SUBPROBLEM = "subproblem"
FROM_POOL = "pool"
FROM_INIT = "init"

VIOLATION_TOL = 1e-5
RAY_TOL = 1e-8


@dataclass
class Cut:
    """``theta_k >= alpha - beta^T x`` (optimality) or ``alpha - beta^T x <= 0`` (feasibility)."""

    scenario_id: int
    alpha: float
    beta: np.ndarray
    kind: str = OPTIMALITY
    source: str = FROM_SUBPROBLEM
    dual_id: Optional[object] = None

    def value(self, x) -> float:
        return float(self.alpha - self.beta @ x)

    @property
    def norm(self) -> float:
        return float(np.sqrt(1.0 + self.alpha**2 + self.beta @ self.beta))

    def key(self) -> tuple:
        """Dedup key: coefficients scaled by the norm, rounded to 1e-9."""
        vec = np.concatenate(([self.alpha], self.beta)) / self.norm
        return (self.scenario_id, self.kind, np.round(vec / 1e-9).astype(np.int64).tobytes())


def make_optimality_cut(dual, scenario: Scenario, instance: CoreInstance, *, source=FROM_SUBPROBLEM) -> Cut:
    """Cut from a dual vertex ``pi``; accepts a pool ``DualSolution`` or a raw vector."""
    pi = np.asarray(getattr(dual, "vector", dual), dtype=float)
    return Cut(
        scenario.id,
        float(pi @ instance.h(scenario.xi)),
        instance.T.T @ pi,
        OPTIMALITY,
        source,
        getattr(dual, "id", None),
    )


def make_feasibility_cut(ray, scenario: Scenario, instance: CoreInstance, *, source=FROM_SUBPROBLEM) -> Cut:
    r = np.asarray(getattr(ray, "vector", ray), dtype=float)
    scale = max(1.0, float(np.abs(r).max(initial=0.0)))
    if np.any(instance.W.T @ r > RAY_TOL * scale):
        raise InvalidRay("ray does not satisfy W^T r <= 0")
    return Cut(
        scenario.id,
        float(r @ instance.h(scenario.xi)),
        instance.T.T @ r,
        FEASIBILITY,
        source,
        getattr(ray, "id", None),
    )


def violation(cut: Cut, x, theta: float = 0.0, tol: float = VIOLATION_TOL) -> tuple:
    """Return ``(amount, is_violated)``; feasibility cuts ignore ``theta``."""
    amount = cut.value(x) - (theta if cut.kind == OPTIMALITY else 0.0)
    return amount, bool(amount >= tol * cut.norm)


def aggregate_single_cut(duals: Sequence, scenarios: ScenarioSet, instance: CoreInstance, *, source=FROM_SUBPROBLEM) -> Cut:
    """Expected-value cut ``Theta >= sum_k p_k (pi_k^T h_k - (T^T pi_k)^T x)``."""
    if len(duals) != len(scenarios):
        raise ValueError("need exactly one dual per scenario")
    P = np.array([np.asarray(getattr(d, "vector", d), dtype=float) for d in duals])
    p = scenarios.probabilities
    hk = instance.h0[None, :] + scenarios.xi @ instance.H.T
    alpha = float(p @ np.einsum("ij,ij->i", P, hk))
    beta = instance.T.T @ (p @ P)
    ids = tuple(getattr(d, "id", None) for d in duals)
    return Cut(AGGREGATE, alpha, beta, OPTIMALITY, source, ids)
