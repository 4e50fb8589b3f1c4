"""Two-stage instance data for the CFLP and CMND families.

Both families have fixed recourse ``W``, costs ``q`` and technology ``T``;
only the right-hand side ``h(xi) = h0 + H xi`` depends on the demand
vector ``xi``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import breadth_first_order

from .errors import InvalidConfig, SizeLimit
from .lp import LpModel


@dataclass(frozen=True)
class DemandModel:
    """Distribution of the demand vector ``xi``.

    ``kind="uniform"`` draws ``U[mean*(1-spread), mean*(1+spread)]`` per entry;
    ``kind="normal"`` draws ``N(mean, (cv*mean)^2)`` truncated at zero.
    """

    kind: str
    mean: np.ndarray
    spread: float = 0.2
    cv: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        if self.kind not in ("uniform", "normal"):
            raise InvalidConfig(f"unknown demand distribution {self.kind!r}")

    def sample(self, rng: np.random.Generator, K: int) -> np.ndarray:
        mu = self.mean
        if self.kind == "uniform":
            return rng.uniform(mu * (1 - self.spread), mu * (1 + self.spread), size=(K, mu.size))
        return np.maximum(rng.normal(mu, self.cv * mu, size=(K, mu.size)), 0.0)


@dataclass
class CoreInstance:
    name: str
    family: str
    c: np.ndarray
    A: np.ndarray
    first_senses: np.ndarray
    b: np.ndarray
    x_lower: np.ndarray
    x_upper: np.ndarray
    integer: np.ndarray
    W: np.ndarray
    q: np.ndarray
    second_senses: np.ndarray
    h0: np.ndarray
    H: np.ndarray
    T: np.ndarray
    demand: DemandModel
    complete_recourse: bool = True
    theta_lower_bound: float = 0.0

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        n1 = self.c.size
        self.A = np.asarray(self.A, dtype=float).reshape(-1, n1)
        self.first_senses = np.asarray(list(self.first_senses), dtype="<U1")
        self.b = np.asarray(self.b, dtype=float)
        self.x_lower = np.asarray(self.x_lower, dtype=float)
        self.x_upper = np.asarray(self.x_upper, dtype=float)
        self.integer = np.asarray(self.integer, dtype=bool)
        self.W = np.asarray(self.W, dtype=float)
        self.q = np.asarray(self.q, dtype=float)
        self.second_senses = np.asarray(list(self.second_senses), dtype="<U1")
        self.h0 = np.asarray(self.h0, dtype=float)
        self.H = np.asarray(self.H, dtype=float)
        self.T = np.asarray(self.T, dtype=float)
        m2, n2 = self.W.shape
        if self.q.size != n2:
            raise InvalidConfig("q length must equal the number of recourse columns")
        if self.second_senses.size != m2 or self.h0.size != m2 or self.H.shape[0] != m2:
            raise InvalidConfig("recourse rows are inconsistent")
        if self.T.shape != (m2, n1):
            raise InvalidConfig(f"T must have shape {(m2, n1)}, got {self.T.shape}")
        if self.A.shape[0] != self.b.size or self.first_senses.size != self.b.size:
            raise InvalidConfig("first-stage rows are inconsistent")
        if self.H.shape[1] != self.demand.mean.size:
            raise InvalidConfig("demand dimension does not match H")

    @property
    def n_first(self) -> int:
        return self.c.size

    @property
    def n_second(self) -> int:
        return self.q.size

    @property
    def n_recourse_rows(self) -> int:
        return self.h0.size

    @property
    def is_integer(self) -> bool:
        return bool(self.integer.any())

    def h(self, xi) -> np.ndarray:
        return self.h0 + self.H @ np.asarray(xi, dtype=float)

    def recourse_rhs(self, x, xi) -> np.ndarray:
        """Right-hand side ``h(xi) - T x`` of the scenario subproblem."""
        return self.h(xi) - self.T @ np.asarray(x, dtype=float)

    def subproblem_model(self, rhs: Optional[np.ndarray] = None) -> LpModel:
        m2, n2 = self.W.shape
        return LpModel(
            objective=self.q,
            constraint_matrix=self.W,
            row_senses=self.second_senses,
            rhs=np.zeros(m2) if rhs is None else rhs,
            lower=np.zeros(n2),
            upper=np.full(n2, np.inf),
        )

    def relaxed(self) -> "CoreInstance":
        """Copy of the instance with integrality dropped."""
        out = CoreInstance(**{f: getattr(self, f) for f in self.__dataclass_fields__})
        out.integer = np.zeros(self.n_first, dtype=bool)
        return out


@dataclass(frozen=True)
class Scenario:
    id: int
    xi: np.ndarray
    probability: float


@dataclass
class ScenarioSet:
    scenarios: list
    seed: Optional[int] = None

    def __post_init__(self):
        total = sum(s.probability for s in self.scenarios)
        if self.scenarios and abs(total - 1.0) > 1e-12:
            raise InvalidConfig(f"scenario probabilities sum to {total!r}")

    def __len__(self):
        return len(self.scenarios)

    def __iter__(self):
        return iter(self.scenarios)

    def __getitem__(self, k):
        return self.scenarios[k]

    @property
    def K(self) -> int:
        return len(self.scenarios)

    @property
    def xi(self) -> np.ndarray:
        return np.array([s.xi for s in self.scenarios])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([s.probability for s in self.scenarios])

    @classmethod
    def from_array(cls, xi, seed=None) -> "ScenarioSet":
        xi = np.atleast_2d(np.asarray(xi, dtype=float))
        K = xi.shape[0]
        return cls([Scenario(k, xi[k].copy(), 1.0 / K) for k in range(K)], seed=seed)


# ---------------------------------------------------------------------------
# CFLP


@dataclass
class CflpConfig:
    setup_costs: np.ndarray
    capacities: np.ndarray
    transport_costs: np.ndarray
    penalties: np.ndarray
    demand_means: np.ndarray
    demand_spread: float = 0.2
    shortfall: bool = True
    seed: Optional[int] = None

    def __post_init__(self):
        self.setup_costs = np.asarray(self.setup_costs, dtype=float)
        self.capacities = np.asarray(self.capacities, dtype=float)
        self.transport_costs = np.asarray(self.transport_costs, dtype=float)
        self.penalties = np.asarray(self.penalties, dtype=float)
        self.demand_means = np.asarray(self.demand_means, dtype=float)

    @property
    def n_facilities(self) -> int:
        return self.setup_costs.size

    @property
    def n_customers(self) -> int:
        return self.demand_means.size

    @property
    def demand_model(self) -> DemandModel:
        return DemandModel("uniform", self.demand_means, spread=self.demand_spread)


def random_cflp(
    n_facilities: int,
    n_customers: int,
    seed: int = 0,
    *,
    capacity_ratio: float = 2.0,
    penalty_factor: float = 5.0,
    shortfall: bool = True,
) -> CflpConfig:
    """Random CFLP data on the unit square.

    Unit transport cost is ten times the distance; capacities are rescaled so
    their total is ``capacity_ratio`` times the expected total demand, and
    setup costs grow with the square root of capacity.
    """
    rng = np.random.default_rng(seed)
    fac = rng.random((n_facilities, 2))
    cus = rng.random((n_customers, 2))
    dist = np.linalg.norm(fac[:, None, :] - cus[None, :, :], axis=2)
    transport = np.round(10.0 * dist, 3) + 0.01
    mu = np.round(rng.uniform(5, 35, n_customers), 2)
    cap = rng.uniform(10, 160, n_facilities)
    cap = np.round(cap * capacity_ratio * mu.sum() / cap.sum(), 2)
    setup = np.round(rng.uniform(0, 90, n_facilities) + rng.uniform(100, 110, n_facilities) * np.sqrt(cap), 2)
    penalties = np.round(penalty_factor * transport.max(axis=0), 3)
    return CflpConfig(setup, cap, transport, penalties, mu, shortfall=shortfall, seed=seed)


def build_cflp(config: CflpConfig, name: Optional[str] = None) -> CoreInstance:
    F, C = config.n_facilities, config.n_customers
    if config.transport_costs.shape != (F, C):
        raise InvalidConfig(f"transport costs must have shape {(F, C)}")
    if config.penalties.size != C:
        raise InvalidConfig("need one lost-sale penalty per customer")
    for label, arr in (
        ("setup cost", config.setup_costs),
        ("capacity", config.capacities),
        ("transport cost", config.transport_costs),
        ("penalty", config.penalties),
    ):
        if np.any(arr <= 0):
            raise InvalidConfig(f"every {label} must be positive")
    if np.any(config.demand_means < 0):
        raise InvalidConfig("demand means must be nonnegative")

    n_flow = F * C
    n2 = n_flow + (C if config.shortfall else 0)
    W = np.zeros((F + C, n2))
    for i in range(F):
        W[i, i * C : (i + 1) * C] = 1.0
    for j in range(C):
        W[F + j, j : n_flow : C] = 1.0
        if config.shortfall:
            W[F + j, n_flow + j] = 1.0
    q = config.transport_costs.ravel()
    if config.shortfall:
        q = np.concatenate([q, config.penalties])
    H = np.zeros((F + C, C))
    H[F:, :] = np.eye(C)
    T = np.zeros((F + C, F))
    T[np.arange(F), np.arange(F)] = -config.capacities
    return CoreInstance(
        name=name or f"cflp-{F}x{C}",
        family="cflp",
        c=config.setup_costs,
        A=np.zeros((0, F)),
        first_senses=[],
        b=np.zeros(0),
        x_lower=np.zeros(F),
        x_upper=np.ones(F),
        integer=np.ones(F, dtype=bool),
        W=W,
        q=q,
        second_senses=["<"] * F + [">"] * C,
        h0=np.zeros(F + C),
        H=H,
        T=T,
        demand=config.demand_model,
        complete_recourse=config.shortfall,
    )


# ---------------------------------------------------------------------------
# CMND

COST_RATIO_FACTORS = {1: 1.0, 2: 5.0, 3: 10.0}


@dataclass
class CmndConfig:
    n_nodes: int
    arcs: list
    commodities: list
    fixed_costs: np.ndarray
    capacities: np.ndarray
    routing_costs: np.ndarray
    penalty: float
    mean_demands: np.ndarray
    cv: float = 0.1
    cost_ratio: int = 1
    seed: Optional[int] = None

    def __post_init__(self):
        self.arcs = [tuple(int(v) for v in a) for a in self.arcs]
        self.commodities = [tuple(int(v) for v in k) for k in self.commodities]
        self.fixed_costs = np.asarray(self.fixed_costs, dtype=float)
        self.capacities = np.asarray(self.capacities, dtype=float)
        self.routing_costs = np.asarray(self.routing_costs, dtype=float)
        self.mean_demands = np.asarray(self.mean_demands, dtype=float)

    @property
    def demand_model(self) -> DemandModel:
        return DemandModel("normal", self.mean_demands, cv=self.cv)


def _reachable(n_nodes, arcs, origin) -> set:
    if not arcs:
        return {origin}
    rows, cols = zip(*arcs)
    graph = sp.csr_matrix((np.ones(len(arcs)), (rows, cols)), shape=(n_nodes, n_nodes))
    return set(breadth_first_order(graph, origin, directed=True, return_predecessors=False).tolist())


def random_cmnd(
    n_nodes: int,
    n_arcs: int,
    n_commodities: int,
    seed: int = 0,
    *,
    cost_ratio: int = 1,
    capacity_factor: float = 0.6,
) -> CmndConfig:
    """Random strongly connected network with ``n_arcs >= n_nodes`` arcs.

    A Hamiltonian cycle guarantees connectivity; remaining arcs are drawn
    uniformly. ``cost_ratio`` in {1, 2, 3} scales installation costs
    relative to routing costs (low, medium, high fixed cost).
    """
    if n_arcs < n_nodes:
        raise InvalidConfig("need at least n_nodes arcs for a strongly connected network")
    if n_arcs > n_nodes * (n_nodes - 1):
        raise InvalidConfig("too many arcs for a simple digraph")
    if cost_ratio not in COST_RATIO_FACTORS:
        raise InvalidConfig(f"cost_ratio must be one of {sorted(COST_RATIO_FACTORS)}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n_nodes)
    arcs = [(int(order[i]), int(order[(i + 1) % n_nodes])) for i in range(n_nodes)]
    others = [(i, j) for i in range(n_nodes) for j in range(n_nodes) if i != j and (i, j) not in arcs]
    extra = rng.choice(len(others), size=n_arcs - n_nodes, replace=False) if n_arcs > n_nodes else []
    arcs += [others[e] for e in sorted(extra)]
    pairs = [(i, j) for i in range(n_nodes) for j in range(n_nodes) if i != j]
    pick = rng.choice(len(pairs), size=n_commodities, replace=n_commodities > len(pairs))
    commodities = [pairs[p] for p in pick]
    routing = np.round(rng.uniform(1, 10, n_arcs), 2)
    demands = np.round(rng.uniform(10, 50, n_commodities), 2)
    cap = np.round(rng.uniform(0.5, 1.5, n_arcs) * capacity_factor * demands.sum(), 2)
    fixed = np.round(COST_RATIO_FACTORS[cost_ratio] * rng.uniform(0.5, 1.5, n_arcs) * routing * demands.mean(), 2)
    penalty = float(np.round(2.0 * routing.sum(), 2))
    return CmndConfig(
        n_nodes=n_nodes,
        arcs=arcs,
        commodities=commodities,
        fixed_costs=fixed,
        capacities=cap,
        routing_costs=np.repeat(routing[:, None], n_commodities, axis=1),
        penalty=penalty,
        mean_demands=demands,
        cost_ratio=cost_ratio,
        seed=seed,
    )


def build_cmnd(config: CmndConfig, name: Optional[str] = None) -> CoreInstance:
    N = config.n_nodes
    arcs = config.arcs
    coms = config.commodities
    nA, nK = len(arcs), len(coms)
    if config.routing_costs.shape != (nA, nK):
        raise InvalidConfig(f"routing costs must have shape {(nA, nK)}")
    if config.fixed_costs.size != nA or config.capacities.size != nA:
        raise InvalidConfig("need one installation cost and capacity per arc")
    if np.any(config.capacities <= 0) or np.any(config.fixed_costs <= 0):
        raise InvalidConfig("arc capacities and installation costs must be positive")
    if np.any(config.routing_costs < 0) or config.penalty <= 0:
        raise InvalidConfig("routing costs must be nonnegative and the penalty positive")
    for i, j in arcs:
        if not (0 <= i < N and 0 <= j < N) or i == j:
            raise InvalidConfig(f"bad arc {(i, j)}")
    for o, d in coms:
        if o == d:
            raise InvalidConfig(f"commodity origin equals destination ({o})")
        if d not in _reachable(N, arcs, o):
            raise InvalidConfig(f"destination {d} unreachable from origin {o}")

    n_flow = nA * nK
    n2 = n_flow + nK
    m_bal = N * nK
    W = np.zeros((m_bal + nA, n2))
    H = np.zeros((m_bal + nA, nK))
    for a, (i, j) in enumerate(arcs):
        for l in range(nK):
            col = a * nK + l
            W[i * nK + l, col] += 1.0
            W[j * nK + l, col] -= 1.0
            W[m_bal + a, col] = 1.0
    for l, (o, d) in enumerate(coms):
        W[o * nK + l, n_flow + l] = 1.0
        W[d * nK + l, n_flow + l] = -1.0
        H[o * nK + l, l] = 1.0
        H[d * nK + l, l] = -1.0
    T = np.zeros((m_bal + nA, nA))
    T[m_bal + np.arange(nA), np.arange(nA)] = -config.capacities
    q = np.concatenate([config.routing_costs.ravel(), np.full(nK, config.penalty)])
    return CoreInstance(
        name=name or f"cmnd-{N}n{nA}a{nK}k-r{config.cost_ratio}",
        family="cmnd",
        c=config.fixed_costs,
        A=np.zeros((0, nA)),
        first_senses=[],
        b=np.zeros(0),
        x_lower=np.zeros(nA),
        x_upper=np.ones(nA),
        integer=np.ones(nA, dtype=bool),
        W=W,
        q=q,
        second_senses=["="] * m_bal + ["<"] * nA,
        h0=np.zeros(m_bal + nA),
        H=H,
        T=T,
        demand=config.demand_model,
        complete_recourse=True,
    )


# ---------------------------------------------------------------------------


def sample_scenarios(spec, K: int, seed: int) -> ScenarioSet:
    """Draw ``K`` equiprobable demand scenarios.

    ``spec`` is a ``DemandModel`` or anything exposing one as ``.demand`` or
    ``.demand_model`` (a ``CoreInstance`` or a family config).
    """
    if K < 1:
        raise InvalidConfig("K must be at least 1")
    model = spec
    if not isinstance(model, DemandModel):
        model = getattr(spec, "demand", None) or getattr(spec, "demand_model")
    rng = np.random.default_rng(seed)
    xi = model.sample(rng, K)
    return ScenarioSet([Scenario(k, xi[k], 1.0 / K) for k in range(K)], seed=seed)


def deterministic_equivalent(instance: CoreInstance, scenarios: ScenarioSet, *, size_limit: int = 10**6):
    """Extensive form over all scenarios.

    Returns ``(model, integer_mask)`` with columns ordered ``x, y_1, ..., y_K``.
    """
    n1, n2, m2 = instance.n_first, instance.n_second, instance.n_recourse_rows
    K = scenarios.K
    n_total = n1 + K * n2
    if n_total > size_limit:
        raise SizeLimit(f"extensive form has {n_total} variables (limit {size_limit})")
    p = scenarios.probabilities
    r1 = instance.A.shape[0]
    mat = np.zeros((r1 + K * m2, n_total))
    mat[:r1, :n1] = instance.A
    for k in range(K):
        rows = slice(r1 + k * m2, r1 + (k + 1) * m2)
        mat[rows, :n1] = instance.T
        mat[rows, n1 + k * n2 : n1 + (k + 1) * n2] = instance.W
    rhs = [instance.b] + [instance.h(s.xi) for s in scenarios]
    senses = list(instance.first_senses) + list(instance.second_senses) * K
    objective = np.concatenate([instance.c] + [p[k] * instance.q for k in range(K)])
    lower = np.concatenate([instance.x_lower, np.zeros(K * n2)])
    upper = np.concatenate([instance.x_upper, np.full(K * n2, np.inf)])
    model = LpModel(objective, mat, senses, np.concatenate(rhs), lower, upper)
    mask = np.concatenate([instance.integer, np.zeros(K * n2, dtype=bool)])
    return model, mask
