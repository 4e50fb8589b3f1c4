"""The LP kernel: a cold solve, a warm re-solve after the right-hand side
moves, and the infeasibility certificate returned when no point fits."""

import numpy as np

from benders_replay.lp import LpModel, certificate_margin, reoptimize_rhs, solve

# min -x - 2y  s.t.  x + y <= 4,  x + 3y <= 6,  x, y >= 0
model = LpModel([-1.0, -2.0], np.array([[1.0, 1.0], [1.0, 3.0]]), "<<", [4.0, 6.0], [0, 0], [np.inf, np.inf])
sol = solve(model)
print("cold:", sol.status.value, "x =", sol.primal, "obj =", sol.objective_value, "duals =", sol.dual)

# Only the right-hand side changes, so the old basis stays dual feasible and
# a few dual simplex pivots finish the job.
warm = reoptimize_rhs(model, [5.0, 6.0], sol.basis)
print("warm:", warm.status.value, "x =", warm.primal, "pivots =", warm.iterations)

# x + y >= 3 with x, y in [0, 1] cannot hold; the solver returns a ray proving it.
bad = LpModel([1.0, 1.0], np.array([[1.0, 1.0]]), ">", [3.0], [0, 0], [1, 1])
res = solve(bad)
print("infeasible:", res.status.value, "ray =", res.farkas_ray, "margin =", certificate_margin(bad, res.farkas_ray))
