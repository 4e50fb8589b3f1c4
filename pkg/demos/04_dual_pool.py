"""Reusing dual solutions: after one replication, stored duals already
give cuts for a fresh scenario set, and the curated subset stays smaller
than the full pool."""

from benders_replay.engine import BendersOptions, SharedState, commit_replication, solve_replication
from benders_replay.model import build_cflp, random_cflp, sample_scenarios
from benders_replay.pool import lookup
from benders_replay.recourse import Recourse

inst = build_cflp(random_cflp(5, 10, seed=4))
shared = SharedState.empty(inst)
first = solve_replication(inst, sample_scenarios(inst, 20, 1), BendersOptions(), shared)
commit_replication(shared, first, "baseline", replication=1)
print("pool after replication 1:", len(shared.pool), "duals")

# A stored dual gives a lower estimate of every new subproblem value.
scen = sample_scenarios(inst, 20, 2)
view = shared.pool.view()
rec = Recourse(inst)
for k in range(3):
    est, dual_id = lookup(view, inst, scen[k], first.x)
    exact = rec.solve(first.x, scen[k].xi).value
    print(f"scenario {k}: pool estimate {est:.3f} (dual {dual_id}) <= exact {exact:.3f}")

for method in ("baseline", "dsp", "curated"):
    state = shared.copy()
    res = solve_replication(inst, scen, BendersOptions(method=method), state)
    commit_replication(state, res, method, replication=2)
    print(f"{method:<9} z={res.value:.4f} subproblem rounds={res.metrics.sp_count} "
          f"pool={len(state.pool)} curated={len(state.pool.curated)}")
