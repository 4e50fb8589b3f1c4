"""Warm-starting the main problem from earlier replications: static,
boosted static and adaptive initial cuts."""

from benders_replay.engine import BendersOptions, SharedState, commit_replication, solve_replication
from benders_replay.model import build_cflp, random_cflp, sample_scenarios

inst = build_cflp(random_cflp(5, 10, seed=5))
shared = SharedState.empty(inst)
for r in (1, 2):
    res = solve_replication(inst, sample_scenarios(inst, 20, r), BendersOptions(), shared)
    commit_replication(shared, res, "baseline", replication=r)

scen = sample_scenarios(inst, 20, 3)
for method in ("baseline", "static", "boosted_static", "adaptive"):
    res = solve_replication(inst, scen, BendersOptions(method=method), shared.copy())
    init = res.init
    extra = ""
    if init is not None and init.x_ws is not None:
        extra = f" z_ws={init.z_ws:.3f} min v_sel={init.min_v_sel:.3f}"
    print(f"{method:<15} z={res.value:.4f} initial cuts={res.metrics.cuts_init:3d} "
          f"subproblem rounds={res.metrics.sp_count:3d}{extra}")
