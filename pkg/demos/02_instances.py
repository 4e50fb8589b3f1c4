"""Building the two test families and checking one replication against
its extensive form."""

from benders_replay.model import build_cflp, build_cmnd, random_cflp, random_cmnd, sample_scenarios
from benders_replay.verify import de_optimum

cflp = build_cflp(random_cflp(4, 8, seed=1), name="demo_cflp")
cmnd = build_cmnd(random_cmnd(5, 9, 3, seed=1), name="demo_cmnd")

for inst in (cflp, cmnd):
    scen = sample_scenarios(inst, 10, seed=7)
    print(f"{inst.name}: {inst.n_first} first-stage columns, W is {inst.W.shape[0]}x{inst.W.shape[1]}, "
          f"integer={inst.is_integer}")
    print("  first scenario demand:", scen[0].xi.round(2))
    print("  extensive-form optimum (K=10):", round(de_optimum(inst, scen, integer=True), 4))
