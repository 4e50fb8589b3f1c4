import numpy as np
import pytest

from benders_replay import io
from benders_replay.engine import BendersOptions
from benders_replay.errors import FormatError
from benders_replay.harness import run_sequence
from benders_replay.model import sample_scenarios


@pytest.mark.parametrize("name", ["cflp", "cmnd", "cflp_no_shortfall"])
def test_instance_round_trip(name, request, tmp_path):
    inst = request.getfixturevalue(name)
    path = tmp_path / "inst.txt"
    io.save_instance(path, inst)
    back = io.load_instance(path)
    assert io.dumps_instance(back) == io.dumps_instance(inst)
    for f in ("c", "W", "T", "H", "q", "h0"):
        np.testing.assert_array_equal(getattr(back, f), getattr(inst, f))
    assert back.complete_recourse == inst.complete_recourse
    assert path.read_text().startswith(f"SPINST v1 {inst.family}")


def test_scenarios_round_trip(cmnd, tmp_path):
    scen = sample_scenarios(cmnd, 7, 3)
    io.save_scenarios(tmp_path / "s.txt", scen)
    back = io.load_scenarios(tmp_path / "s.txt")
    np.testing.assert_array_equal(back.xi, scen.xi)
    assert back.seed == 3 and back.K == 7


def test_pool_and_archive_round_trip(cflp):
    rep = run_sequence(cflp, 3, 4, ["curated"], 0, BendersOptions())
    state = rep.final_states["curated"]
    pool = io.loads_pool(io.dumps_pool(state.pool))
    assert pool.perm == state.pool.perm and pool.trial == state.pool.trial
    assert pool.curated == state.pool.curated
    for i, e in state.pool.entries.items():
        np.testing.assert_array_equal(pool.get(i).vector, e.vector)
    arch = io.loads_archive(io.dumps_archive(state.archive))
    assert len(arch.opt) == len(state.archive.opt) and len(arch.feas) == len(state.archive.feas)


@pytest.mark.parametrize("text", [
    "SPINST v2 cflp\n",
    "SCEN v1\nseed 1\nK 2\ndim 1\ns 0.5 1.0\nEND\n",
    "POOL v1\ndim 1\nnext_id 1\nperm 3\ntrial\ncurated\nEND\n",
    "ARCHIVE v1\ndim 2\nopt 1 1.0\nEND\n",
])
def test_malformed(text):
    loader = {"SPINST": io.loads_instance, "SCEN": io.loads_scenarios, "POOL": io.loads_pool,
              "ARCHIVE": io.loads_archive}[text.split()[0]]
    with pytest.raises(FormatError):
        loader(text)
