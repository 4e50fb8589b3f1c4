import numpy as np
import pytest

from benders_replay.model import build_cflp, build_cmnd, random_cflp, random_cmnd, sample_scenarios


@pytest.fixture
def cflp():
    return build_cflp(random_cflp(3, 4, seed=1))


@pytest.fixture
def cflp_no_shortfall():
    return build_cflp(random_cflp(3, 5, seed=2, shortfall=False, capacity_ratio=1.5))


@pytest.fixture
def cmnd():
    return build_cmnd(random_cmnd(4, 6, 2, seed=3))


@pytest.fixture
def cflp_scen(cflp):
    return sample_scenarios(cflp, 6, 11)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
