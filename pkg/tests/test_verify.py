import numpy as np

from todalab.core import Boundary
from todalab.verify import CHECKS, run_suite, simulate


def test_registry_names_match_records():
    for rec in run_suite("commute-*", seed=3):
        assert rec["check"] in CHECKS
        assert rec["pass"]


def test_suite_is_deterministic():
    a = run_suite("monodromy-*", seed=5)
    b = run_suite("monodromy-*", seed=5)
    assert a == b


def test_suite_glob_filter():
    names = [r["check"] for r in run_suite("order-*", seed=0)]
    assert names == ["order-dtl-vs-flow", "order-lagrangian", "order-rk4"]


def test_simulate_map_trajectory_shapes():
    traj, inv = simulate("dtl", 5, Boundary.OPEN, 0, 0.05, 0.0, 30)
    assert len(traj) == 31 and inv.shape == (31, 5)
    drift = np.max(np.abs(inv - inv[0]))
    assert drift < 1e-10


def test_simulate_flow_trajectory_matches_rk4():
    traj, inv = simulate("rtl+", 4, Boundary.PERIODIC, 1, 0.02, 0.3, 10)
    assert len(traj) == 11
    assert inv.shape[1] == 4 * 4     # four spectral samples on a ring
    # RK4 conserves the ring invariants only approximately
    assert np.max(np.abs(inv[-1] - inv[0])) < 1e-5
