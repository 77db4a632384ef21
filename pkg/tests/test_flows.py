import numpy as np
import pytest

from todalab.core import Boundary, FlaschkaState, random_state
from todalab.errors import DomainError
from todalab.flows import TL, rk4_trajectory, rtl_minus, rtl_plus, vector_field
from todalab.verify import check_rk4_order, check_step_order


def test_free_lattice_is_stationary():
    s = FlaschkaState([0.0, 0.0, 0.0], [0.3, -0.1, 0.8], Boundary.PERIODIC)
    db, da = vector_field(TL, s)
    assert np.all(db == 0.0) and np.all(da == 0.0)


def test_hand_value_open_chain():
    s = FlaschkaState([3.0, 0.0], [1.0, 2.0], Boundary.OPEN)
    db, da = vector_field(TL, s)
    np.testing.assert_allclose(db, [3.0, -3.0])
    np.testing.assert_allclose(da, [3.0, 0.0])


@pytest.mark.parametrize("boundary", [Boundary.OPEN, Boundary.PERIODIC])
def test_relativistic_fields_reduce_to_tl_at_alpha_zero(boundary):
    s = random_state(6, boundary, 5)
    db0, da0 = vector_field(TL, s)
    for flow in (rtl_plus(0.0), rtl_minus(0.0)):
        db, da = vector_field(flow, s)
        assert np.array_equal(db, db0)
        assert np.array_equal(da, da0)


def test_rtl_minus_denominator_guard():
    s = FlaschkaState([0.5, 0.5, 0.5], [-2.0, 0.0, 0.0], Boundary.PERIODIC)
    with pytest.raises(DomainError):
        vector_field(rtl_minus(0.5), s)


def test_zero_steps_returns_initial_state():
    s = random_state(4, Boundary.OPEN, 3)
    traj = rk4_trajectory(TL, s, 0.1, 0)
    assert len(traj) == 1 and traj[0] is s


def test_total_b_conserved_along_open_trajectory():
    s = random_state(6, Boundary.OPEN, 11)
    traj = rk4_trajectory(TL, s, 0.02, 400)
    totals = np.array([st.b.sum() for st in traj])
    assert np.max(np.abs(totals - totals[0])) < 1e-12


def test_rk4_order_at_least_3_8():
    rec = check_rk4_order(seed=2)
    assert rec["observed_order"] >= 3.8


def test_single_dtl_step_defect_order():
    rec = check_step_order(seed=4, h=1e-2)
    assert rec["observed_order"] >= 1.9
