import numpy as np
import pytest

from todalab.core import (Boundary, CanonicalState, FlaschkaState, neighbor_index,
                          random_canonical, random_state, state_from_json,
                          state_to_json)


def test_neighbor_index_examples():
    assert neighbor_index(1, -1, 5, Boundary.PERIODIC) == 5
    assert neighbor_index(1, -1, 5, Boundary.OPEN) is None
    assert neighbor_index(3, 2, 5, Boundary.OPEN) == 5


def test_neighbor_index_bijection_on_rings():
    n = 7
    for offset in range(-3, 4):
        image = sorted(neighbor_index(k, offset, n, Boundary.PERIODIC)
                       for k in range(1, n + 1))
        assert image == list(range(1, n + 1))


def test_random_state_deterministic():
    s1 = random_state(6, Boundary.PERIODIC, 42)
    s2 = random_state(6, Boundary.PERIODIC, 42)
    assert np.array_equal(s1.a, s2.a) and np.array_equal(s1.b, s2.b)


def test_random_state_open_end_zero():
    s = random_state(4, Boundary.OPEN, 17)
    assert s.a[-1] == 0.0


def test_random_state_ranges():
    s = random_state(6, Boundary.PERIODIC, 42)
    assert np.all((s.a > 0.1) & (s.a < 2.0))
    assert np.all((s.b > -1.0) & (s.b < 1.0))


def test_open_state_rejects_nonzero_tail():
    with pytest.raises(ValueError):
        FlaschkaState([1.0, 0.5], [0.0, 0.0], Boundary.OPEN)


def test_states_are_frozen():
    s = random_state(4, Boundary.PERIODIC, 0)
    with pytest.raises(ValueError):
        s.a[0] = 2.0


@pytest.mark.parametrize("boundary", [Boundary.OPEN, Boundary.PERIODIC])
def test_flaschka_roundtrip_bitexact(boundary):
    for seed in range(20):
        s = random_state(5, boundary, seed)
        back = state_from_json(state_to_json(s))
        assert np.array_equal(back.a, s.a)
        assert np.array_equal(back.b, s.b)
        assert back.boundary is s.boundary


def test_canonical_roundtrip_bitexact():
    for seed in range(20):
        c = random_canonical(5, Boundary.PERIODIC, seed)
        back = state_from_json(state_to_json(c))
        assert isinstance(back, CanonicalState)
        assert np.array_equal(back.x, c.x)
        assert np.array_equal(back.p, c.p)


def test_serialization_field_order():
    s = random_state(3, Boundary.OPEN, 1)
    text = state_to_json(s)
    assert text.index('"n"') < text.index('"boundary"') < text.index('"a"') < text.index('"b"')
