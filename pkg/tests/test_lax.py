import numpy as np
import pytest

from todalab import lax, maps, pluri
from todalab.core import Boundary, FlaschkaState, random_canonical, random_state
from todalab.errors import DomainError, FactorizationOutsideDomain
from todalab.realizations import canonical_step, realization

S2 = FlaschkaState([3.0, 0.0], [1.0, 2.0], Boundary.OPEN)


def test_build_T_hand_value():
    np.testing.assert_array_equal(lax.build_T(S2), [[1.0, 3.0], [1.0, 2.0]])


def test_trace_is_sum_of_b():
    s = random_state(6, Boundary.PERIODIC, 5)
    assert abs(np.trace(lax.build_T(s, 1.3)) - s.b.sum()) < 1e-14


def test_periodic_corner_entries():
    s = random_state(3, Boundary.PERIODIC, 2)
    lam = 2.0
    T = lax.build_T(s, lam)
    assert T[0, 2] == lam                 # wrap of the subdiagonal
    assert T[2, 0] == s.a[2] / lam        # wrap of the superdiagonal


def test_rtl_pair_small_alpha_expansion():
    s = random_state(4, Boundary.PERIODIC, 7)
    alpha, lam = 1e-6, 1.5
    T = lax.build_T(s, lam)
    for M in (lax.rtl_t1(s, alpha, lam), lax.rtl_t2(s, alpha, lam)):
        assert np.max(np.abs(M - np.eye(4) - alpha * T)) < 1e-10


def test_rtl_pair_decouples_without_couplings():
    s = FlaschkaState([0.0, 0.0, 0.0], [0.5, -0.2, 0.9], Boundary.PERIODIC)
    L, U = lax.build_LU_rtl(s, 0.4, 1.0)
    assert np.array_equal(U, np.eye(3))
    assert np.array_equal(lax.rtl_t1(s, 0.4, 1.0), L)


def test_rtl_pair_is_isospectral_pair():
    s = random_state(3, Boundary.PERIODIC, 9)
    e1 = np.sort_complex(np.linalg.eigvals(lax.rtl_t1(s, 0.3, 1.2)))
    e2 = np.sort_complex(np.linalg.eigvals(lax.rtl_t2(s, 0.3, 1.2)))
    assert np.max(np.abs(e1 - e2)) < 1e-10


# ---------------------------------------------------------------------------
# unpivoted LU
# ---------------------------------------------------------------------------

def test_crout_identity():
    low, up = lax.crout_lu(np.eye(4))
    assert np.array_equal(low, np.eye(4))
    assert np.array_equal(up, np.eye(4))


def test_crout_diag_matches_step_factors():
    h = 0.1
    low, up = lax.crout_lu(np.eye(2) + h * lax.build_T(S2))
    np.testing.assert_allclose(np.diag(low), maps.dtl_factor_diag(S2, h), atol=1e-15)
    assert abs(low[1, 0] - h) < 1e-15       # subdiagonal of the lower factor
    del up


def test_crout_reconstruction():
    rng = np.random.default_rng(12)
    m = rng.normal(size=(5, 5)) + 6.0 * np.eye(5)
    low, up = lax.crout_lu(m)
    assert np.max(np.abs(low @ up - m)) < 1e-13 * np.max(np.abs(m))
    assert np.array_equal(np.diag(up), np.ones(5))
    assert np.max(np.abs(np.triu(low, 1))) == 0.0
    assert np.max(np.abs(np.tril(up, -1))) == 0.0


def test_crout_rejects_vanishing_pivot():
    with pytest.raises(FactorizationOutsideDomain):
        lax.crout_lu(np.array([[0.0, 1.0], [1.0, 0.0]]))


# ---------------------------------------------------------------------------
# closed-form evolution
# ---------------------------------------------------------------------------

def test_exact_solution_zero_steps():
    s = random_state(5, Boundary.OPEN, 3)
    out = lax.exact_solution(s, 0.05, 0)
    assert np.array_equal(out.a, s.a) and np.array_equal(out.b, s.b)


def test_exact_solution_single_step():
    s = random_state(5, Boundary.OPEN, 3)
    one = maps.dtl_step(s, 0.05)
    closed = lax.exact_solution(s, 0.05, 1)
    assert np.max(np.abs(closed.a - one.a)) < 1e-11
    assert np.max(np.abs(closed.b - one.b)) < 1e-11


def test_exact_solution_fifteen_steps():
    s = random_state(5, Boundary.OPEN, 8)
    cur = s
    for _ in range(15):
        cur = maps.dtl_step(cur, 0.05)
    closed = lax.exact_solution(s, 0.05, 15)
    assert np.max(np.abs(closed.a - cur.a)) < 1e-8
    assert np.max(np.abs(closed.b - cur.b)) < 1e-8


def test_exact_solution_rejects_rings():
    s = random_state(4, Boundary.PERIODIC, 1)
    with pytest.raises(DomainError):
        lax.exact_solution(s, 0.05, 3)


# ---------------------------------------------------------------------------
# monodromy
# ---------------------------------------------------------------------------

def test_single_site_local_matrix():
    lam, p1 = 0.3, 0.7
    L = lax.toda_local_matrix(p1, 0.0, lam)      # boundary zero e^{x_1 - x_0}
    np.testing.assert_array_equal(L, [[1.0 + lam * p1, 0.0], [1.0, 0.0]])
    assert np.trace(L) == 1.0 + lam * p1


def test_monodromy_toda_open_trace_and_invariance():
    lam, mu = 0.15, 0.23
    c = random_canonical(6, Boundary.OPEN, 4)
    ct = pluri.chain_step(c, lam)
    ch = pluri.chain_step(c, mu)
    cth = pluri.chain_step(ct, mu)
    T, P0 = lax.monodromy_toda(c, ct.x, lam)     # trace identity asserted inside
    assert abs(np.trace(T) - P0) < 1e-11 * max(1.0, abs(P0))
    _, P1 = lax.monodromy_toda(ch, cth.x, lam)
    assert abs(P1 - P0) < 1e-10 * max(1.0, abs(P0))


def test_monodromy_toda_periodic_eigenvalue_and_det():
    lam = 0.12
    c = random_canonical(5, Boundary.PERIODIC, 6)
    ct = pluri.chain_step(c, lam)
    T, P = lax.monodromy_toda(c, ct.x, lam)      # eigenvalue membership asserted
    gaps = c.x - np.roll(c.x, 1)
    assert abs(np.linalg.det(T) - np.prod(lam * lam * np.exp(gaps))) < 1e-10
    del P


def test_monodromy_rtl_reduces_to_toda():
    lam = 0.2
    c = random_canonical(4, Boundary.PERIODIC, 3)
    for k in range(4):
        gap = np.exp(c.x[k] - c.x[k - 1])
        np.testing.assert_array_equal(lax.rtl_local_matrix(c.p[k], gap, 0.0, lam),
                                      lax.toda_local_matrix(c.p[k], gap, lam))


def test_monodromy_rtl_open_trace_and_invariance():
    lam, mu, alpha = 0.15, 0.23, 0.3
    c = random_canonical(6, Boundary.OPEN, 4)
    ct = pluri.chain_step(c, lam, alpha)
    ch = pluri.chain_step(c, mu, alpha)
    cth = pluri.chain_step(ct, mu, alpha)
    T, P0 = lax.monodromy_rtl(c, ct.x, alpha, lam)
    assert abs(np.trace(T) - P0) < 1e-11 * max(1.0, abs(P0))
    _, P1 = lax.monodromy_rtl(ch, cth.x, alpha, lam)
    assert abs(P1 - P0) < 1e-10 * max(1.0, abs(P0))


# ---------------------------------------------------------------------------
# zero curvature
# ---------------------------------------------------------------------------

def _drtl_step_pair(seed=5, n=4, h=0.08, alpha=0.3):
    spec = realization("rel-exp-add", h, alpha=alpha)
    c = random_canonical(n, Boundary.PERIODIC, seed)
    return c, canonical_step(spec, c)


def test_zcr_residual_on_valid_step():
    c, ct = _drtl_step_pair()
    for lam in (0.3, 0.8, 1.4):
        assert lax.zcr_residual_drtl(c, ct, 0.3, 0.08, lam) < 1e-10


def test_zcr_residual_detects_perturbation():
    c, ct = _drtl_step_pair()
    pt = ct.p.copy()
    pt[1] += 1e-3
    bad = type(ct)(ct.x, pt, ct.boundary)
    assert lax.zcr_residual_drtl(c, bad, 0.3, 0.08, 0.8) > 1e-4


def test_site_transition_never_reads_step_size():
    c, _ = _drtl_step_pair()
    base = lax.drtl_transition_L(c.x[0], c.p[0], 0.3, 0.8)
    again = lax.drtl_transition_L(c.x[0], c.p[0], 0.3, 0.8)
    assert np.array_equal(base, again)
    # steps of different size share the same site matrices bitwise
    import inspect
    assert "h" not in inspect.signature(lax.drtl_transition_L).parameters


def test_spectral_invariants_hand_values():
    inv = lax.spectral_invariants(S2)
    assert abs(inv[0] - 3.0) < 1e-14            # tr T
    assert abs(0.5 * inv[1] - 5.5) < 1e-14      # tr T^2 / 2
