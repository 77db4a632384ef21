import numpy as np
import pytest

from todalab import maps
from todalab.core import Boundary, CanonicalState, random_canonical
from todalab.errors import DomainError, NonInvertibleLeg
from todalab.realizations import (CATALOG, canonical_step, flaschka_of,
                                  lagrangian_value, newtonian_residual,
                                  pullback_consistency, realization,
                                  symplectic_defect)

H, ALPHA, EPS, BETA = 0.1, 0.3, 0.2, 0.1


def all_specs():
    out = []
    for name in CATALOG:
        fams = (None, "drtl_minus") if name in ("rel-exp-add", "rel-dual", "rel-mod") else (None,)
        for fam in fams:
            out.append(realization(name, H, alpha=ALPHA, epsilon=EPS, beta=BETA, family=fam))
    return out


def spec_id(spec):
    return f"{spec.name}-{spec.family}"


SPECS = all_specs()


def chart_state(spec, n=5, seed=0, boundary=None):
    if boundary is None:
        boundary = Boundary.OPEN if spec.supports_open else Boundary.PERIODIC
    if spec.ordered_domain:
        # p floor keeps the relativistic hyperbolic chart away from its
        # 1 - eps*alpha*y*z pole at the wrap site
        return random_canonical(n, boundary, seed, increasing=True,
                                gap_range=(0.8, 1.6), p_range=(0.8, 1.5))
    if spec.family == "drtl_minus" or spec.name in ("dual", "rel-dual", "explicit-c"):
        # difference charts put raw gaps into log legs, and the minus-family
        # kinetic leg has a finite range; keep configurations compact
        return random_canonical(n, boundary, seed, x_range=(-0.5, 0.5))
    return random_canonical(n, boundary, seed)


# ---------------------------------------------------------------------------
# charts
# ---------------------------------------------------------------------------

def test_exponential_chart_hand_value():
    c = CanonicalState([0.0, 0.0], [1.0, 2.0], Boundary.OPEN)
    s = flaschka_of(realization("exp", H), c)
    np.testing.assert_array_equal(s.a, [1.0, 0.0])
    np.testing.assert_array_equal(s.b, [1.0, 2.0])


def test_dual_chart_literal():
    c = random_canonical(4, Boundary.PERIODIC, 1)
    s = flaschka_of(realization("dual", H), c)
    np.testing.assert_allclose(s.a, np.exp(c.p))
    np.testing.assert_allclose(s.b, c.x - np.roll(c.x, 1))


def test_relativistic_additive_chart_literal():
    c = random_canonical(4, Boundary.PERIODIC, 2)
    s = flaschka_of(realization("rel-exp-add", H, alpha=ALPHA), c)
    np.testing.assert_allclose(s.b, c.p - ALPHA * np.exp(c.x - np.roll(c.x, 1)))
    np.testing.assert_allclose(s.a, np.exp(np.roll(c.x, -1) - c.x))


def test_periodic_only_charts_reject_open_chains():
    c = random_canonical(4, Boundary.OPEN, 3)
    spec = realization("dual", H)
    with pytest.raises(DomainError):
        flaschka_of(spec, c)
    with pytest.raises(DomainError):
        canonical_step(spec, c)


# ---------------------------------------------------------------------------
# one-step solves
# ---------------------------------------------------------------------------

def test_exponential_first_site_closed_form():
    spec = realization("exp", H)
    c = random_canonical(5, Boundary.OPEN, 2)
    ct = canonical_step(spec, c)
    assert abs(ct.x[0] - c.x[0] - np.log1p(H * c.p[0])) < 1e-14


def test_exponential_continuum_limit():
    h = 1e-6
    spec = realization("exp", h)
    c = random_canonical(6, Boundary.OPEN, 7)
    ct = canonical_step(spec, c)
    assert np.max(np.abs((ct.x - c.x) / h - c.p)) < 1e-4
    e_next = np.concatenate([np.exp(c.x[1:] - c.x[:-1]), [0.0]])
    e_prev = np.concatenate([[0.0], np.exp(c.x[1:] - c.x[:-1])])
    assert np.max(np.abs((ct.p - c.p) / h - (e_next - e_prev))) < 1e-4


def test_explicit_family_closed_form():
    spec = realization("explicit-a", H)
    c = random_canonical(5, Boundary.OPEN, 4)
    ct = canonical_step(spec, c)
    e_next = np.concatenate([np.exp(c.x[1:] - c.x[:-1]), [0.0]])
    e_prev = np.concatenate([[0.0], np.exp(c.x[1:] - c.x[:-1])])
    expect = c.x + np.log(1.0 + H * c.p - H * H * e_prev + H * H * e_next)
    np.testing.assert_allclose(ct.x, expect, atol=1e-14)


def test_noninvertible_leg_raises():
    spec = realization("exp", 1.0)
    c = CanonicalState([0.0, 0.0, 0.0], [-2.0, 0.0, 0.0], Boundary.OPEN)
    with pytest.raises(NonInvertibleLeg):
        canonical_step(spec, c)   # 1 + h p_1 < 0


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_generating_equations_hold(spec):
    c = chart_state(spec, seed=3)
    ct = canonical_step(spec, c)
    legs = spec.legs
    v = ct.x - c.x
    bc = c.boundary
    from todalab.realizations import (_first_equation_rhs, _leg_at_mixed_next,
                                      _leg_at_mixed_prev, _psi0_sums)
    lhs = legs.psi(v)
    if spec.family != "explicit":
        lhs = lhs + _leg_at_mixed_prev(legs.phi, c.x, ct.x, bc)
    assert np.max(np.abs(lhs - _first_equation_rhs(spec, c))) < 1e-10
    rhs2 = legs.psi(v)
    if spec.family != "explicit":
        rhs2 = rhs2 + _leg_at_mixed_next(legs.phi, c.x, ct.x, bc)
    if legs.psi0 is not None and spec.psi0_on_image:
        rhs2 = rhs2 - _psi0_sums(spec, ct.x, bc)
    assert np.max(np.abs(ct.p - rhs2)) < 1e-12


# ---------------------------------------------------------------------------
# action values and gradients
# ---------------------------------------------------------------------------

def test_lagrangian_kinetic_part_vanishes_on_frozen_slice():
    spec = realization("exp", H)
    c = random_canonical(5, Boundary.OPEN, 5)
    val = lagrangian_value(spec, c.x, c.x, Boundary.OPEN)
    expect = -H * np.sum(np.exp(c.x[1:] - c.x[:-1]))
    assert abs(val - expect) < 1e-14


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_lagrangian_generates_the_step(spec):
    """FD gradients of the slice action reproduce -p and p~."""
    c = chart_state(spec, seed=6)
    ct = canonical_step(spec, c)
    bc = c.boundary
    d = 1e-6
    for k in range(c.n):
        for level, ref, sign in ((c.x, c.p[k], -1.0), (ct.x, ct.p[k], +1.0)):
            xp, xm = level.copy(), level.copy()
            xp[k] += d
            xm[k] -= d
            if level is c.x:
                g = (lagrangian_value(spec, xp, ct.x, bc)
                     - lagrangian_value(spec, xm, ct.x, bc)) / (2 * d)
            else:
                g = (lagrangian_value(spec, c.x, xp, bc)
                     - lagrangian_value(spec, c.x, xm, bc)) / (2 * d)
            assert abs(sign * g - ref) < 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_leg_antiderivatives(spec):
    legs = spec.legs
    d = 1e-6
    v = np.linspace(legs.v_range[0], legs.v_range[1], 7)
    fd = (legs.Psi(v + d) - legs.Psi(v - d)) / (2 * d)
    assert np.max(np.abs(fd - legs.psi(v))) < 1e-6
    fd = (legs.psi(v + d) - legs.psi(v - d)) / (2 * d)
    assert np.max(np.abs(fd - legs.dpsi(v))) < 1e-4
    u = np.linspace(legs.u_range[0], legs.u_range[1], 7)
    if legs.Phi is not None:
        fd = (legs.Phi(u + d) - legs.Phi(u - d)) / (2 * d)
        assert np.max(np.abs(fd - legs.phi(u))) < 1e-6
    if legs.Psi0 is not None:
        fd = (legs.Psi0(u + d) - legs.Psi0(u - d)) / (2 * d)
        assert np.max(np.abs(fd - legs.psi0(u))) < 1e-6


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_leg_inverse_roundtrip(spec):
    legs = spec.legs
    v = np.linspace(legs.v_range[0], legs.v_range[1], 7)
    y = legs.psi(v)
    np.testing.assert_allclose(legs.psi_inv(y), v, atol=1e-10)


# ---------------------------------------------------------------------------
# three-level equations of motion
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_newtonian_residual_on_trajectories(spec):
    c0 = chart_state(spec, seed=8)
    c1 = canonical_step(spec, c0)
    c2 = canonical_step(spec, c1)
    res = newtonian_residual(spec, c0.x, c1.x, c2.x, c0.boundary)
    assert np.max(np.abs(res)) < 1e-10


def test_newtonian_residual_symmetric_cancellation():
    spec = realization("exp", H)
    x = np.full(5, 0.3)
    res = newtonian_residual(spec, x, x, x, Boundary.PERIODIC)
    assert np.max(np.abs(res)) == 0.0
    x_affine = 0.5 * np.arange(5)   # power-of-two spacing keeps gaps bit-identical
    res = newtonian_residual(spec, x_affine, x_affine, x_affine, Boundary.OPEN)
    assert np.max(np.abs(res[1:-1])) == 0.0   # interior telescoping is exact


def test_newtonian_residual_linear_sensitivity():
    spec = realization("exp", H)
    c0 = random_canonical(5, Boundary.OPEN, 9)
    c1 = canonical_step(spec, c0)
    c2 = canonical_step(spec, c1)
    base = newtonian_residual(spec, c0.x, c1.x, c2.x, Boundary.OPEN)
    slopes = []
    for delta in (1e-4, 5e-5):
        x = c1.x.copy()
        x[2] += delta
        res = newtonian_residual(spec, c0.x, x, c2.x, Boundary.OPEN)
        slopes.append((res[2] - base[2]) / delta)
    assert abs(slopes[0] - slopes[1]) < 1e-3 * abs(slopes[0])
    assert abs(slopes[0]) > 1.0


# ---------------------------------------------------------------------------
# cross-validation against the (a, b) maps
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_pullback_consistency(spec):
    for seed in (0, 1):
        c = chart_state(spec, seed=seed)
        assert pullback_consistency(spec, c) < 1e-9


def test_pullback_relativistic_gauge_identity():
    spec = realization("rel-exp-add", H, alpha=ALPHA)
    c = random_canonical(5, Boundary.OPEN, 11)
    ct = canonical_step(spec, c)
    s = flaschka_of(spec, c)
    d1, _ = maps.drtl_plus_factors(s, ALPHA, H)
    assert np.max(np.abs(d1 + H * ALPHA * s.a - np.exp(ct.x - c.x))) < 1e-12


def test_dtl_pullback_gauge_identity():
    spec = realization("exp", H)
    c = random_canonical(5, Boundary.OPEN, 12)
    ct = canonical_step(spec, c)
    beta = maps.dtl_factor_diag(flaschka_of(spec, c), H)
    assert np.max(np.abs(beta - np.exp(ct.x - c.x))) < 1e-12


@pytest.mark.parametrize("spec", SPECS, ids=spec_id)
def test_symplecticity(spec):
    c = chart_state(spec, n=4, seed=13)
    assert symplectic_defect(spec, c) < 1e-6


# ---------------------------------------------------------------------------
# Hamilton functions
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("name,family", [("exp", None),
                                         ("rel-exp-add", None),
                                         ("rel-exp-add", "drtl_minus")])
def test_hamiltonian_conserved(name, family):
    spec = realization(name, H, alpha=ALPHA, family=family)
    c = random_canonical(6, Boundary.OPEN, 14)
    val0 = spec.hamiltonian(c)
    cur = c
    for _ in range(25):
        cur = canonical_step(spec, cur)
        assert abs(spec.hamiltonian(cur) - val0) < 1e-10 * max(1.0, abs(val0))


def test_drtl_minus_pullback_gauge_identity():
    """The minus-family pullback fixes h*dm_k = (alpha+h) e^{x_{k+1} - xt_k}
    - alpha e^{x_{k+1} - x_k}."""
    spec = realization("rel-exp-add", H, alpha=ALPHA, family="drtl_minus")
    c = random_canonical(5, Boundary.OPEN, 15)
    ct = canonical_step(spec, c)
    dm, _ = maps.drtl_minus_factors(flaschka_of(spec, c), ALPHA, H)
    lhs = H * dm[:-1]
    rhs = ((ALPHA + H) * np.exp(c.x[1:] - ct.x[:-1])
           - ALPHA * np.exp(c.x[1:] - c.x[:-1]))
    assert np.max(np.abs(lhs - rhs)) < 1e-12
