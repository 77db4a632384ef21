"""Canonical (x, p) charts of the lattice maps and their leg functions.

Every chart in the catalog pairs three ingredients:

* a map (x, p) -> (a, b) onto the Flaschka phase space, pushing the
  canonical bracket onto one of the compatible brackets of poisson.py;
* leg functions psi, phi, psi0 of coordinate differences, with exact
  antiderivatives Psi, Phi, Psi0, defining the one-step equations

      p_k  = psi(x~_k - x_k) + phi(x_k - x~_{k-1}) [+ psi0 differences]
      p~_k = psi(x~_k - x_k) + phi(x_{k+1} - x~_k) [+ psi0 differences]

  in one of four arrangements (families): "dtl" has no psi0, "drtl_plus"
  puts the psi0 difference into the first equation, "drtl_minus" into the
  second, and "explicit" has no phi at all (the step is closed form);
* the matching map in (a, b) variables from maps.py, used as a
  cross-validation oracle (pullback_consistency).

Open chains use x_0 = +inf, x_{n+1} = -inf, which zeroes every leg of an
exponentiated gap; charts whose formulas do not degenerate that way
(difference, rational and hyperbolic charts) are periodic-only.

All parameters (h, alpha, epsilon, beta) are bound when the Realization is
constructed: for the explicit family alpha = h ties even the phase-space
chart to the step size.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.special import spence

from . import maps
from .core import Boundary, CanonicalState, FlaschkaState
from .errors import DomainError, NonInvertibleLeg, SolveFailed
from .poisson import Bracket, combo

_NEWTON_TOL = 1e-12
_NEWTON_ITERS = 60


def _li2(z):
    """Real dilogarithm Li2(z), z <= 1."""
    z = np.asarray(z, dtype=float)
    if np.any(z > 1.0 + 1e-12):
        raise DomainError("dilogarithm argument exceeds 1")
    return spence(1.0 - np.minimum(z, 1.0))


def _need(cond, msg, err=DomainError):
    if not np.all(cond):
        raise err(msg)


def _coth(w):
    _need(np.abs(w) > 1e-300, "coth argument vanishes")
    return 1.0 / np.tanh(w)


def _log_sinh_integral(w):
    """Odd antiderivative of log|sinh|: S'(w) = log|sinh w|, S(0) = 0."""
    w = np.asarray(w, dtype=float)
    _need(np.abs(w) > 1e-300, "hyperbolic leg hits the sinh zero")
    aw = np.abs(w)
    s0 = 0.5 * aw * aw - aw * np.log(2.0) + 0.5 * _li2(np.exp(-2.0 * aw))
    return np.sign(w) * (s0 - 0.5 * _li2(1.0))


@dataclass(frozen=True)
class Legs:
    psi: Callable
    dpsi: Callable
    psi_inv: Callable
    Psi: Callable
    phi: Optional[Callable] = None
    dphi: Optional[Callable] = None
    Phi: Optional[Callable] = None
    psi0: Optional[Callable] = None
    Psi0: Optional[Callable] = None
    v_range: tuple = (-0.5, 0.5)   # sampling window for derivative checks
    u_range: tuple = (-1.0, 1.0)


@dataclass(frozen=True)
class Realization:
    name: str
    family: str                    # "dtl" | "drtl_plus" | "drtl_minus" | "explicit"
    h: float
    alpha: float
    params: dict
    legs: Legs
    bracket: object
    supports_open: bool
    to_flaschka: Callable
    hamiltonian: Optional[Callable] = None
    ordered_domain: bool = False   # chart requires strictly increasing x
    # Lagrangian slicing: False puts the psi0 difference on the base level
    # (first map equation), True on the image level (second map equation).
    # Charts that reference p_{k-1} (dual-type) realize their map through
    # the opposite slicing from the additive-exponential prototype.
    psi0_on_image: bool = False


# ---------------------------------------------------------------------------
# gap helpers
# ---------------------------------------------------------------------------

def _exp_next(x, boundary):
    if boundary is Boundary.PERIODIC:
        return np.exp(np.roll(x, -1) - x)
    out = np.zeros(len(x))
    out[:-1] = np.exp(x[1:] - x[:-1])
    return out


def _exp_prev(x, boundary):
    if boundary is Boundary.PERIODIC:
        return np.exp(x - np.roll(x, 1))
    out = np.zeros(len(x))
    out[1:] = np.exp(x[1:] - x[:-1])
    return out


def _gaps(x, boundary):
    """(x_k - x_{k-1}, x_{k+1} - x_k) on a ring; rejects open chains."""
    if boundary is not Boundary.PERIODIC:
        raise DomainError("this chart is defined on rings only")
    return x - np.roll(x, 1), np.roll(x, -1) - x


def _leg_at_prev_gaps(fn, x, boundary):
    """fn(x_k - x_{k-1}) with the open-end zero at k = 1."""
    if boundary is Boundary.PERIODIC:
        return fn(x - np.roll(x, 1))
    out = np.zeros(len(x))
    out[1:] = fn(x[1:] - x[:-1])
    return out


def _leg_at_next_gaps(fn, x, boundary):
    if boundary is Boundary.PERIODIC:
        return fn(np.roll(x, -1) - x)
    out = np.zeros(len(x))
    out[:-1] = fn(x[1:] - x[:-1])
    return out


def _leg_at_mixed_prev(fn, x, xt, boundary):
    """fn(x_k - xt_{k-1}) with the open-end zero at k = 1."""
    if boundary is Boundary.PERIODIC:
        return fn(x - np.roll(xt, 1))
    out = np.zeros(len(x))
    out[1:] = fn(x[1:] - xt[:-1])
    return out


def _leg_at_mixed_next(fn, x, xt, boundary):
    """fn(x_{k+1} - xt_k) with the open-end zero at k = n."""
    if boundary is Boundary.PERIODIC:
        return fn(np.roll(x, -1) - xt)
    out = np.zeros(len(x))
    out[:-1] = fn(x[1:] - xt[:-1])
    return out


# ---------------------------------------------------------------------------
# leg builders
# ---------------------------------------------------------------------------

def _legs_exp(h):
    def psi_inv(y):
        _need(1.0 + h * y > 0, "step equation has no real solution", NonInvertibleLeg)
        return np.log1p(h * y)
    return Legs(
        psi=lambda v: np.expm1(v) / h,
        dpsi=lambda v: np.exp(v) / h,
        psi_inv=psi_inv,
        Psi=lambda v: (np.expm1(v) - v) / h,
        phi=lambda u: h * np.exp(u),
        dphi=lambda u: h * np.exp(u),
        Phi=lambda u: h * np.exp(u),
        v_range=(-0.8, 0.8), u_range=(-1.5, 1.0))


def _legs_dual(h):
    def psi(v):
        _need(v / h > 0, "log leg needs v/h > 0")
        return np.log(v / h)
    def phi(u):
        _need(1.0 + h * u > 0, "log leg needs 1 + h u > 0")
        return np.log1p(h * u)
    return Legs(
        psi=psi, dpsi=lambda v: 1.0 / v, psi_inv=lambda y: h * np.exp(y),
        Psi=lambda v: v * np.log(v / h) - v,
        phi=phi, dphi=lambda u: h / (1.0 + h * u),
        Phi=lambda u: (1.0 + h * u) * np.log1p(h * u) / h - u,
        v_range=(0.2 * h, 4.0 * h), u_range=(-1.0, 1.0))


def _psi_log_expm1(h):
    def psi(v):
        _need(v * h > 0, "log leg needs (e^v - 1)/h > 0")
        return np.log(np.expm1(v) / h)
    def Psi(v):
        _need(v > 0, "antiderivative domain is v > 0")
        return 0.5 * v * v + _li2(np.exp(-v)) - v * np.log(h)
    return psi, (lambda v: np.exp(v) / np.expm1(v)), (lambda y: np.log1p(h * np.exp(y))), Psi


def _legs_mod_exp(h):
    psi, dpsi, psi_inv, Psi = _psi_log_expm1(h)
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=lambda u: np.log1p(h * np.exp(u)),
        dphi=lambda u: h * np.exp(u) / (1.0 + h * np.exp(u)),
        Phi=lambda u: -_li2(-h * np.exp(u)),
        v_range=(0.05, 1.0), u_range=(-1.5, 1.0))


def _psi_eps_family(h, eps):
    """psi(v) = (1/eps) log(1 + (eps/h)(e^v - 1)) and its antiderivative."""
    def psi(v):
        arg = 1.0 + (eps / h) * np.expm1(v)
        _need(arg > 0, "eps-family leg outside domain")
        return np.log(arg) / eps
    def dpsi(v):
        return np.exp(v) / (h + eps * np.expm1(v))
    def psi_inv(y):
        arg = 1.0 + (h / eps) * np.expm1(eps * y)
        _need(arg > 0, "step equation has no real solution", NonInvertibleLeg)
        return np.log(arg)
    def Psi(v):
        q = (h - eps) / eps
        return (v * np.log(eps / h) + 0.5 * v * v + _li2(-q * np.exp(-v))) / eps
    return psi, dpsi, psi_inv, Psi


def _legs_mod_exp_eps(h, eps):
    psi, dpsi, psi_inv, Psi = _psi_eps_family(h, eps)
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=lambda u: np.log1p(h * eps * np.exp(u)) / eps,
        dphi=lambda u: h * np.exp(u) / (1.0 + h * eps * np.exp(u)),
        Phi=lambda u: -_li2(-h * eps * np.exp(u)) / eps,
        v_range=(0.05, 0.8), u_range=(-1.0, 1.0))


def _psi_hyperbolic(beta, shift):
    """psi(v) = (1/2beta) log(sinh(v + shift)/sinh(v - shift)), v > shift > 0."""
    def psi(v):
        ratio = np.sinh(np.asarray(v) + shift) / np.sinh(np.asarray(v) - shift)
        _need(ratio > 0, "hyperbolic leg outside domain (|v| <= shift)")
        return np.log(ratio) / (2.0 * beta)
    def dpsi(v):
        return (_coth(v + shift) - _coth(v - shift)) / (2.0 * beta)
    def psi_inv(y):
        r = np.exp(2.0 * beta * np.asarray(y))
        _need(np.abs(r - 1.0) > 1e-300, "hyperbolic leg not invertible here", NonInvertibleLeg)
        arg = np.tanh(shift) * (r + 1.0) / (r - 1.0)
        _need(np.abs(arg) < 1.0, "hyperbolic leg not invertible here", NonInvertibleLeg)
        return np.arctanh(arg)
    def Psi(v):
        return (_log_sinh_integral(np.asarray(v) + shift)
                - _log_sinh_integral(np.asarray(v) - shift)) / (2.0 * beta)
    return psi, dpsi, psi_inv, Psi


def _legs_hyp_mult(h, beta):
    _need(1.0 - 4.0 * beta * h > 0, "reparametrized step undefined: 4*beta*h >= 1")
    h0 = -np.log(1.0 - 4.0 * beta * h) / (4.0 * beta)
    s = beta * h0
    psi, dpsi, psi_inv, Psi = _psi_hyperbolic(beta, s)
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=psi, dphi=dpsi, Phi=Psi,
        v_range=(s + 0.15, s + 1.0), u_range=(s + 0.15, s + 1.0)), h0


def _psi_rational_log(h):
    def psi(v):
        ratio = (np.asarray(v) + h) / (np.asarray(v) - h)
        _need(ratio > 0, "rational-log leg needs |v| > |h|")
        return 0.5 * np.log(ratio)
    def dpsi(v):
        return 0.5 * (1.0 / (v + h) - 1.0 / (v - h))
    def psi_inv(y):
        _need(np.abs(np.tanh(y)) > 1e-300, "leg not invertible at 0", NonInvertibleLeg)
        return h / np.tanh(y)
    def Psi(v):
        v = np.asarray(v)
        return 0.5 * ((v + h) * np.log(np.abs(v + h)) - (v - h) * np.log(np.abs(v - h)))
    return psi, dpsi, psi_inv, Psi


def _legs_rat_mult(h):
    psi, dpsi, psi_inv, Psi = _psi_rational_log(h)
    return Legs(psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
                phi=psi, dphi=dpsi, Phi=Psi,
                v_range=(h + 0.1, h + 1.0), u_range=(h + 0.1, h + 1.0))


def _legs_rat_add(h):
    def inv(y):
        _need(np.abs(y) > 1e-300, "leg not invertible at 0", NonInvertibleLeg)
        return h / y
    return Legs(
        psi=lambda v: h / v, dpsi=lambda v: -h / np.asarray(v) ** 2,
        psi_inv=inv, Psi=lambda v: h * np.log(np.abs(v)),
        phi=lambda u: h / u, dphi=lambda u: -h / np.asarray(u) ** 2,
        Phi=lambda u: h * np.log(np.abs(u)),
        v_range=(0.15, 1.0), u_range=(0.15, 1.0))


# relativistic leg sets ------------------------------------------------------

def _legs_rel_exp_add_plus(h, alpha):
    def phi(u):
        w = np.exp(u)
        _need(1.0 - h * alpha * w > 0, "leg pole: 1 - h*alpha*e^u <= 0")
        return (h - alpha) * w / (1.0 - h * alpha * w)
    def psi_inv(y):
        _need(1.0 + h * y > 0, "step equation has no real solution", NonInvertibleLeg)
        return np.log1p(h * y)
    return Legs(
        psi=lambda v: np.expm1(v) / h, dpsi=lambda v: np.exp(v) / h,
        psi_inv=psi_inv, Psi=lambda v: (np.expm1(v) - v) / h,
        phi=phi,
        dphi=lambda u: (h - alpha) * np.exp(u) / (1.0 - h * alpha * np.exp(u)) ** 2,
        Phi=lambda u: -((h - alpha) / (h * alpha)) * np.log1p(-h * alpha * np.exp(u)),
        psi0=lambda u: alpha * np.exp(u), Psi0=lambda u: alpha * np.exp(u),
        v_range=(-0.8, 0.8), u_range=(-1.5, 1.0))


def _legs_rel_exp_add_minus(h, alpha):
    c = h + alpha
    def psi(v):
        w = np.expm1(v)
        den = h - alpha * w
        _need(np.abs(den) > 1e-300, "leg pole: h = alpha (e^v - 1)")
        return w / den
    def dpsi(v):
        return h * np.exp(v) / (h - alpha * np.expm1(v)) ** 2
    def psi_inv(y):
        den = 1.0 + alpha * y
        _need(np.abs(den) > 1e-300, "step equation has no real solution", NonInvertibleLeg)
        arg = 1.0 + h * y / den
        _need(arg > 0, "step equation has no real solution", NonInvertibleLeg)
        return np.log(arg)
    def Psi(v):
        den = c - alpha * np.exp(v)
        _need(den > 0, "antiderivative domain exceeded")
        return -np.asarray(v) / c - (h / (alpha * c)) * np.log(den)
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=lambda u: c * np.exp(u), dphi=lambda u: c * np.exp(u), Phi=lambda u: c * np.exp(u),
        psi0=lambda u: -alpha * np.exp(u), Psi0=lambda u: -alpha * np.exp(u),
        v_range=(-0.5, 0.25), u_range=(-1.5, 1.0))


def _legs_ruijsenaars(h, alpha):
    psi, dpsi, psi_inv, Psi = _psi_eps_family(h, alpha)
    def phi(u):
        arg = 1.0 - alpha * (h - alpha) * np.exp(u)
        _need(arg > 0, "leg pole: 1 - alpha(h - alpha) e^u <= 0")
        return -np.log(arg) / alpha
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=phi,
        dphi=lambda u: (h - alpha) * np.exp(u) / (1.0 - alpha * (h - alpha) * np.exp(u)),
        Phi=lambda u: _li2(alpha * (h - alpha) * np.exp(u)) / alpha,
        psi0=lambda u: np.log1p(alpha * alpha * np.exp(u)) / alpha,
        Psi0=lambda u: -_li2(-alpha * alpha * np.exp(u)) / alpha,
        v_range=(-0.2, 0.8), u_range=(-1.5, 1.0))


def _legs_rel_dual_plus(h, alpha):
    base = _legs_dual(h)
    def phi(u):
        _need((1.0 + h * u > 0) & (1.0 + alpha * u > 0), "log leg outside domain")
        return np.log1p(h * u) - np.log1p(alpha * u)
    return Legs(
        psi=base.psi, dpsi=base.dpsi, psi_inv=base.psi_inv, Psi=base.Psi,
        phi=phi,
        dphi=lambda u: h / (1.0 + h * u) - alpha / (1.0 + alpha * u),
        Phi=lambda u: ((1.0 + h * u) * np.log1p(h * u) / h
                       - (1.0 + alpha * u) * np.log1p(alpha * u) / alpha),
        psi0=lambda u: np.log1p(alpha * u),
        Psi0=lambda u: (1.0 + alpha * u) * np.log1p(alpha * u) / alpha - u,
        v_range=(0.2 * h, 4.0 * h), u_range=(-1.0, 1.0))


def _legs_rel_dual_minus(h, alpha):
    c = alpha * (alpha + h)
    def psi(v):
        den = h + c * v
        _need((v > 0) & (den > 0), "log leg outside domain")
        return np.log(v) - np.log(den)
    def psi_inv(y):
        den = 1.0 - c * np.exp(y)
        _need(den > 0, "step equation has no real solution", NonInvertibleLeg)
        return h * np.exp(y) / den
    def Psi(v):
        den = h + c * v
        _need((v > 0) & (den > 0), "antiderivative domain exceeded")
        return v * np.log(v) - den * np.log(den) / c
    def phi(u):
        _need(1.0 + (h + alpha) * u > 0, "log leg outside domain")
        return np.log1p((h + alpha) * u)
    return Legs(
        psi=psi, dpsi=lambda v: 1.0 / v - c / (h + c * v), psi_inv=psi_inv, Psi=Psi,
        phi=phi, dphi=lambda u: (h + alpha) / (1.0 + (h + alpha) * u),
        Phi=lambda u: (1.0 + (h + alpha) * u) * np.log1p((h + alpha) * u) / (h + alpha) - u,
        psi0=lambda u: -np.log1p(alpha * u),
        Psi0=lambda u: -((1.0 + alpha * u) * np.log1p(alpha * u) / alpha - u),
        v_range=(0.2 * h, 4.0 * h), u_range=(-1.0, 1.0))


def _legs_rel_mod_plus(h, alpha):
    psi, dpsi, psi_inv, Psi = _psi_log_expm1(h)
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=lambda u: np.log1p(h * np.exp(u)) - np.log1p(alpha * np.exp(u)),
        dphi=lambda u: (h * np.exp(u) / (1.0 + h * np.exp(u))
                        - alpha * np.exp(u) / (1.0 + alpha * np.exp(u))),
        Phi=lambda u: -_li2(-h * np.exp(u)) + _li2(-alpha * np.exp(u)),
        psi0=lambda u: np.log1p(alpha * np.exp(u)),
        Psi0=lambda u: -_li2(-alpha * np.exp(u)),
        v_range=(0.05, 1.0), u_range=(-1.5, 1.0))


def _legs_rel_mod_minus(h, alpha):
    c = h + alpha
    def psi(v):
        w = np.expm1(v)
        den = c - alpha * np.exp(v)
        _need((w * h > 0) & (den > 0), "log leg outside domain")
        return np.log(w) - np.log(den)
    def dpsi(v):
        return np.exp(v) / np.expm1(v) + alpha * np.exp(v) / (c - alpha * np.exp(v))
    def psi_inv(y):
        return np.log1p(h * np.exp(y) / (1.0 + alpha * np.exp(y)))
    def Psi(v):
        v = np.asarray(v)
        return (0.5 * v * v + _li2(np.exp(-v)) - v * np.log(c)
                + _li2((alpha / c) * np.exp(v)))
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=lambda u: np.log1p(c * np.exp(u)),
        dphi=lambda u: c * np.exp(u) / (1.0 + c * np.exp(u)),
        Phi=lambda u: -_li2(-c * np.exp(u)),
        psi0=lambda u: -np.log1p(alpha * np.exp(u)),
        Psi0=lambda u: _li2(-alpha * np.exp(u)),
        v_range=(0.05, 0.25), u_range=(-1.5, 1.0))


def _legs_rel_exp_gen(h, alpha, eps):
    psi, dpsi, psi_inv, Psi = _psi_eps_family(h, eps)
    c1 = h * (eps - alpha)
    c2 = alpha * (eps - h)
    def phi(u):
        w = np.exp(u)
        _need((1.0 + c1 * w > 0) & (1.0 + c2 * w > 0), "leg pole")
        return (np.log1p(c1 * w) - np.log1p(c2 * w)) / eps
    return Legs(
        psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
        phi=phi,
        dphi=lambda u: (c1 * np.exp(u) / (1.0 + c1 * np.exp(u))
                        - c2 * np.exp(u) / (1.0 + c2 * np.exp(u))) / eps,
        Phi=lambda u: (-_li2(-c1 * np.exp(u)) + _li2(-c2 * np.exp(u))) / eps,
        psi0=lambda u: np.log1p(eps * alpha * np.exp(u)) / eps,
        Psi0=lambda u: -_li2(-eps * alpha * np.exp(u)) / eps,
        v_range=(0.05, 0.8), u_range=(-1.0, 1.0))


def _legs_rel_hyp_mult(h, alpha, beta):
    _need((1.0 - 4.0 * beta * h > 0) & (1.0 - 4.0 * beta * alpha > 0),
          "reparametrized step undefined")
    h0 = -np.log(1.0 - 4.0 * beta * h) / (4.0 * beta)
    a0 = -np.log(1.0 - 4.0 * beta * alpha) / (4.0 * beta)
    s_psi = beta * h0
    s_phi = beta * (h0 - a0)
    s_psi0 = beta * a0
    psi, dpsi, psi_inv, Psi = _psi_hyperbolic(beta, s_psi)

    def make_pair(shift):
        if shift >= 0:
            f, df, _, F = _psi_hyperbolic(beta, shift)
            return f, df, F
        g, dg, _, G = _psi_hyperbolic(beta, -shift)
        return (lambda u: -g(u)), (lambda u: -dg(u)), (lambda u: -G(u))

    phi, dphi, Phi = make_pair(s_phi)
    psi0, _, Psi0 = make_pair(s_psi0)
    lo = max(s_psi, abs(s_phi), s_psi0) + 0.15
    return Legs(psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
                phi=phi, dphi=dphi, Phi=Phi, psi0=psi0, Psi0=Psi0,
                v_range=(lo, lo + 0.8), u_range=(lo, lo + 0.8)), h0, a0


def _legs_rel_rat_mult(h, alpha):
    psi, dpsi, psi_inv, Psi = _psi_rational_log(h)
    def mk(shift):
        def f(u):
            ratio = (np.asarray(u) + shift) / (np.asarray(u) - shift)
            _need(ratio > 0, "rational-log leg outside domain")
            return 0.5 * np.log(ratio)
        def df(u):
            return 0.5 * (1.0 / (u + shift) - 1.0 / (u - shift))
        def F(u):
            u = np.asarray(u)
            return 0.5 * ((u + shift) * np.log(np.abs(u + shift))
                          - (u - shift) * np.log(np.abs(u - shift)))
        return f, df, F
    phi, dphi, Phi = mk(h - alpha)
    psi0, _, Psi0 = mk(alpha)
    lo = max(h, abs(h - alpha), alpha) + 0.15
    return Legs(psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
                phi=phi, dphi=dphi, Phi=Phi, psi0=psi0, Psi0=Psi0,
                v_range=(h + 0.1, h + 1.0), u_range=(lo, lo + 1.0))


def _legs_rel_rat_add(h, alpha):
    base = _legs_rat_add(h)
    return Legs(
        psi=base.psi, dpsi=base.dpsi, psi_inv=base.psi_inv, Psi=base.Psi,
        phi=lambda u: (h - alpha) / u, dphi=lambda u: -(h - alpha) / np.asarray(u) ** 2,
        Phi=lambda u: (h - alpha) * np.log(np.abs(u)),
        psi0=lambda u: alpha / u, Psi0=lambda u: alpha * np.log(np.abs(u)),
        v_range=(0.15, 1.0), u_range=(0.3, 1.3))


def _legs_explicit(name, h, beta):
    if name == "explicit-a":
        b = _legs_rel_exp_add_plus(h, h)
        psi0, Psi0 = b.psi0, b.Psi0
        core = b
    elif name == "explicit-b":
        core = Legs(psi=lambda v: np.asarray(v) / h,
                    dpsi=lambda v: np.full_like(np.asarray(v, dtype=float), 1.0 / h),
                    psi_inv=lambda y: h * np.asarray(y),
                    Psi=lambda v: np.asarray(v) ** 2 / (2.0 * h),
                    v_range=(-0.8, 0.8), u_range=(-1.5, 1.0))
        psi0 = lambda u: np.log1p(h * h * np.exp(u)) / h
        Psi0 = lambda u: -_li2(-h * h * np.exp(u)) / h
    elif name == "explicit-c":
        b = _legs_dual(h)
        psi0 = lambda u: np.log1p(h * u)
        Psi0 = lambda u: (1.0 + h * u) * np.log1p(h * u) / h - u
        core = b
    elif name == "explicit-d":
        psi, dpsi, psi_inv, Psi = _psi_log_expm1(h)
        core = Legs(psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
                    v_range=(0.05, 1.0), u_range=(-1.5, 1.0))
        psi0 = lambda u: np.log1p(h * np.exp(u))
        Psi0 = lambda u: -_li2(-h * np.exp(u))
    elif name == "explicit-e":
        hyp, _h0 = _legs_hyp_mult(h, beta)
        core, psi0, Psi0 = hyp, hyp.phi, hyp.Phi
    elif name == "explicit-f":
        psi, dpsi, psi_inv, Psi = _psi_rational_log(h)
        core = Legs(psi=psi, dpsi=dpsi, psi_inv=psi_inv, Psi=Psi,
                    v_range=(h + 0.1, h + 1.0), u_range=(h + 0.1, h + 1.0))
        psi0, Psi0 = psi, Psi
    elif name == "explicit-g":
        b = _legs_rat_add(h)
        core = b
        psi0 = lambda u: h / u
        Psi0 = lambda u: h * np.log(np.abs(u))
    else:
        raise ValueError(name)
    return Legs(psi=core.psi, dpsi=core.dpsi, psi_inv=core.psi_inv, Psi=core.Psi,
                psi0=psi0, Psi0=Psi0, v_range=core.v_range, u_range=core.u_range)


# ---------------------------------------------------------------------------
# phase-space charts
# ---------------------------------------------------------------------------

def _chart_exp(c):
    return FlaschkaState(_exp_next(c.x, c.boundary), c.p.copy(), c.boundary)


def _chart_dual(c):
    gp, _ = _gaps(c.x, c.boundary)
    return FlaschkaState(np.exp(c.p), gp, c.boundary)


def _chart_mod_exp(c):
    a = _exp_next(c.x, c.boundary) * np.exp(c.p)
    b = np.exp(c.p) + _exp_prev(c.x, c.boundary)
    return FlaschkaState(a, b, c.boundary)


def _chart_mod_exp_eps(eps):
    def chart(c):
        a = _exp_next(c.x, c.boundary) * np.exp(eps * c.p)
        b = np.expm1(eps * c.p) / eps + eps * _exp_prev(c.x, c.boundary)
        return FlaschkaState(a, b, c.boundary)
    return chart


def _chart_hyp_mult(beta):
    def chart(c):
        gp, gn = _gaps(c.x, c.boundary)
        _need((np.abs(gp) > 1e-300) & (np.abs(gn) > 1e-300),
              "hyperbolic chart needs distinct neighbours")
        _need(np.abs(c.p) > 1e-300, "hyperbolic chart needs p != 0")
        a = beta ** 2 * (_coth(gp) + 1.0) * (_coth(gn) - 1.0) / np.sinh(beta * c.p) ** 2
        cp = _coth(beta * c.p)
        cp_prev = np.roll(cp, 1)
        b = (-beta * (cp + 1.0) * (_coth(gp) + 1.0)
             - beta * (cp_prev - 1.0) * (_coth(gp) - 1.0))
        return FlaschkaState(a, b, c.boundary)
    return chart


def _chart_rat_mult(c):
    gp, gn = _gaps(c.x, c.boundary)
    _need((np.abs(gp) > 1e-300) & (np.abs(gn) > 1e-300), "chart needs distinct neighbours")
    _need(np.abs(c.p) > 1e-300, "chart needs p != 0")
    a = 1.0 / (gp * gn * np.sinh(c.p) ** 2)
    b = -(_coth(np.roll(c.p, 1)) + _coth(c.p)) / gp
    return FlaschkaState(a, b, c.boundary)


def _chart_rat_add(c):
    gp, gn = _gaps(c.x, c.boundary)
    _need((np.abs(gp) > 1e-300) & (np.abs(gn) > 1e-300), "chart needs distinct neighbours")
    _need(np.abs(c.p) > 1e-300, "chart needs p != 0")
    a = 1.0 / (gp * gn * c.p ** 2)
    b = -(1.0 / np.roll(c.p, 1) + 1.0 / c.p) / gp
    return FlaschkaState(a, b, c.boundary)


def _chart_rel_exp_add(alpha):
    def chart(c):
        b = c.p - alpha * _exp_prev(c.x, c.boundary)
        return FlaschkaState(_exp_next(c.x, c.boundary), b, c.boundary)
    return chart


def _chart_ruijsenaars(alpha):
    def chart(c):
        b = np.expm1(alpha * c.p) / alpha
        a = _exp_next(c.x, c.boundary) * np.exp(alpha * c.p)
        return FlaschkaState(a, b, c.boundary)
    return chart


def _chart_rel_dual(alpha):
    def chart(c):
        gp, _ = _gaps(c.x, c.boundary)
        b = gp - alpha * np.exp(np.roll(c.p, 1))
        return FlaschkaState(np.exp(c.p), b, c.boundary)
    return chart


def _chart_rel_mod(c):
    b = np.exp(c.p) + _exp_prev(c.x, c.boundary)
    a = _exp_next(c.x, c.boundary) * np.exp(c.p)
    return FlaschkaState(a, b, c.boundary)


def _chart_rel_exp_gen(alpha, eps):
    def chart(c):
        b = np.expm1(eps * c.p) / eps + (eps - alpha) * _exp_prev(c.x, c.boundary)
        a = _exp_next(c.x, c.boundary) * np.exp(eps * c.p)
        return FlaschkaState(a, b, c.boundary)
    return chart


def _chart_rel_hyp_mult(alpha, beta, a0):
    eps = 1.0 / (4.0 * beta)
    def chart(c):
        gp, gn = _gaps(c.x, c.boundary)
        _need(np.abs(gn - beta * a0) > 1e-300, "hyperbolic chart hits a coth pole")
        y = -2.0 * beta * (_coth(beta * c.p + beta * a0) + 1.0)
        z = 2.0 * beta * (_coth(gn - beta * a0) - 1.0)
        y_prev, z_prev = np.roll(y, 1), np.roll(z, 1)
        du = 1.0 - eps * alpha * y_prev * z_prev
        dv = 1.0 - eps * alpha * y * z
        _need((np.abs(du) > 1e-300) & (np.abs(dv) > 1e-300), "chart denominator vanishes")
        u = y * (1.0 + eps * z_prev) / du
        v = z * (1.0 + eps * y) / dv
        return FlaschkaState(u * v, u + np.roll(v, 1), c.boundary)
    return chart


def _chart_rel_rat_mult(alpha):
    def chart(c):
        gp, gn = _gaps(c.x, c.boundary)
        cp = _coth(c.p)
        cp_prev = np.roll(cp, 1)
        dp = gp + alpha * cp_prev
        dn = gn + alpha * cp
        _need((np.abs(dp) > 1e-300) & (np.abs(dn) > 1e-300), "chart denominator vanishes")
        a = 1.0 / (np.sinh(c.p) ** 2 * dp * dn)
        b = -(cp_prev + cp) / dp
        return FlaschkaState(a, b, c.boundary)
    return chart


def _chart_rel_rat_add(alpha):
    def chart(c):
        gp, gn = _gaps(c.x, c.boundary)
        _need(np.abs(c.p) > 1e-300, "chart needs p != 0")
        ip = 1.0 / c.p
        ip_prev = np.roll(ip, 1)
        dp = gp + alpha * ip_prev
        dn = gn + alpha * ip
        _need((np.abs(dp) > 1e-300) & (np.abs(dn) > 1e-300), "chart denominator vanishes")
        a = 1.0 / (c.p ** 2 * dp * dn)
        b = -(ip_prev + ip) / dp
        return FlaschkaState(a, b, c.boundary)
    return chart


# ---------------------------------------------------------------------------
# Hamilton functions (spectral functions written in the chart)
# ---------------------------------------------------------------------------

def _ham_exp(c):
    return 0.5 * float(np.sum(c.p ** 2)) + float(np.sum(_exp_next(c.x, c.boundary)))


def _ham_rel_exp_add_plus(alpha):
    def ham(c):
        en = _exp_next(c.x, c.boundary)
        return float(0.5 * np.sum(c.p ** 2) + np.sum((1.0 + alpha * c.p) * en))
    return ham


def _ham_rel_exp_add_minus(alpha):
    def ham(c):
        ep = _exp_prev(c.x, c.boundary)
        arg = 1.0 + alpha * c.p - alpha * alpha * ep
        _need(arg > 0, "Hamilton function outside its log domain")
        return float(np.sum(c.p) / alpha - np.sum(np.log(arg)) / alpha ** 2)
    return ham


# ---------------------------------------------------------------------------
# catalog
# ---------------------------------------------------------------------------

CATALOG = (
    "exp", "dual", "mod-exp", "mod-exp-eps", "hyp-mult", "rat-mult", "rat-add",
    "rel-exp-add", "ruijsenaars", "rel-dual", "rel-mod", "rel-exp-gen",
    "rel-hyp-mult", "rel-rat-mult", "rel-rat-add",
    "explicit-a", "explicit-b", "explicit-c", "explicit-d", "explicit-e",
    "explicit-f", "explicit-g",
)

_MINUS_CAPABLE = {"rel-exp-add", "rel-dual", "rel-mod"}


def realization(name: str, h: float, *, alpha: float = 0.3, epsilon: float = 0.2,
                beta: float = 0.1, family: str | None = None) -> Realization:
    """Build a catalog chart with all parameters bound.

    ``family`` defaults to "dtl" for the non-relativistic charts,
    "drtl_plus" for the relativistic ones and "explicit" for explicit-*;
    rel-exp-add, rel-dual and rel-mod also accept family="drtl_minus".
    """
    if name not in CATALOG:
        raise ValueError(f"unknown realization {name!r}")
    params = {}
    ham = None
    ordered = False

    if name.startswith("explicit-"):
        family = family or "explicit"
        if family != "explicit":
            raise ValueError(f"{name} only supports the explicit family")
        al = h
        legs = _legs_explicit(name, h, beta)
        chart = {
            "explicit-a": _chart_rel_exp_add(h),
            "explicit-b": _chart_ruijsenaars(h),
            "explicit-c": _chart_rel_dual(h),
            "explicit-d": _chart_rel_mod,
            "explicit-e": None,
            "explicit-f": _chart_rel_rat_mult(h),
            "explicit-g": _chart_rel_rat_add(h),
        }[name]
        if name == "explicit-e":
            _, h0, a0_ = _legs_rel_hyp_mult(h, h, beta)
            chart = _chart_rel_hyp_mult(h, beta, a0_)
            params["beta"] = beta
        supports_open = name in ("explicit-a", "explicit-b", "explicit-d")
        ordered = name in ("explicit-e", "explicit-f", "explicit-g")
        bracket = {
            "explicit-a": Bracket("rtl1", h),
            "explicit-b": combo((1.0, Bracket("rtl1", h)), (h, Bracket("rtl2"))),
            "explicit-c": Bracket("rtl1", h),
            "explicit-d": Bracket("rtl2"),
            "explicit-e": combo((-1.0, Bracket("rtl3", h)), (-4.0 * beta, Bracket("rtl2"))),
            "explicit-f": combo((-1.0, Bracket("rtl3", h))),
            "explicit-g": combo((-1.0, Bracket("rtl3", h))),
        }[name]
        return Realization(name, "explicit", h, al, params, legs, bracket,
                           supports_open, chart, None, ordered,
                           psi0_on_image=(name == "explicit-c"))

    if name in ("exp", "dual", "mod-exp", "mod-exp-eps", "hyp-mult", "rat-mult", "rat-add"):
        family = family or "dtl"
        if family != "dtl":
            raise ValueError(f"{name} only supports the dtl family")
        if name == "exp":
            legs, chart, bracket = _legs_exp(h), _chart_exp, Bracket("tl1")
            ham = _ham_exp
            supports_open = True
        elif name == "dual":
            legs, chart, bracket = _legs_dual(h), _chart_dual, Bracket("tl1")
            supports_open = False
        elif name == "mod-exp":
            legs, chart, bracket = _legs_mod_exp(h), _chart_mod_exp, Bracket("tl2")
            supports_open = True
        elif name == "mod-exp-eps":
            legs = _legs_mod_exp_eps(h, epsilon)
            chart = _chart_mod_exp_eps(epsilon)
            bracket = combo((1.0, Bracket("tl1")), (epsilon, Bracket("tl2")))
            params["epsilon"] = epsilon
            supports_open = True
        elif name == "hyp-mult":
            legs, h0 = _legs_hyp_mult(h, beta)
            chart = _chart_hyp_mult(beta)
            bracket = combo((-1.0, Bracket("tl3")), (-4.0 * beta, Bracket("tl2")))
            params.update(beta=beta, h0=h0)
            supports_open = False
            ordered = True
        elif name == "rat-mult":
            legs, chart = _legs_rat_mult(h), _chart_rat_mult
            bracket = combo((-1.0, Bracket("tl3")))
            supports_open = False
            ordered = True
        else:  # rat-add
            legs, chart = _legs_rat_add(h), _chart_rat_add
            bracket = combo((-1.0, Bracket("tl3")))
            supports_open = False
            ordered = True
        return Realization(name, "dtl", h, 0.0, params, legs, bracket,
                           supports_open, chart, ham, ordered)

    # relativistic charts
    family = family or "drtl_plus"
    if family == "drtl_minus" and name not in _MINUS_CAPABLE:
        raise ValueError(f"{name} has no drtl_minus leg set")
    if family not in ("drtl_plus", "drtl_minus"):
        raise ValueError(f"{name} supports families drtl_plus/drtl_minus")
    al = alpha

    psi0_on_image = family == "drtl_minus"
    if name == "rel-exp-add":
        legs = (_legs_rel_exp_add_plus if family == "drtl_plus" else _legs_rel_exp_add_minus)(h, al)
        chart, bracket = _chart_rel_exp_add(al), Bracket("rtl1", al)
        ham = _ham_rel_exp_add_plus(al) if family == "drtl_plus" else _ham_rel_exp_add_minus(al)
        supports_open = True
    elif name == "ruijsenaars":
        legs = _legs_ruijsenaars(h, al)
        chart = _chart_ruijsenaars(al)
        bracket = combo((1.0, Bracket("rtl1", al)), (al, Bracket("rtl2")))
        supports_open = True
    elif name == "rel-dual":
        legs = (_legs_rel_dual_plus if family == "drtl_plus" else _legs_rel_dual_minus)(h, al)
        chart, bracket = _chart_rel_dual(al), Bracket("rtl1", al)
        supports_open = False
        psi0_on_image = family == "drtl_plus"   # p_{k-1}-referencing chart flips the slicing
    elif name == "rel-mod":
        legs = (_legs_rel_mod_plus if family == "drtl_plus" else _legs_rel_mod_minus)(h, al)
        chart, bracket = _chart_rel_mod, Bracket("rtl2")
        supports_open = True
    elif name == "rel-exp-gen":
        legs = _legs_rel_exp_gen(h, al, epsilon)
        chart = _chart_rel_exp_gen(al, epsilon)
        bracket = combo((1.0, Bracket("rtl1", al)), (epsilon, Bracket("rtl2")))
        params["epsilon"] = epsilon
        supports_open = True
    elif name == "rel-hyp-mult":
        legs, h0, a0 = _legs_rel_hyp_mult(h, al, beta)
        chart = _chart_rel_hyp_mult(al, beta, a0)
        bracket = combo((-1.0, Bracket("rtl3", al)), (-4.0 * beta, Bracket("rtl2")))
        params.update(beta=beta, h0=h0, alpha0=a0)
        supports_open = False
        ordered = True
    elif name == "rel-rat-mult":
        legs = _legs_rel_rat_mult(h, al)
        chart = _chart_rel_rat_mult(al)
        bracket = combo((-1.0, Bracket("rtl3", al)))
        supports_open = False
        ordered = True
    elif name == "rel-rat-add":
        legs = _legs_rel_rat_add(h, al)
        chart = _chart_rel_rat_add(al)
        bracket = combo((-1.0, Bracket("rtl3", al)))
        supports_open = False
        ordered = True
    else:
        raise ValueError(name)
    return Realization(name, family, h, al, params, legs, bracket,
                       supports_open, chart, ham, ordered, psi0_on_image)


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def flaschka_of(spec: Realization, c: CanonicalState) -> FlaschkaState:
    if c.boundary is Boundary.OPEN and not spec.supports_open:
        raise DomainError(f"chart {spec.name} is periodic-only")
    return spec.to_flaschka(c)


def _psi0_sums(spec, x, boundary):
    """psi0(x_k - x_{k-1}) - psi0(x_{k+1} - x_k), zero where absent."""
    if spec.legs.psi0 is None:
        return np.zeros(len(x))
    return (_leg_at_prev_gaps(spec.legs.psi0, x, boundary)
            - _leg_at_next_gaps(spec.legs.psi0, x, boundary))


def _first_equation_rhs(spec, c):
    """p_k minus every term not involving x~; what psi + phi must equal."""
    rhs = c.p.copy()
    if spec.legs.psi0 is not None and not spec.psi0_on_image:
        rhs = rhs - _psi0_sums(spec, c.x, c.boundary)
    return rhs


def canonical_step(spec: Realization, c: CanonicalState) -> CanonicalState:
    """One step of the chart's map; open chains solve by a forward sweep,
    rings by a damped Newton iteration on the full position vector."""
    if c.boundary is Boundary.OPEN and not spec.supports_open:
        raise DomainError(f"chart {spec.name} is periodic-only")
    x, p, n, bc = c.x, c.p, c.n, c.boundary
    legs = spec.legs
    rhs = _first_equation_rhs(spec, c)

    if spec.family == "explicit":
        xt = x + legs.psi_inv(rhs)
    elif bc is Boundary.OPEN:
        xt = np.empty(n)
        for k in range(n):
            r = rhs[k] if k == 0 else rhs[k] - legs.phi(x[k] - xt[k - 1])
            xt[k] = x[k] + legs.psi_inv(r)
    else:
        xt = _newton_ring(spec, x, rhs)

    v = xt - x
    pt = legs.psi(v)
    if spec.family != "explicit":
        pt = pt + _leg_at_mixed_next(legs.phi, x, xt, bc)
    if spec.legs.psi0 is not None and spec.psi0_on_image:
        pt = pt - _psi0_sums(spec, xt, bc)
    return CanonicalState(xt, pt, bc)


def _newton_ring(spec, x, rhs):
    legs = spec.legs
    n = len(x)

    def residual(xt):
        return (legs.psi(xt - x) + legs.phi(x - np.roll(xt, 1)) - rhs)

    try:
        xt = x + legs.psi_inv(rhs)
    except (DomainError, NonInvertibleLeg):
        xt = x + 2.0 * abs(spec.h)   # small positive shift is inside every leg domain
    try:
        r = residual(xt)
    except DomainError as exc:
        raise SolveFailed("Newton seed lies outside the leg domain") from exc
    scale = max(1.0, float(np.max(np.abs(rhs))))
    for _ in range(_NEWTON_ITERS):
        if np.max(np.abs(r)) < _NEWTON_TOL * scale:
            return xt
        J = np.zeros((n, n))
        idx = np.arange(n)
        J[idx, idx] = legs.dpsi(xt - x)
        J[idx, (idx - 1) % n] -= legs.dphi(x - np.roll(xt, 1))
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError as exc:
            raise SolveFailed("singular Newton system") from exc
        t = 1.0
        for _ in range(40):
            try:
                r_new = residual(xt + t * step)
            except DomainError:
                t *= 0.5
                continue
            if np.max(np.abs(r_new)) < np.max(np.abs(r)):
                xt = xt + t * step
                r = r_new
                break
            t *= 0.5
        else:
            raise SolveFailed("Newton line search stalled")
    raise SolveFailed("Newton did not reach tolerance")


def lagrangian_value(spec: Realization, x, xt, boundary: Boundary) -> float:
    """Discrete action of one time slice for the chart's family."""
    x = np.asarray(x, dtype=float)
    xt = np.asarray(xt, dtype=float)
    legs = spec.legs
    total = float(np.sum(legs.Psi(xt - x)))
    if legs.Phi is not None:
        total -= float(np.sum(_leg_at_mixed_next(legs.Phi, x, xt, boundary)))
    if legs.Psi0 is not None:
        base = xt if spec.psi0_on_image else x
        total -= float(np.sum(_leg_at_next_gaps(legs.Psi0, base, boundary)))
    return total


def newtonian_residual(spec: Realization, x_prev, x, x_next, boundary: Boundary) -> np.ndarray:
    """Per-site defect of the three-level equation of motion."""
    x_prev = np.asarray(x_prev, dtype=float)
    x = np.asarray(x, dtype=float)
    x_next = np.asarray(x_next, dtype=float)
    legs = spec.legs
    res = legs.psi(x_next - x) - legs.psi(x - x_prev)
    if legs.phi is not None:
        res = res - _leg_at_mixed_next(legs.phi, x_prev, x, boundary)   # phi(prev_{k+1} - x_k)
        res = res + _leg_at_mixed_prev(legs.phi, x, x_next, boundary)   # phi(x_k - next_{k-1})
    if legs.psi0 is not None:
        res = res + _psi0_sums(spec, x, boundary)
    return res


def pullback_consistency(spec: Realization, c: CanonicalState) -> float:
    """Inf-norm gap between chart-then-step and step-then-chart."""
    s = flaschka_of(spec, c)
    ct = canonical_step(spec, c)
    via_chart = flaschka_of(spec, ct)
    if spec.family == "dtl":
        direct = maps.dtl_step(s, spec.h)
    elif spec.family == "drtl_plus":
        direct = maps.drtl_plus_step(s, spec.alpha, spec.h)
    elif spec.family == "drtl_minus":
        direct = maps.drtl_minus_step(s, spec.alpha, spec.h)
    else:
        direct = maps.drtl_plus_explicit_step(s, spec.h)
    return float(max(np.max(np.abs(via_chart.a - direct.a)),
                     np.max(np.abs(via_chart.b - direct.b))))


def symplectic_defect(spec: Realization, c: CanonicalState, fd_step=None) -> float:
    """|| J^T Omega J - Omega ||_inf for the FD Jacobian of the step map."""
    n = c.n
    w0 = np.concatenate([c.x, c.p])
    if fd_step is None:
        fd_step = float(2.0 ** -52) ** (1.0 / 3.0)
    hvec = fd_step * np.maximum(1.0, np.abs(w0))
    cols = []
    for i in range(2 * n):
        wp, wm = w0.copy(), w0.copy()
        wp[i] += hvec[i]
        wm[i] -= hvec[i]
        cp = canonical_step(spec, CanonicalState(wp[:n], wp[n:], c.boundary))
        cm = canonical_step(spec, CanonicalState(wm[:n], wm[n:], c.boundary))
        cols.append((np.concatenate([cp.x, cp.p]) - np.concatenate([cm.x, cm.p]))
                    / (2.0 * hvec[i]))
    J = np.column_stack(cols)
    omega = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    return float(np.max(np.abs(J.T @ omega @ J - omega)))
