"""Integrable discrete-time maps in (a, b) variables.

Each map is the conjugation step T -> P+^{-1} T P+ of a triangular
factorization, written out as closed recurrences:

* dtl(h): factor diagonal beta_k = 1 + h b_k - h^2 a_{k-1}/beta_{k-1}, then

      b~_k = b_k + h (a_k/beta_k - a_{k-1}/beta_{k-1}),
      a~_k = a_k beta_{k+1}/beta_k.

* drtl+(alpha, h): diagonals d1_k (first factor) and d2_k (second factor):

      d1_k = 1 + h b_k + h(alpha - h) a_{k-1}/d1_{k-1},
      d2_k = d1_{k-1} (d1_k + h alpha a_k) / (d1_{k-1} + h alpha a_{k-1}),

      1 + alpha b~_k = (1 + alpha b_k) d2_k/d1_k,   a~_k = a_k d2_{k+1}/d1_k.

* drtl-(alpha, h): superdiagonals dm_k (second factor) and cm_k (first):

      dm_k = a_k / (1 + (alpha + h)(b_k - h dm_{k-1})),
      cm_k = dm_k (1 + alpha (b_k - h dm_{k-1})) / (1 + alpha (b_{k+1} - h dm_k)),

      1 + alpha b~_k = (1 + alpha b_{k+1}) cm_k/dm_k,  a~_k = a_{k+1} cm_k/dm_{k+1}.

Open chains start the recurrences from a_0 = 0; on rings the recurrences are
cyclic and double-valued, and the branch with beta_k -> 1 + h b_k (etc.) as
h -> 0 is selected by fixed-point iteration.

The parameter coincidences alpha = h (plus) and alpha = -h (minus) collapse
the recurrences; the resulting explicit rational maps are provided
separately, together with the inverse of the explicit plus map.
"""

from __future__ import annotations

import numpy as np

from .core import Boundary, FlaschkaState, shifted
from .errors import BranchNotFound, NumericalError, SingularStep

_PIVOT = 1e-13          # singularity guard for denominators
_FP_TOL = 1e-14         # periodic fixed-point tolerance (relative)
_FP_SWEEPS = 200
_ID_TOL = 1e-12         # internal two-expression identity tolerance
_ADD_TOL = 1e-10        # addition-formula tolerance inside steps


def _check(val: np.ndarray, what: str) -> np.ndarray:
    if np.min(np.abs(val)) < _PIVOT:
        raise SingularStep(f"{what} fell below the singularity guard")
    return val


def _cyclic_fixed_point(update, seed: np.ndarray, what: str) -> np.ndarray:
    """Solve the cyclic one-step recurrence v_k = update(k, v_{k-1}).

    Gauss-Seidel sweeps from the given seed select the branch the seed
    approximates; a damped scalar Newton polish on the closure condition
    v_n = forward(v_n) runs if the sweeps stall.
    """
    n = len(seed)
    v = np.array(seed, dtype=float)

    def sweep_residual():
        prev = np.roll(v, 1)
        return float(np.max(np.abs(v - np.array([update(k, prev[k]) for k in range(n)]))))

    scale = max(1.0, float(np.max(np.abs(v))))
    for _ in range(_FP_SWEEPS):
        for k in range(n):
            v[k] = update(k, v[k - 1])
        if sweep_residual() < _FP_TOL * scale:
            return v

    # Newton polish on t = v_n: run the chain forward from v_0 = t and close it.
    def chain(t):
        val = t
        dval = 1.0
        for k in range(n):
            eps = 1e-7 * max(1.0, abs(val))
            base = update(k, val)
            dval = (update(k, val + eps) - base) / eps * dval
            val = base
        return val, dval

    t = v[-1]
    g, dg = chain(t)
    for _ in range(60):
        denom = dg - 1.0
        if abs(denom) < _PIVOT:
            break
        step = -(g - t) / denom
        for _ in range(30):
            g_new, dg_new = chain(t + step)
            if abs(g_new - (t + step)) < abs(g - t):
                t, g, dg = t + step, g_new, dg_new
                break
            step *= 0.5
        else:
            break
        if abs(g - t) < _FP_TOL * scale:
            break
    v[-1] = t
    for k in range(n):
        v[k] = update(k, v[k - 1])
    if sweep_residual() > 1e-12 * scale:
        raise BranchNotFound(f"cyclic recurrence for {what} did not converge")
    return v


# ---------------------------------------------------------------------------
# dtl(h)
# ---------------------------------------------------------------------------

def dtl_factor_diag(s: FlaschkaState, h: float) -> np.ndarray:
    """Diagonal beta of the lower factor in the LU splitting of I + h T."""
    a, b, n = s.a, s.b, s.n

    def update(k, prev):
        if s.boundary is Boundary.OPEN and k == 0:
            return 1.0 + h * b[0]
        if abs(prev) < _PIVOT:
            raise SingularStep("beta recurrence hit a vanishing pivot")
        return 1.0 + h * b[k] - h * h * a[k - 1] / prev

    if s.boundary is Boundary.OPEN:
        beta = np.empty(n)
        prev = 1.0
        for k in range(n):
            prev = update(k, prev)
            beta[k] = prev
        return _check(beta, "beta")
    return _check(_cyclic_fixed_point(update, 1.0 + h * b, "beta"), "beta")


def dtl_step(s: FlaschkaState, h: float) -> FlaschkaState:
    beta = dtl_factor_diag(s, h)
    ratio = s.a / beta
    ratio_prev = shifted(ratio, -1, s.boundary)
    beta_next = shifted(beta, +1, s.boundary, fill=1.0)
    b_new = s.b + h * (ratio - ratio_prev)
    a_new = s.a * beta_next / beta
    return s.replace(a=a_new, b=b_new)


# ---------------------------------------------------------------------------
# drtl+(alpha, h)
# ---------------------------------------------------------------------------

def drtl_plus_factors(s: FlaschkaState, alpha: float, h: float):
    """Diagonals (d1, d2) of the two lower transition factors of drtl+."""
    a, b, n = s.a, s.b, s.n

    def update(k, prev):
        if s.boundary is Boundary.OPEN and k == 0:
            return 1.0 + h * b[0]
        if abs(prev) < _PIVOT:
            raise SingularStep("d1 recurrence hit a vanishing pivot")
        return 1.0 + h * b[k] + h * (alpha - h) * a[k - 1] / prev

    if s.boundary is Boundary.OPEN:
        d1 = np.empty(n)
        prev = 1.0
        for k in range(n):
            prev = update(k, prev)
            d1[k] = prev
        d1_prev = np.concatenate([[1.0], d1[:-1]])
        a_prev = shifted(a, -1, s.boundary)
    else:
        seed = 1.0 + h * (b + alpha * shifted(a, -1, s.boundary))
        d1 = _cyclic_fixed_point(update, seed, "d1")
        d1_prev = np.roll(d1, 1)
        a_prev = np.roll(a, 1)
    _check(d1, "d1")

    denom = _check(d1_prev + h * alpha * a_prev, "d1 + h*alpha*a")
    d2 = d1_prev * (d1 + h * alpha * a) / denom

    # cross-check against the equivalent second expression where it is regular
    b_next = shifted(b, +1, s.boundary)
    d1_next = shifted(d1, +1, s.boundary, fill=1.0)
    num2 = alpha * d1_next - h * (1.0 + alpha * b_next)
    den2 = alpha * d1 - h * (1.0 + alpha * b)
    scale = max(1.0, float(np.max(np.abs(d2))))
    ok = np.abs(den2) > 1e-8 * scale
    if np.any(ok):
        alt = d1[ok] * num2[ok] / den2[ok]
        if np.max(np.abs(alt - d2[ok])) > _ID_TOL * scale:
            raise NumericalError("the two expressions for d2 disagree")
    return d1, d2


def drtl_plus_step(s: FlaschkaState, alpha: float, h: float) -> FlaschkaState:
    d1, d2 = drtl_plus_factors(s, alpha, h)
    a, b = s.a, s.b
    d2_next = shifted(d2, +1, s.boundary, fill=1.0)
    a_new = a * d2_next / d1

    d1_next = shifted(d1, +1, s.boundary, fill=1.0)
    b_next = shifted(b, +1, s.boundary)
    if alpha == 0.0:
        # removable singularity: eliminate d2 between the two addition formulas
        b_new = b_next + (d1 - d1_next) / h
    else:
        b_new = ((1.0 + alpha * b) * d2 / d1 - 1.0) / alpha

    a_new_prev = shifted(a_new, -1, s.boundary)
    scale = max(1.0, float(np.max(np.abs(d1))), float(np.max(np.abs(b))))
    add1 = h * (1.0 + alpha * b_new) + alpha * d1_next - h * (1.0 + alpha * b_next) - alpha * d2
    add2 = d1 - h * alpha * a_new_prev - d2 + h * alpha * a
    if max(np.max(np.abs(add1)), np.max(np.abs(add2))) > _ADD_TOL * scale:
        raise NumericalError("drtl+ addition formulas violated")
    return s.replace(a=a_new, b=b_new)


# ---------------------------------------------------------------------------
# drtl-(alpha, h)
# ---------------------------------------------------------------------------

def drtl_minus_factors(s: FlaschkaState, alpha: float, h: float):
    """Superdiagonal coefficients (dm, cm) of the two upper factors of drtl-."""
    a, b, n = s.a, s.b, s.n

    def update(k, prev):
        if s.boundary is Boundary.OPEN and k == 0:
            prev = 0.0
        den = 1.0 + (alpha + h) * (b[k] - h * prev)
        if abs(den) < _PIVOT:
            raise SingularStep("dm recurrence hit a vanishing denominator")
        return a[k] / den

    if s.boundary is Boundary.OPEN:
        dm = np.empty(n)
        prev = 0.0
        for k in range(n):
            prev = update(k, prev)
            dm[k] = prev
        dm_prev = np.concatenate([[0.0], dm[:-1]])
    else:
        denom0 = _check(1.0 + alpha * b, "1 + alpha*b")
        dm = _cyclic_fixed_point(update, a / denom0, "dm")
        dm_prev = np.roll(dm, 1)

    b_next = shifted(b, +1, s.boundary)
    upper = 1.0 + alpha * (b - h * dm_prev)
    lower = _check(1.0 + alpha * (b_next - h * dm), "1 + alpha(b_next - h dm)")
    cm = dm * upper / lower

    # second expression, checked away from its 0/0 degenerations
    a_next = shifted(a, +1, s.boundary)
    dm_next = shifted(dm, +1, s.boundary)
    den2 = alpha * a_next + h * dm_next
    scale = max(1.0, float(np.max(np.abs(dm))))
    ok = np.abs(den2) > 1e-8 * scale
    if s.boundary is Boundary.OPEN:
        ok[-1] = False
    if np.any(ok):
        alt = dm_next[ok] * (alpha * a[ok] + h * dm[ok]) / den2[ok]
        if np.max(np.abs(alt - cm[ok])) > _ID_TOL * scale:
            raise NumericalError("the two expressions for cm disagree")
    return dm, cm


def drtl_minus_step(s: FlaschkaState, alpha: float, h: float) -> FlaschkaState:
    dm, cm = drtl_minus_factors(s, alpha, h)
    a, b = s.a, s.b
    dm_prev = shifted(dm, -1, s.boundary)
    b_next = shifted(b, +1, s.boundary)

    # exact rational form of (1 + alpha b~) = (1 + alpha b_next) * cm/dm,
    # free of the 0/0 at alpha = 0 and at open boundaries where dm_n = 0
    denom = _check(1.0 + alpha * (b_next - h * dm), "1 + alpha(b_next - h dm)")
    b_new = (b + h * (dm - dm_prev) + alpha * b_next * (b - h * dm_prev)) / denom
    a_new = cm * (1.0 + (alpha + h) * (b_next - h * dm))

    scale = max(1.0, float(np.max(np.abs(b))), float(np.max(np.abs(dm))))
    add1 = b_new + h * dm_prev - b - h * cm
    add2 = alpha * a_new - h * dm - alpha * a + h * cm
    if max(np.max(np.abs(add1)), np.max(np.abs(add2))) > _ADD_TOL * scale:
        raise NumericalError("drtl- addition formulas violated")
    return s.replace(a=a_new, b=b_new)


# ---------------------------------------------------------------------------
# explicit rational degenerations
# ---------------------------------------------------------------------------

def drtl_plus_explicit_step(s: FlaschkaState, h: float) -> FlaschkaState:
    """drtl+(h, h): fully explicit birational discretization of the tl flow.

        1 + h b~_k = (1 + h b_{k-1}) D_k / D_{k-1},
        a~_k = a_k D_{k+1} / D_k,        D_k = 1 + h b_k + h^2 a_k.
    """
    a, b = s.a, s.b
    d = 1.0 + h * b + h * h * a
    _check(d, "1 + h b + h^2 a")
    d_prev = shifted(d, -1, s.boundary, fill=1.0)
    d_next = shifted(d, +1, s.boundary, fill=1.0)
    b_prev = shifted(b, -1, s.boundary)
    a_prev = shifted(a, -1, s.boundary)
    # expanded form of ((1 + h b_prev) d/d_prev - 1)/h: no small-h cancellation
    b_new = (b - b_prev + h * (a - a_prev) + b_prev * d) / d_prev
    a_new = a * d_next / d
    return s.replace(a=a_new, b=b_new)


def drtl_plus_explicit_inverse(s: FlaschkaState, h: float) -> FlaschkaState:
    """Invert drtl+(h, h) through 1 + h b~_k + h^2 a~_{k-1} = 1 + h b_k + h^2 a_k."""
    a_new, b_new = s.a, s.b
    a_new_prev = shifted(a_new, -1, s.boundary)
    d = 1.0 + h * b_new + h * h * a_new_prev       # equals D_k of the preimage
    _check(d, "reconstructed D")
    n = s.n
    b = np.empty(n)
    if s.boundary is Boundary.OPEN:
        # site n has a_n = 0, so D_n determines b_n directly; the two-term
        # relation then walks b_{k-1} out of b~_k for k = n..2
        b[-1] = (d[-1] - 1.0) / h
        for k in range(n - 1, 0, -1):
            b[k - 1] = ((1.0 + h * b_new[k]) * d[k - 1] / d[k] - 1.0) / h
    else:
        for k in range(n):
            j = (k + 1) % n
            b[k] = ((1.0 + h * b_new[j]) * d[k] / d[j] - 1.0) / h
    a = (d - 1.0 - h * b) / (h * h)
    if s.boundary is Boundary.OPEN:
        a[-1] = 0.0
    return s.replace(a=a, b=b)


def drtl_minus_explicit_step(s: FlaschkaState, h: float) -> FlaschkaState:
    """drtl-(-h, h): the mirrored explicit rational discretization.

        1 - h b~_k = (1 - h b_{k+1}) E_k / E_{k+1},
        a~_k = a_k E_k / E_{k+1},        E_k = 1 - h b_k + h^2 a_{k-1}.
    """
    a, b = s.a, s.b
    a_prev = shifted(a, -1, s.boundary)
    e = 1.0 - h * b + h * h * a_prev
    _check(e, "1 - h b + h^2 a_prev")
    e_next = shifted(e, +1, s.boundary, fill=1.0)
    _check(e_next, "E_next")
    b_next = shifted(b, +1, s.boundary)
    # expanded form of (1 - (1 - h b_next) e/e_next)/h: no small-h cancellation
    b_new = (b - b_next + h * (a - a_prev) + b_next * e) / e_next
    a_new = a * e / e_next
    return s.replace(a=a_new, b=b_new)
