"""Lax matrices, spectral invariants, unpivoted LU, and monodromy quantities.

The tridiagonal Lax matrix (a, b; lambda):

    T = lambda^{-1} sum a_k E_{k,k+1} + sum b_k E_{kk} + lambda sum E_{k+1,k}

with wrap-around corners on rings.  Open chains drop the corners and fix
lambda = 1.  The bidiagonal pair for the relativistic hierarchy:

    L = sum (1 + alpha b_k) E_{kk} + alpha lambda sum E_{k+1,k}
    U = I - alpha lambda^{-1} sum a_k E_{k,k+1}

and T1 = L U^{-1}, T2 = U^{-1} L.

``crout_lu`` factors M = P+ P- with P+ lower triangular (free diagonal) and
P- unit upper triangular, without pivoting: pivoting would leave the
triangular subgroups the whole construction lives in.  ``exact_solution``
uses it to evaluate n discrete steps in closed form by factoring
(I + h T0)^n and conjugating T0.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular

from .core import Boundary, CanonicalState, FlaschkaState
from .errors import (DomainError, FactorizationOutsideDomain, NumericalError,
                     ShapeViolation, SingularMatrix)

_PIVOT = 1e-13


def build_T(s: FlaschkaState, lam: float = 1.0) -> np.ndarray:
    n = s.n
    if s.boundary is Boundary.OPEN:
        lam = 1.0
    elif lam == 0.0:
        raise DomainError("spectral parameter must be nonzero on a ring")
    T = np.diag(s.b.astype(float))
    for k in range(n - 1):
        T[k, k + 1] = s.a[k] / lam
        T[k + 1, k] = lam
    if s.boundary is Boundary.PERIODIC:
        T[n - 1, 0] += s.a[n - 1] / lam
        T[0, n - 1] += lam
    return T


def build_LU_rtl(s: FlaschkaState, alpha: float, lam: float = 1.0):
    n = s.n
    if s.boundary is Boundary.OPEN:
        lam = 1.0
    elif lam == 0.0:
        raise DomainError("spectral parameter must be nonzero on a ring")
    L = np.diag(1.0 + alpha * s.b)
    U = np.eye(n)
    for k in range(n - 1):
        L[k + 1, k] = alpha * lam
        U[k, k + 1] = -alpha * s.a[k] / lam
    if s.boundary is Boundary.PERIODIC:
        L[0, n - 1] += alpha * lam
        U[n - 1, 0] += -alpha * s.a[n - 1] / lam
    return L, U


def rtl_t1(s: FlaschkaState, alpha: float, lam: float = 1.0) -> np.ndarray:
    L, U = build_LU_rtl(s, alpha, lam)
    return _right_divide(L, U)


def rtl_t2(s: FlaschkaState, alpha: float, lam: float = 1.0) -> np.ndarray:
    L, U = build_LU_rtl(s, alpha, lam)
    try:
        return np.linalg.solve(U, L)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("U is not invertible") from exc


def _right_divide(L: np.ndarray, U: np.ndarray) -> np.ndarray:
    # L @ U^{-1} without forming the inverse
    try:
        return np.linalg.solve(U.T, L.T).T
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("U is not invertible") from exc


DEFAULT_LAMBDAS = (1.0, 2.0, 0.5, -1.0)


def spectral_invariants(s: FlaschkaState, alpha: float | None = None,
                        lambda_samples=None) -> np.ndarray:
    """tr(T^k), k = 1..n, of the relevant Lax matrix.

    alpha None selects the tridiagonal matrix, otherwise T1 of the
    relativistic pair.  Open chains evaluate at lambda = 1; rings sample
    the default four spectral-parameter values (or the given ones).
    """
    if s.boundary is Boundary.OPEN:
        lams = (1.0,)
    else:
        lams = tuple(lambda_samples) if lambda_samples is not None else DEFAULT_LAMBDAS
    out = []
    for lam in lams:
        T = build_T(s, lam) if alpha is None else rtl_t1(s, alpha, lam)
        P = np.eye(s.n)
        for _ in range(s.n):
            P = P @ T
            out.append(np.trace(P))
    return np.asarray(out)


def crout_lu(m: np.ndarray):
    """Unpivoted factorization m = lower * unit_upper (Crout ordering)."""
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("square matrix required")
    low = np.zeros_like(m)
    up = np.eye(n)
    scale = max(1.0, float(np.max(np.abs(m))))
    for k in range(n):
        low[k:, k] = m[k:, k] - low[k:, :k] @ up[:k, k]
        if abs(low[k, k]) < _PIVOT * scale:
            raise FactorizationOutsideDomain(f"pivot {k + 1} vanished")
        if k + 1 < n:
            up[k, k + 1:] = (m[k, k + 1:] - low[k, :k] @ up[:k, k + 1:]) / low[k, k]
    return low, up


def exact_solution(s0: FlaschkaState, h: float, nsteps: int) -> FlaschkaState:
    """State after nsteps of dtl(h), via LU factorization of (I + h T0)^n."""
    if s0.boundary is not Boundary.OPEN:
        raise DomainError("closed-form evaluation is implemented for open chains")
    if nsteps < 0:
        raise ValueError("nsteps must be >= 0")
    T0 = build_T(s0)
    n = s0.n
    M = np.eye(n)
    F = np.eye(n) + h * T0
    for _ in range(nsteps):
        M = M @ F
    low, _ = crout_lu(M)
    Tn = solve_triangular(low, T0 @ low, lower=True)

    scale = max(1.0, float(np.max(np.abs(Tn))))
    band = np.zeros_like(Tn)
    idx = np.arange(n)
    band[idx, idx] = Tn[idx, idx]
    band[idx[:-1], idx[:-1] + 1] = Tn[idx[:-1], idx[:-1] + 1]
    band[idx[:-1] + 1, idx[:-1]] = Tn[idx[:-1] + 1, idx[:-1]]
    if np.max(np.abs(Tn - band)) > 1e-9 * scale:
        raise ShapeViolation("conjugated matrix left the tridiagonal band")
    if np.max(np.abs(np.diag(Tn, -1) - 1.0)) > 1e-9 * scale:
        raise ShapeViolation("subdiagonal of the conjugated matrix drifted from 1")

    a = np.concatenate([np.diag(Tn, 1), [0.0]])
    return FlaschkaState(a, np.diag(Tn).copy(), Boundary.OPEN)


# ---------------------------------------------------------------------------
# monodromy of Baecklund steps in canonical variables
# ---------------------------------------------------------------------------

def _exp_prev_gaps(x: np.ndarray, boundary: Boundary) -> np.ndarray:
    """e^{x_k - x_{k-1}}, with the open-end convention e^{x_1 - x_0} = 0."""
    if boundary is Boundary.PERIODIC:
        return np.exp(x - np.roll(x, 1))
    out = np.exp(x - np.concatenate([[0.0], x[:-1]]))
    out[0] = 0.0
    return out


def _monodromy(locals_: list[np.ndarray]) -> np.ndarray:
    T = np.eye(2)
    for L in locals_:
        T = L @ T
    return T


def _check_trace_or_eigenvalue(T: np.ndarray, P: float, boundary: Boundary) -> None:
    scale = max(1.0, float(np.max(np.abs(T))))
    if boundary is Boundary.OPEN:
        if abs(np.trace(T) - P) > 1e-11 * max(scale, abs(P)):
            raise NumericalError("product of step ratios does not match tr T_N")
    else:
        det = (T[0, 0] - P) * (T[1, 1] - P) - T[0, 1] * T[1, 0]
        if abs(det) > 1e-9 * scale * scale:
            raise NumericalError("product of step ratios is not an eigenvalue of T_N")


def toda_local_matrix(p_k: float, exp_gap: float, lam: float) -> np.ndarray:
    """Local monodromy factor at one site; exp_gap = e^{x_k - x_{k-1}}."""
    return np.array([[1.0 + lam * p_k, -lam * lam * exp_gap], [1.0, 0.0]])


def rtl_local_matrix(p_k: float, exp_gap: float, alpha: float, lam: float) -> np.ndarray:
    return np.array([[1.0 + lam * p_k - lam * alpha * exp_gap,
                      -lam * (lam - alpha) * exp_gap], [1.0, 0.0]])


def monodromy_toda(c: CanonicalState, xt: np.ndarray, lam: float):
    """Monodromy 2x2 matrix and conserved product for a Toda Baecklund pair.

    xt must be the image configuration of (x, p) under the step with
    parameter lam; the conserved quantity is P = prod e^{xt_k - x_k}.
    """
    x, p = c.x, c.p
    egap = _exp_prev_gaps(x, c.boundary)
    T = _monodromy([toda_local_matrix(p[k], egap[k], lam) for k in range(c.n)])
    P = float(np.prod(np.exp(np.asarray(xt) - x)))
    _check_trace_or_eigenvalue(T, P, c.boundary)
    return T, P


def monodromy_rtl(c: CanonicalState, xt: np.ndarray, alpha: float, lam: float):
    """Relativistic analog; gamma_k = e^{xt_k - x_k}(1 - lam*alpha*e^{x_{k+1} - xt_k})."""
    x, p = c.x, c.p
    egap = _exp_prev_gaps(x, c.boundary)
    T = _monodromy([rtl_local_matrix(p[k], egap[k], alpha, lam) for k in range(c.n)])
    xt = np.asarray(xt)
    if c.boundary is Boundary.PERIODIC:
        x_next = np.roll(x, -1)
        gam = np.exp(xt - x) * (1.0 - lam * alpha * np.exp(x_next - xt))
    else:
        gam = np.exp(xt - x)
        gam[:-1] *= 1.0 - lam * alpha * np.exp(x[1:] - xt[:-1])
    P = float(np.prod(gam))
    _check_trace_or_eigenvalue(T, P, c.boundary)
    return T, P


# ---------------------------------------------------------------------------
# zero-curvature residual for the relativistic step, additive exponential chart
# ---------------------------------------------------------------------------

def drtl_transition_L(x_k: float, p_k: float, alpha: float, lam: float) -> np.ndarray:
    """Site-to-site transition matrix; local in (x_k, p_k), no step size enters."""
    return np.array([[p_k + lam, np.exp(x_k)],
                     [-(1.0 + alpha * p_k) * np.exp(-x_k), -alpha]])


def drtl_transition_M(x_k: float, xt_prev: float, pt_prev: float,
                      alpha: float, h: float, lam: float) -> np.ndarray:
    """Time-step transition matrix between two layers of the lattice."""
    w = np.exp(x_k - xt_prev)
    return np.array([[1.0 - h * lam - h * h * (1.0 + alpha * pt_prev) * w,
                      -h * np.exp(x_k)],
                     [h * (1.0 + alpha * pt_prev) * np.exp(-xt_prev), 1.0]])


def zcr_residual_drtl(c: CanonicalState, ct: CanonicalState,
                      alpha: float, h: float, lam: float) -> float:
    """max_k || L~_k M_k - M_{k+1} L_k || for a drtl+ step in the exp-additive chart."""
    x, p = c.x, c.p
    xt, pt = ct.x, ct.p
    n = c.n
    res = 0.0
    if c.boundary is Boundary.PERIODIC:
        ks = range(n)
    else:
        ks = range(1, n - 1)   # M_k needs layer data at k-1, M_{k+1} at k+1
    for k in ks:
        km = (k - 1) % n
        kp = (k + 1) % n
        Lk = drtl_transition_L(x[k], p[k], alpha, lam)
        Ltk = drtl_transition_L(xt[k], pt[k], alpha, lam)
        Mk = drtl_transition_M(x[k], xt[km], pt[km], alpha, h, lam)
        Mkp = drtl_transition_M(x[kp], xt[k], pt[k], alpha, h, lam)
        res = max(res, float(np.max(np.abs(Ltk @ Mk - Mkp @ Lk))))
    return res
