"""Compatible Poisson brackets on (b, a) and finite-difference verification.

Coordinates are ordered z = (b_1..b_n, a_1..a_n).  Six elementary bracket
families are provided; nonzero entries per site k (all others follow by
skew-symmetry, indices truncate on open chains and wrap on rings):

  tl1:   {b_k,a_k} = -a_k                {a_k,b_{k+1}} = -a_k
  tl2:   {b_k,a_k} = -b_k a_k            {a_k,b_{k+1}} = -a_k b_{k+1}
         {b_k,b_{k+1}} = -a_k            {a_k,a_{k+1}} = -a_k a_{k+1}
  tl3:   {b_k,a_k} = -a_k(b_k^2+a_k)     {a_k,b_{k+1}} = -a_k(b_{k+1}^2+a_k)
         {b_k,b_{k+1}} = -a_k(b_k+b_{k+1})
         {a_k,a_{k+1}} = -2 a_k a_{k+1} b_{k+1}
         {b_k,a_{k+1}} = -a_k a_{k+1}    {a_k,b_{k+2}} = -a_k a_{k+1}
  rtl1:  tl1 plus {b_k,b_{k+1}} = alpha a_k
  rtl2:  identical to tl2
  rtl3:  tl3 plus alpha-proportional corrections and {a_k,a_{k+2}} = -alpha a_k a_{k+1} a_{k+2}

Verification is finite-difference based throughout: a map Phi is a Poisson
map for Pi when J Pi(z) J^T = Pi(Phi(z)) with J the FD Jacobian.  On open
chains the structural coordinate a_n is frozen, so all FD sweeps run on the
reduced chart (b_1..b_n, a_1..a_{n-1}).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Boundary, FlaschkaState

_EPS3 = float(2.0 ** -52) ** (1.0 / 3.0)   # central-difference step factor


@dataclass(frozen=True)
class Bracket:
    kind: str            # "tl1","tl2","tl3","rtl1","rtl2","rtl3"
    alpha: float = 0.0


def combo(*terms):
    """Linear combination [(coef, Bracket), ...] usable wherever a Bracket is."""
    return tuple((float(c), br) for c, br in terms)


def bracket_matrix(kind, s: FlaschkaState) -> np.ndarray:
    """Poisson tensor Pi(z) in coordinates z = (b, a); exactly skew by fill."""
    if isinstance(kind, tuple):
        out = np.zeros((2 * s.n, 2 * s.n))
        for coef, br in kind:
            out += coef * bracket_matrix(br, s)
        return out

    a, b, n = s.a, s.b, s.n
    wrap = s.boundary is Boundary.PERIODIC
    al = kind.alpha
    P = np.zeros((2 * n, 2 * n))

    def put(i, j, val):
        P[i, j] += val
        P[j, i] -= val

    for k in range(n):
        k1 = (k + 1) % n
        k2 = (k + 2) % n
        has1 = wrap or k + 1 < n
        has2 = wrap or k + 2 < n
        B, A = k, n + k

        if kind.kind == "tl1":
            put(B, A, -a[k])
            if has1:
                put(A, k1, -a[k])
        elif kind.kind in ("tl2", "rtl2"):
            put(B, A, -b[k] * a[k])
            if has1:
                put(A, k1, -a[k] * b[k1])
                put(B, k1, -a[k])
                put(A, n + k1, -a[k] * a[k1])
        elif kind.kind == "tl3":
            put(B, A, -a[k] * (b[k] ** 2 + a[k]))
            if has1:
                put(A, k1, -a[k] * (b[k1] ** 2 + a[k]))
                put(B, k1, -a[k] * (b[k] + b[k1]))
                put(A, n + k1, -2.0 * a[k] * a[k1] * b[k1])
                put(B, n + k1, -a[k] * a[k1])
            if has2:
                put(A, k2, -a[k] * a[k1])
        elif kind.kind == "rtl1":
            put(B, A, -a[k])
            if has1:
                put(A, k1, -a[k])
                put(B, k1, al * a[k])
        elif kind.kind == "rtl3":
            put(B, A, -a[k] * (b[k] ** 2 + a[k]) - al * b[k] * a[k] ** 2)
            if has1:
                put(A, k1, -a[k] * (b[k1] ** 2 + a[k]) - al * a[k] ** 2 * b[k1])
                put(B, k1, -a[k] * (b[k] + b[k1]) - al * b[k] * a[k] * b[k1])
                put(A, n + k1, -2.0 * a[k] * b[k1] * a[k1] - al * a[k] * a[k1] * (a[k] + a[k1]))
                put(B, n + k1, -a[k] * a[k1] - al * b[k] * a[k] * a[k1])
            if has2:
                put(A, k2, -a[k] * a[k1] - al * a[k] * a[k1] * b[k2])
                put(A, n + k2, -al * a[k] * a[k1] * a[k2])
        else:
            raise ValueError(f"unknown bracket kind {kind.kind!r}")
    return P


# ---------------------------------------------------------------------------
# finite-difference machinery on the reduced chart
# ---------------------------------------------------------------------------

def _active(s: FlaschkaState):
    """z-indices that are genuine coordinates (a_n frozen on open chains)."""
    idx = list(range(2 * s.n))
    if s.boundary is Boundary.OPEN:
        idx.remove(2 * s.n - 1)
    return np.asarray(idx)


def _pack(s: FlaschkaState) -> np.ndarray:
    return np.concatenate([s.b, s.a])


def _unpack(z: np.ndarray, template: FlaschkaState) -> FlaschkaState:
    n = template.n
    return FlaschkaState(z[n:], z[:n], template.boundary)


def _fd_steps(z: np.ndarray, fd_step) -> np.ndarray:
    if fd_step is not None:
        return np.full(len(z), float(fd_step))
    return _EPS3 * np.maximum(1.0, np.abs(z))


def fd_jacobian(map_fn, s: FlaschkaState, fd_step=None):
    """Central FD Jacobian of a state map on the reduced chart."""
    act = _active(s)
    z0 = _pack(s)
    hvec = _fd_steps(z0, fd_step)
    cols = []
    for i in act:
        zp, zm = z0.copy(), z0.copy()
        zp[i] += hvec[i]
        zm[i] -= hvec[i]
        fp = _pack(map_fn(_unpack(zp, s)))[act]
        fm = _pack(map_fn(_unpack(zm, s)))[act]
        cols.append((fp - fm) / (2.0 * hvec[i]))
    return np.column_stack(cols)


def fd_gradient(fn, s: FlaschkaState, fd_step=None) -> np.ndarray:
    act = _active(s)
    z0 = _pack(s)
    hvec = _fd_steps(z0, fd_step)
    g = np.empty(len(act))
    for out_i, i in enumerate(act):
        zp, zm = z0.copy(), z0.copy()
        zp[i] += hvec[i]
        zm[i] -= hvec[i]
        g[out_i] = (fn(_unpack(zp, s)) - fn(_unpack(zm, s))) / (2.0 * hvec[i])
    return g


def poisson_map_residual(map_fn, kind, s: FlaschkaState, fd_step=None) -> float:
    """|| J Pi J^T - Pi(map(s)) ||_inf on the reduced chart."""
    act = _active(s)
    J = fd_jacobian(map_fn, s, fd_step)
    P0 = bracket_matrix(kind, s)[np.ix_(act, act)]
    P1 = bracket_matrix(kind, map_fn(s))[np.ix_(act, act)]
    return float(np.max(np.abs(J @ P0 @ J.T - P1)))


def involution_residual(kind, s: FlaschkaState, f, g, fd_step=None) -> float:
    """|grad f . Pi . grad g| with FD gradients; scale-free residual."""
    act = _active(s)
    gf = fd_gradient(f, s, fd_step)
    gg = fd_gradient(g, s, fd_step)
    P = bracket_matrix(kind, s)[np.ix_(act, act)]
    scale = max(1.0, float(np.linalg.norm(gf) * np.linalg.norm(P, np.inf) * np.linalg.norm(gg)))
    return float(abs(gf @ P @ gg)) / scale


def jacobi_residual(kind, s: FlaschkaState, fd_step=None) -> float:
    """Max cyclic-sum defect of the Jacobi identity, FD derivatives of Pi."""
    act = _active(s)
    z0 = _pack(s)
    hvec = _fd_steps(z0, fd_step)
    m = len(act)
    P = bracket_matrix(kind, s)[np.ix_(act, act)]
    dP = np.empty((m, m, m))   # dP[m_,i,j] = d Pi_ij / d z_m
    for out_m, i in enumerate(act):
        zp, zm = z0.copy(), z0.copy()
        zp[i] += hvec[i]
        zm[i] -= hvec[i]
        Pp = bracket_matrix(kind, _unpack(zp, s))[np.ix_(act, act)]
        Pm = bracket_matrix(kind, _unpack(zm, s))[np.ix_(act, act)]
        dP[out_m] = (Pp - Pm) / (2.0 * hvec[i])
    # sum_m (dPi_ij/dz_m Pi_mk + dPi_jk/dz_m Pi_mi + dPi_ki/dz_m Pi_mj)
    t1 = np.einsum("mij,mk->ijk", dP, P)
    jac = t1 + np.transpose(t1, (1, 2, 0)) + np.transpose(t1, (2, 0, 1))
    scale = max(1.0, float(np.max(np.abs(P))) ** 2)
    return float(np.max(np.abs(jac))) / scale


def realization_residual(spec, c, fd_step=None) -> float:
    """Push-forward defect of a canonical chart against its target bracket.

    Dphi J_can Dphi^T is compared with Pi(phi(c)), Dphi the FD Jacobian of
    the chart (x,p) -> (b,a) and J_can the canonical tensor on (x,p).
    """
    from .realizations import flaschka_of   # cycle-free: realizations never imports poisson

    n = c.n
    w0 = np.concatenate([c.x, c.p])
    hvec = _fd_steps(w0, fd_step)
    cols = []
    CanonicalState = type(c)
    for i in range(2 * n):
        wp, wm = w0.copy(), w0.copy()
        wp[i] += hvec[i]
        wm[i] -= hvec[i]
        sp = flaschka_of(spec, CanonicalState(wp[:n], wp[n:], c.boundary))
        sm = flaschka_of(spec, CanonicalState(wm[:n], wm[n:], c.boundary))
        cols.append((_pack(sp) - _pack(sm)) / (2.0 * hvec[i]))
    D = np.column_stack(cols)
    # canonical tensor oriented so that flows read f' = {H, f}: {p_k, x_k} = +1
    Jcan = np.block([[np.zeros((n, n)), -np.eye(n)], [np.eye(n), np.zeros((n, n))]])
    target = bracket_matrix(spec.bracket, flaschka_of(spec, c))
    return float(np.max(np.abs(D @ Jcan @ D.T - target)))
