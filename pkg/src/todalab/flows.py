"""Continuous-time lattice flows and a reference RK4 integrator.

The three vector fields, in (a, b) variables:

    tl:    db_k = a_k - a_{k-1}
           da_k = a_k (b_{k+1} - b_k)

    rtl+:  db_k = (1 + alpha b_k)(a_k - a_{k-1})
           da_k = a_k (b_{k+1} - b_k + alpha a_{k+1} - alpha a_{k-1})

    rtl-:  db_k = a_k/(1 + alpha b_{k+1}) - a_{k-1}/(1 + alpha b_{k-1})
           da_k = a_k (b_{k+1}/(1 + alpha b_{k+1}) - b_k/(1 + alpha b_k))

Out-of-range couplings vanish on open chains; indices wrap on rings.
RK4 is deliberately non-geometric: it serves as an independent reference
for order-of-accuracy comparisons against the discrete maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FlaschkaState, shifted
from .errors import DomainError

_GUARD = 1e-13


@dataclass(frozen=True)
class Flow:
    kind: str  # "tl", "rtl+", "rtl-"
    alpha: float = 0.0


TL = Flow("tl")


def rtl_plus(alpha: float) -> Flow:
    return Flow("rtl+", alpha)


def rtl_minus(alpha: float) -> Flow:
    return Flow("rtl-", alpha)


def vector_field(flow: Flow, s: FlaschkaState):
    """Time derivatives (db, da) of the given flow at state s."""
    a, b, bc = s.a, s.b, s.boundary
    a_prev = shifted(a, -1, bc)
    b_next = shifted(b, +1, bc)
    if flow.kind == "tl":
        db = a - a_prev
        da = a * (b_next - b)
    elif flow.kind == "rtl+":
        al = flow.alpha
        a_next = shifted(a, +1, bc)
        db = (1.0 + al * b) * (a - a_prev)
        da = a * (b_next - b + al * (a_next - a_prev))
    elif flow.kind == "rtl-":
        al = flow.alpha
        denom = 1.0 + al * b
        if np.min(np.abs(denom)) < _GUARD:
            raise DomainError("1 + alpha*b_k vanishes")
        b_prev = shifted(b, -1, bc)
        db = a / (1.0 + al * b_next) - a_prev / (1.0 + al * b_prev)
        da = a * (b_next / (1.0 + al * b_next) - b / denom)
    else:
        raise ValueError(f"unknown flow kind {flow.kind!r}")
    return db, da


def rk4_step(flow: Flow, s: FlaschkaState, dt: float) -> FlaschkaState:
    def rhs(a, b):
        return vector_field(flow, FlaschkaState(a, b, s.boundary))

    a, b = s.a, s.b
    db1, da1 = rhs(a, b)
    db2, da2 = rhs(a + 0.5 * dt * da1, b + 0.5 * dt * db1)
    db3, da3 = rhs(a + 0.5 * dt * da2, b + 0.5 * dt * db2)
    db4, da4 = rhs(a + dt * da3, b + dt * db3)
    a_new = a + dt / 6.0 * (da1 + 2 * da2 + 2 * da3 + da4)
    b_new = b + dt / 6.0 * (db1 + 2 * db2 + 2 * db3 + db4)
    return FlaschkaState(a_new, b_new, s.boundary)


def rk4_trajectory(flow: Flow, s0: FlaschkaState, dt: float, steps: int):
    """All states s0, s1, ..., s_steps of the classical one-step RK4 scheme."""
    if dt == 0.0:
        raise ValueError("dt must be nonzero")
    if steps < 0:
        raise ValueError("steps must be >= 0")
    out = [s0]
    s = s0
    for _ in range(steps):
        s = rk4_step(flow, s, dt)
        out.append(s)
    return out
