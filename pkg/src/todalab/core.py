"""State types, boundary conventions, indexing and serialization.

Two coordinate charts are used throughout:

* ``FlaschkaState``: variables (a_k, b_k), k = 1..n, where a_k couples site k
  to site k+1 and b_k sits on site k.  Open-end chains carry a structural
  a_n = 0 so that both boundary modes store vectors of equal length.
* ``CanonicalState``: conjugate pairs (x_k, p_k).  For open-end chains the
  missing neighbours are treated as x_0 = +inf, x_{n+1} = -inf, i.e. every
  exponential coupling to them is zero.

All arrays are float64 and frozen after construction; operations never
mutate a state.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError


class Boundary(Enum):
    OPEN = "open"
    PERIODIC = "periodic"


def _frozen_vector(v, name: str) -> np.ndarray:
    arr = np.array(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FlaschkaState:
    a: np.ndarray
    b: np.ndarray
    boundary: Boundary

    def __post_init__(self):
        a = _frozen_vector(self.a, "a")
        b = _frozen_vector(self.b, "b")
        if len(a) != len(b):
            raise ValueError("a and b must have equal length")
        if len(a) < 2:
            raise ValueError("lattice size must be >= 2")
        if self.boundary is Boundary.OPEN and a[-1] != 0.0:
            raise ValueError("open-end states require a[n] == 0 exactly")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return len(self.a)

    def replace(self, a=None, b=None) -> "FlaschkaState":
        return FlaschkaState(self.a if a is None else a,
                             self.b if b is None else b,
                             self.boundary)


@dataclass(frozen=True, eq=False)
class CanonicalState:
    x: np.ndarray
    p: np.ndarray
    boundary: Boundary

    def __post_init__(self):
        x = _frozen_vector(self.x, "x")
        p = _frozen_vector(self.p, "p")
        if len(x) != len(p):
            raise ValueError("x and p must have equal length")
        if len(x) < 2:
            raise ValueError("lattice size must be >= 2")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return len(self.x)


def neighbor_index(k: int, offset: int, n: int, boundary: Boundary):
    """1-based site index shifted by ``offset``; None outside an open chain."""
    if not 1 <= k <= n:
        raise ValueError("site index out of range")
    if boundary is Boundary.PERIODIC:
        return (k + offset - 1) % n + 1
    j = k + offset
    return j if 1 <= j <= n else None


def shifted(v: np.ndarray, offset: int, boundary: Boundary, fill: float = 0.0) -> np.ndarray:
    """Vector of neighbour values v_{k+offset}; out-of-range entries -> fill."""
    if boundary is Boundary.PERIODIC:
        return np.roll(v, -offset)
    if offset >= 0:
        return np.concatenate([v[offset:], np.full(offset, fill)])
    return np.concatenate([np.full(-offset, fill), v[:offset]])


def random_state(n: int, boundary: Boundary, seed: int,
                 a_range=(0.1, 2.0), b_range=(-1.0, 1.0)) -> FlaschkaState:
    """Deterministic random state; a_k stays positive so log/exp charts apply."""
    if n < 2:
        raise ValueError("lattice size must be >= 2")
    if a_range[0] <= 0.0:
        raise DomainError("interior couplings a_k must stay away from 0")
    rng = np.random.default_rng(seed)
    a = rng.uniform(a_range[0], a_range[1], n)
    b = rng.uniform(b_range[0], b_range[1], n)
    if boundary is Boundary.OPEN:
        a[-1] = 0.0
    return FlaschkaState(a, b, boundary)


def random_canonical(n: int, boundary: Boundary, seed: int,
                     x_range=(-1.0, 1.0), p_range=(-1.0, 1.0),
                     increasing: bool = False, gap_range=(0.6, 1.4)) -> CanonicalState:
    """Deterministic random canonical state.

    ``increasing`` draws x with positive gaps (needed by the rational and
    hyperbolic charts, whose domain is an ordered configuration).
    """
    rng = np.random.default_rng(seed)
    if increasing:
        gaps = rng.uniform(gap_range[0], gap_range[1], n - 1)
        x = np.concatenate([[rng.uniform(*x_range)], gaps]).cumsum()
    else:
        x = rng.uniform(x_range[0], x_range[1], n)
    p = rng.uniform(p_range[0], p_range[1], n)
    return CanonicalState(x, p, boundary)


# ---------------------------------------------------------------------------
# serialization: 17 significant digits round-trips float64 exactly
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _vec_json(v: np.ndarray) -> str:
    return "[" + ", ".join(_fmt(x) for x in v) + "]"


def state_to_json(state) -> str:
    kind = ("a", "b") if isinstance(state, FlaschkaState) else ("x", "p")
    first = state.a if isinstance(state, FlaschkaState) else state.x
    second = state.b if isinstance(state, FlaschkaState) else state.p
    return ("{" + f'"n": {state.n}, "boundary": "{state.boundary.value}", '
            + f'"{kind[0]}": {_vec_json(first)}, "{kind[1]}": {_vec_json(second)}' + "}")


def state_from_json(text: str):
    obj = json.loads(text)
    boundary = Boundary(obj["boundary"])
    if "a" in obj:
        state = FlaschkaState(obj["a"], obj["b"], boundary)
    else:
        state = CanonicalState(obj["x"], obj["p"], boundary)
    if state.n != obj["n"]:
        raise ValueError("declared size does not match vector length")
    return state


def save_state(state, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(state_to_json(state) + "\n")


def load_state(path):
    with open(path, "r", encoding="utf-8") as fh:
        return state_from_json(fh.read())
