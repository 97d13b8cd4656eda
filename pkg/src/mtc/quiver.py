"""Quivers, quiver mutation, and the cluster x/y mutation recurrences.

A quiver without loops or oriented 2-cycles is stored as its exchange
matrix ``bbar``: ``bbar[i, j]`` is the number of arrows ``i -> j`` minus the
number of arrows ``j -> i``.  The arrow count ``Q(i, j)`` is recovered as
``max(bbar[i, j], 0)``.

The state updates only use ``+``, ``*``, ``/`` and ``abs``, so any field
scalar works: ``complex`` in production, :class:`fractions.Fraction` in tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Hashable, Iterable, Mapping, Sequence

import numpy as np

DEFAULT_TOL = 1e-12


class MutationError(ValueError):
    """Raised when a mutation is undefined at some step."""

    def __init__(self, message: str, step: int | None = None, vertex: Hashable = None):
        self.reason = message
        self.step = step
        self.vertex = vertex
        if step is not None:
            message = f"{message} (step {step}, vertex {vertex!r})"
        super().__init__(message)


class UndefinedMutation(MutationError):
    """``1 + y_k`` vanished, so the y-mutation at ``k`` has a pole."""


def ipow(x: Any, n: int) -> Any:
    """Integer power by repeated multiplication (no complex logarithms)."""
    if n == 0:
        return x * 0 + 1
    base = x if n > 0 else 1 / x
    out = base
    for _ in range(abs(n) - 1):
        out = out * base
    return out


@dataclass(frozen=True, eq=False)
class Quiver:
    vertices: tuple
    bbar: np.ndarray

    def __post_init__(self):
        verts = tuple(self.vertices)
        b = np.array(self.bbar, dtype=np.int64)
        if b.shape != (len(verts), len(verts)):
            raise ValueError(f"bbar has shape {b.shape}, expected {(len(verts),) * 2}")
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertex labels")
        if not np.array_equal(b, -b.T):
            raise ValueError("bbar is not skew-symmetric")
        b.setflags(write=False)
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "bbar", b)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(verts)})

    def index(self, v: Hashable) -> int:
        try:
            return self._index[v]
        except KeyError:
            raise KeyError(f"unknown vertex {v!r}") from None

    def Q(self, i: Hashable, j: Hashable) -> int:
        """Number of arrows from ``i`` to ``j``."""
        return max(int(self.bbar[self.index(i), self.index(j)]), 0)

    def B(self, i: Hashable, j: Hashable) -> int:
        return int(self.bbar[self.index(i), self.index(j)])

    def __eq__(self, other):
        if not isinstance(other, Quiver):
            return NotImplemented
        return self.vertices == other.vertices and np.array_equal(self.bbar, other.bbar)

    def __hash__(self):
        return hash((self.vertices, self.bbar.tobytes()))

    def relabel(self, mapping: Mapping) -> "Quiver":
        """Rename vertex ``v`` to ``mapping[v]`` and reorder to the old vertex order."""
        new_names = [mapping[v] for v in self.vertices]
        pos = {name: i for i, name in enumerate(new_names)}
        order = [pos[v] for v in self.vertices]
        return Quiver(self.vertices, self.bbar[np.ix_(order, order)])

    def __repr__(self):
        return f"Quiver(vertices={self.vertices!r}, bbar={self.bbar.tolist()!r})"


@dataclass(frozen=True)
class YState:
    values: Mapping[Hashable, Any]
    time: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, v):
        return self.values[v]

    def as_list(self, order: Iterable[Hashable]) -> list:
        return [self.values[v] for v in order]


@dataclass(frozen=True)
class XState:
    values: Mapping[Hashable, Any]
    time: int = 0

    def __post_init__(self):
        object.__setattr__(self, "values", dict(self.values))

    def __getitem__(self, v):
        return self.values[v]


def mutate_quiver(q: Quiver, k: Hashable) -> Quiver:
    kk = q.index(k)
    b = q.bbar
    pos = np.maximum(b, 0)
    # Q(i,k)Q(k,j) - Q(j,k)Q(k,i)
    through = np.outer(pos[:, kk], pos[kk, :])
    out = b + through - through.T
    out[kk, :] = -b[kk, :]
    out[:, kk] = -b[:, kk]
    return Quiver(q.vertices, out)


def mutate_y(q: Quiver, s: YState, k: Hashable, tol: float = DEFAULT_TOL) -> YState:
    kk = q.index(k)
    yk = s.values[k]
    one_plus = 1 + yk
    if abs(one_plus) <= tol:
        raise UndefinedMutation("1 + y_k vanishes", step=s.time, vertex=k)
    if abs(yk) <= tol:
        raise UndefinedMutation("y_k vanishes", step=s.time, vertex=k)
    out = {}
    for i, v in enumerate(q.vertices):
        yi = s.values[v]
        if i == kk:
            out[v] = 1 / yk
            continue
        val = yi
        qki = max(int(q.bbar[kk, i]), 0)
        if qki:
            val = val * ipow(yk, qki)
        bik = int(q.bbar[i, kk])
        if bik:
            val = val * ipow(one_plus, bik)
        out[v] = val
    return YState(out, s.time + 1)


def mutate_x(q: Quiver, s: XState, k: Hashable, tol: float = DEFAULT_TOL) -> XState:
    kk = q.index(k)
    xk = s.values[k]
    if abs(xk) <= tol:
        raise MutationError("x_k vanishes", step=s.time, vertex=k)
    out_prod = 1
    in_prod = 1
    for j, v in enumerate(q.vertices):
        b = int(q.bbar[kk, j])
        if b > 0:
            out_prod = out_prod * ipow(s.values[v], b)
        elif b < 0:
            in_prod = in_prod * ipow(s.values[v], -b)
    values = dict(s.values)
    values[k] = (out_prod + in_prod) / xk
    return XState(values, s.time + 1)


def apply_sequence(
    q0: Quiver, y0: YState, ks: Sequence[Hashable], tol: float = DEFAULT_TOL
) -> tuple[list[Quiver], list[YState]]:
    """Mutate quiver and y-state in lockstep along ``ks``.

    Returns ``([Q_0, ..., Q_l], [y(0), ..., y(l)])``.
    """
    quivers = [q0]
    states = [y0]
    q, s = q0, y0
    for k in ks:
        s = mutate_y(q, s, k, tol=tol)
        q = mutate_quiver(q, k)
        quivers.append(q)
        states.append(s)
    return quivers, states


def apply_x_sequence(q0: Quiver, x0: XState, ks: Sequence[Hashable], tol: float = DEFAULT_TOL):
    quivers = [q0]
    states = [x0]
    q, s = q0, x0
    for k in ks:
        s = mutate_x(q, s, k, tol=tol)
        q = mutate_quiver(q, k)
        quivers.append(q)
        states.append(s)
    return quivers, states
