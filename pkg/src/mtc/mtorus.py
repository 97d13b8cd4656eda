"""Mapping-torus combinatorics: layering tetrahedra along a flip sequence.

Time runs over the integers with period ``l`` (the number of flips).  Arc
labels at time ``l`` of one period are renamed through ``sigma`` to become
the labels at time 0 of the next.
"""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass
from math import gcd
from typing import Hashable, Mapping, NamedTuple, Sequence

from .quiver import DEFAULT_TOL, MutationError, YState, apply_sequence
from .surface import FlipRecord, Triangulation, flip_sequence, quiver_of, require_valid


class PeriodicityError(ValueError):
    pass


class LayeringError(ValueError):
    pass


@dataclass(frozen=True)
class MappingClassPresentation:
    base: Triangulation
    flips: tuple
    sigma: Mapping[Hashable, Hashable]

    def __post_init__(self):
        object.__setattr__(self, "flips", tuple(self.flips))
        object.__setattr__(self, "sigma", dict(self.sigma))

    @property
    def length(self) -> int:
        return len(self.flips)

    @property
    def arcs(self) -> tuple:
        return self.base.arcs


class Kind(enum.Enum):
    END_CREATE = "end_create"
    END_DESTROY = "end_destroy"
    ADJ_PLUS = "adj_plus"
    ADJ_MINUS = "adj_minus"
    ADJ_PLUS2 = "adj_plus2"
    ADJ_MINUS2 = "adj_minus2"


_ADJ_KIND = {1: Kind.ADJ_PLUS, -1: Kind.ADJ_MINUS, 2: Kind.ADJ_PLUS2, -2: Kind.ADJ_MINUS2}


@dataclass(frozen=True)
class Tetrahedron:
    t: int
    record: FlipRecord


@dataclass(frozen=True)
class Layering:
    presentation: MappingClassPresentation
    tetrahedra: tuple
    triangulations: tuple  # tau(0), ..., tau(l)
    quivers: tuple  # Q_0, ..., Q_l


@dataclass(frozen=True)
class EdgeClass:
    t_create: int
    t_destroy: int
    trace: tuple  # label carrying the edge at times t_create + 1 .. t_destroy

    def label_at(self, t: int) -> Hashable:
        return self.trace[t - self.t_create - 1]


class Contribution(NamedTuple):
    time: int  # on the universal time line
    kind: Kind
    arc: Hashable  # the edge's label in tau(time)


@dataclass(frozen=True)
class GluingEquation:
    edge: EdgeClass
    contributions: tuple
    period: int

    def cyclic(self) -> list[tuple[int, Kind]]:
        """Contributions as ``(t mod l, kind)`` pairs."""
        return [(c.time % self.period, c.kind) for c in self.contributions]


@dataclass(frozen=True)
class CuspRelation:
    puncture: Hashable
    loop: tuple
    exponents: Mapping[Hashable, int]

    @property
    def multiplicity(self) -> int:
        return gcd(*self.exponents.values()) if self.exponents else 1

    def reduced(self) -> dict:
        g = self.multiplicity
        return {e: k // g for e, k in self.exponents.items()}


def check_sigma(p: MappingClassPresentation) -> str | None:
    arcs = set(p.arcs)
    if set(p.sigma) != arcs or set(p.sigma.values()) != arcs:
        return f"relabeling {p.sigma} is not a permutation of the arcs {sorted(arcs, key=str)}"
    return None


def check_periodicity(p: MappingClassPresentation) -> tuple[bool, str]:
    require_valid(p.base)
    bad = check_sigma(p)
    if bad:
        return False, bad
    snaps, _ = flip_sequence(p.base, p.flips)
    final = snaps[-1].relabel(p.sigma)
    q0 = quiver_of(p.base)
    ql = quiver_of(final)
    if q0 != ql:
        return False, (
            "quiver after flips and relabeling differs from the base quiver: "
            f"{ql.bbar.tolist()} != {q0.bbar.tolist()}"
        )
    if final.triangle_multiset() != p.base.triangle_multiset():
        return False, "triangles after flips and relabeling differ from the base triangles"
    return True, "quiver and triangles return to the base after relabeling"


def layer(p: MappingClassPresentation) -> Layering:
    ok, why = check_periodicity(p)
    if not ok:
        raise PeriodicityError(why)
    snaps, records = flip_sequence(p.base, p.flips)
    quivers = [quiver_of(s) for s in snaps]
    tets = tuple(Tetrahedron(t, rec) for t, rec in enumerate(records))
    return Layering(p, tets, tuple(snaps), tuple(quivers))


def edge_lifecycles(p: MappingClassPresentation, layering: Layering | None = None) -> list[EdgeClass]:
    l = p.length
    limit = l * len(p.arcs)
    out = []
    for t0 in range(l):
        label = p.flips[t0]
        trace = []
        s = t0 + 1
        while True:
            if s - t0 > limit:
                raise LayeringError(
                    f"edge created at t={t0} never destroyed: layering does not close "
                    "into a tetrahedron decomposition"
                )
            r = s % l
            if r == 0:
                label = p.sigma[label]
            trace.append(label)
            if p.flips[r] == label:
                break
            s += 1
        out.append(EdgeClass(t0, s, tuple(trace)))
    return out


def _share_triangle(t: Triangulation, x: Hashable, y: Hashable) -> bool:
    return any(x in tri and y in tri for tri in t.triangles)


def gluing_equations(
    p: MappingClassPresentation, lifecycles: Sequence[EdgeClass], layering: Layering | None = None
) -> list[GluingEquation]:
    layering = layering or layer(p)
    l = p.length
    out = []
    for edge in lifecycles:
        contribs = [Contribution(edge.t_create, Kind.END_CREATE, p.flips[edge.t_create % l])]
        for s in range(edge.t_create + 1, edge.t_destroy):
            r = s % l
            g0 = edge.label_at(s)
            k = p.flips[r]
            q = layering.quivers[r]
            v = q.B(k, g0)
            if v == 0:
                if _share_triangle(layering.triangulations[r], k, g0):
                    raise LayeringError(
                        f"arcs {k!r} and {g0!r} share a triangle at t={s} but have no arrows "
                        "(self-folded configuration)"
                    )
                continue
            if v not in _ADJ_KIND:
                raise LayeringError(f"unexpected exchange entry {v} between {k!r} and {g0!r} at t={s}")
            contribs.append(Contribution(s, _ADJ_KIND[v], g0))
        contribs.append(Contribution(edge.t_destroy, Kind.END_DESTROY, edge.label_at(edge.t_destroy)))
        out.append(GluingEquation(edge, tuple(contribs), l))
    return out


def cusp_relations(p: MappingClassPresentation) -> list[CuspRelation]:
    require_valid(p.base)
    return [
        CuspRelation(m, loop, dict(Counter(loop)))
        for m, loop in p.base.puncture_loops.items()
    ]


def universal_trajectory(
    p: MappingClassPresentation,
    y0: YState | Mapping,
    periods: int,
    layering: Layering | None = None,
    tol: float = DEFAULT_TOL,
) -> list[YState]:
    """y-states at universal times ``0 .. periods * l``.

    The state at time ``s`` is expressed in the labels of ``tau(s mod l)``;
    at multiples of ``l`` the relabeled start of the next period is used.
    No periodicity of the values is assumed.
    """
    layering = layering or layer(p)
    q0 = layering.quivers[0]
    state = y0 if isinstance(y0, YState) else YState(y0, 0)
    out = [state]
    l = p.length
    for period in range(periods):
        start = YState(state.values, 0)
        try:
            _, states = apply_sequence(q0, start, p.flips, tol=tol)
        except MutationError as exc:
            raise type(exc)(exc.reason, step=exc.step + period * l, vertex=exc.vertex) from None
        for s in states[1:-1]:
            out.append(YState(s.values, s.time + period * l))
        end = states[-1]
        state = YState({p.sigma[h]: v for h, v in end.values.items()}, (period + 1) * l)
        out.append(state)
    return out
