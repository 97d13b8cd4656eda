"""Ideal triangulations of punctured surfaces.

A triangulation is a list of triangles, each a triple of arc labels read
clockwise.  Every arc fills exactly two triangle sides; the two sides are
glued with opposite orientations, so the triples alone determine the
oriented surface.  Puncture loops are given explicitly and checked against
the corner cycles derived from the triples.

Orientation convention: if side ``i`` follows side ``j`` clockwise in a
triangle, that triangle contributes an arrow ``i -> j``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

from .quiver import Quiver, YState


class TriangulationError(ValueError):
    pass


class SelfFoldedError(TriangulationError):
    pass


@dataclass(frozen=True)
class Triangulation:
    arcs: tuple
    triangles: tuple
    puncture_loops: Mapping[Hashable, tuple]

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(self.arcs))
        object.__setattr__(self, "triangles", tuple(tuple(t) for t in self.triangles))
        object.__setattr__(
            self, "puncture_loops", {m: tuple(loop) for m, loop in dict(self.puncture_loops).items()}
        )

    @property
    def punctures(self) -> tuple:
        return tuple(self.puncture_loops)

    def arc_index(self, e: Hashable) -> int:
        return self.arcs.index(e)

    def slots(self, e: Hashable) -> list[tuple[int, int]]:
        """``(triangle index, position)`` pairs where arc ``e`` is a side."""
        return [(i, p) for i, tri in enumerate(self.triangles) for p in range(3) if tri[p] == e]

    def relabel(self, mapping: Mapping) -> "Triangulation":
        return Triangulation(
            self.arcs,
            [tuple(mapping[e] for e in tri) for tri in self.triangles],
            {m: tuple(mapping[e] for e in loop) for m, loop in self.puncture_loops.items()},
        )

    def triangle_multiset(self) -> Counter:
        """Triangles up to cyclic rotation, as a multiset."""
        pos = {e: i for i, e in enumerate(self.arcs)}
        out = Counter()
        for tri in self.triangles:
            rots = [tri[r:] + tri[:r] for r in range(3)]
            out[min(rots, key=lambda t: [pos[e] for e in t])] += 1
        return out

    def endpoint_counts(self) -> dict:
        """``{(arc, puncture): number of ends of arc at puncture}``."""
        out: Counter = Counter()
        for m, loop in self.puncture_loops.items():
            for e in loop:
                out[(e, m)] += 1
        return dict(out)


@dataclass(frozen=True)
class FlipRecord:
    h: Hashable
    h_prime: Hashable
    a: Hashable
    b: Hashable
    c: Hashable
    d: Hashable

    @property
    def sides(self) -> tuple:
        return (self.a, self.b, self.c, self.d)


def corner_cycles(tris: Sequence[Sequence]) -> list[list[tuple[int, int]]]:
    """Group triangle corners into vertex classes.

    Corner ``(i, p)`` sits between side ``p`` and side ``p + 1`` of triangle
    ``i``.  Walking across side ``p + 1`` lands in the corner of the
    neighbouring triangle that starts with that side.  Assumes each label
    fills exactly two sides.
    """
    where: dict = {}
    for i, tri in enumerate(tris):
        for p in range(3):
            where.setdefault(tri[p], []).append((i, p))
    seen = set()
    cycles = []
    for i in range(len(tris)):
        for p in range(3):
            if (i, p) in seen:
                continue
            cyc = []
            c = (i, p)
            while c not in seen:
                seen.add(c)
                cyc.append(c)
                ti, pp = c
                side = (ti, (pp + 1) % 3)
                a, b = where[tris[ti][side[1]]]
                c = b if a == side else a
            cycles.append(cyc)
    return cycles


def _cycle_labels(tris, cyc) -> tuple:
    return tuple(tris[i][(p + 1) % 3] for i, p in cyc)


def same_cycle(u: Sequence, v: Sequence) -> bool:
    """Cyclic sequences equal up to rotation and reversal."""
    u, v = tuple(u), tuple(v)
    if len(u) != len(v):
        return False
    if not u:
        return True
    doubled = v + v
    rev = tuple(reversed(v))
    doubled_rev = rev + rev
    n = len(u)
    return any(doubled[r:r + n] == u or doubled_rev[r:r + n] == u for r in range(n))


def validate(t: Triangulation) -> list[str]:
    """Return the list of violated invariants (empty when valid)."""
    problems = []
    if len(set(t.arcs)) != len(t.arcs):
        dup = [e for e, k in Counter(t.arcs).items() if k > 1]
        problems.append(f"duplicate arc labels: {dup}")
    if len(set(t.puncture_loops)) != len(t.puncture_loops):
        problems.append("duplicate puncture labels")
    known = set(t.arcs)
    for tri in t.triangles:
        if len(tri) != 3:
            problems.append(f"triangle {tri} does not have three sides")
            continue
        for e in tri:
            if e not in known:
                problems.append(f"triangle {tri} uses unknown arc {e!r}")
        if len(set(tri)) != 3:
            problems.append(f"self-folded triangle {tri}")
    for m, loop in t.puncture_loops.items():
        for e in loop:
            if e not in known:
                problems.append(f"puncture {m!r} loop uses unknown arc {e!r}")
    if problems:
        return problems

    counts = Counter(e for tri in t.triangles for e in tri)
    for e in t.arcs:
        if counts[e] != 2:
            problems.append(f"arc {e!r} fills {counts[e]} triangle sides, expected 2")
    if problems:
        return problems

    corners = sum(len(loop) for loop in t.puncture_loops.values())
    if corners != 3 * len(t.triangles):
        problems.append(
            f"puncture loops have {corners} corners, expected {3 * len(t.triangles)}"
        )

    # consecutive loop arcs must be two sides of a common triangle
    pairs = set()
    for tri in t.triangles:
        for p in range(3):
            pairs.add(frozenset((tri[p], tri[(p + 1) % 3])))
    for m, loop in t.puncture_loops.items():
        for i in range(len(loop)):
            pair = frozenset((loop[i], loop[(i + 1) % len(loop)]))
            if pair not in pairs:
                problems.append(
                    f"puncture {m!r}: arcs {loop[i]!r}, {loop[(i + 1) % len(loop)]!r} "
                    "are not two sides of a triangle"
                )
    if problems:
        return problems

    derived = [_cycle_labels(t.triangles, c) for c in corner_cycles(t.triangles)]
    if _match_loops(t.puncture_loops, derived) is None:
        problems.append(
            "puncture loops do not match the corner cycles of the triangles "
            f"(derived: {[list(d) for d in derived]})"
        )
    return problems


def _match_loops(loops: Mapping, derived: Sequence[tuple]) -> dict | None:
    """Assign each derived corner cycle (by index) to a puncture label."""
    if len(loops) != len(derived):
        return None
    free = list(range(len(derived)))
    out = {}
    for m, loop in loops.items():
        hit = next((j for j in free if same_cycle(loop, derived[j])), None)
        if hit is None:
            return None
        free.remove(hit)
        out[hit] = m
    return out


def require_valid(t: Triangulation) -> None:
    problems = validate(t)
    if problems:
        raise TriangulationError("invalid triangulation: " + "; ".join(problems))


def quiver_of(t: Triangulation) -> Quiver:
    require_valid(t)
    idx = {e: i for i, e in enumerate(t.arcs)}
    b = np.zeros((len(t.arcs), len(t.arcs)), dtype=np.int64)
    for tri in t.triangles:
        for p in range(3):
            j, i = idx[tri[p]], idx[tri[(p + 1) % 3]]
            b[i, j] += 1
            b[j, i] -= 1
    return Quiver(t.arcs, b)


def _corner_punctures(t: Triangulation) -> dict:
    cycles = corner_cycles(t.triangles)
    derived = [_cycle_labels(t.triangles, c) for c in cycles]
    assignment = _match_loops(t.puncture_loops, derived)
    if assignment is None:
        raise TriangulationError("puncture loops do not match the corner cycles")
    return {corner: assignment[j] for j, cyc in enumerate(cycles) for corner in cyc}


def flip(t: Triangulation, e: Hashable, step: int | None = None) -> tuple[Triangulation, FlipRecord]:
    """Flip arc ``e``; the new diagonal keeps the label ``e``."""
    if e not in t.arcs:
        raise TriangulationError(f"unknown arc {e!r}")
    where = f" at step {step}" if step is not None else ""
    (i1, p1), (i2, p2) = t.slots(e)
    t1 = t.triangles[i1][p1:] + t.triangles[i1][:p1]
    t2 = t.triangles[i2][p2:] + t.triangles[i2][:p2]
    _, a, b = t1
    _, c, d = t2
    if b == c or d == a:
        raise SelfFoldedError(f"self-folded configuration{where}: flipping {e!r} folds a triangle")

    labels = _corner_punctures(t)
    # corner r of the rotated triangle is corner (p + r) % 3 of the stored one
    q_ = labels[(i1, p1)]
    r_ = labels[(i1, (p1 + 1) % 3)]
    p_ = labels[(i1, (p1 + 2) % 3)]
    l_ = labels[(i2, (p2 + 1) % 3)]

    tris = list(t.triangles)
    tris[i1] = (e, b, c)
    tris[i2] = (e, d, a)
    new_labels = {k: v for k, v in labels.items() if k[0] not in (i1, i2)}
    for r, m in enumerate((r_, p_, l_)):
        new_labels[(i1, r)] = m
    for r, m in enumerate((l_, q_, r_)):
        new_labels[(i2, r)] = m

    loops = {}
    for cyc in corner_cycles(tris):
        owners = {new_labels[c] for c in cyc}
        if len(owners) != 1:
            raise TriangulationError(f"flip of {e!r}{where} merged punctures {owners}")
        (m,) = owners
        seq = _cycle_labels(tris, cyc)
        old = t.puncture_loops[m]
        loops[m] = old if same_cycle(old, seq) else seq
    loops = {m: loops[m] for m in t.puncture_loops}
    return Triangulation(t.arcs, tris, loops), FlipRecord(e, e, a, b, c, d)


def flip_sequence(t: Triangulation, ks: Sequence[Hashable]):
    """Apply flips in order; returns (triangulations tau(0..l), records)."""
    snaps = [t]
    records = []
    for step, k in enumerate(ks):
        t, rec = flip(t, k, step=step)
        snaps.append(t)
        records.append(rec)
    return snaps, records


def puncture_monomial(t: Triangulation, m: Hashable, y) -> complex:
    values = y.values if isinstance(y, YState) else y
    out = 1
    for e in t.puncture_loops[m]:
        out = out * values[e]
    return out
