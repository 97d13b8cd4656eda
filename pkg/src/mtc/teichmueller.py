"""Penner lambda lengths, the Ptolemy flip, and Fock coordinates.

Real-valued throughout.  An arc ``e`` with quadrilateral sides
``(a, b, c, d)`` (the labels a flip of ``e`` reports) has Fock coordinate
``l_a - l_b + l_c - l_d``.  Since ``exp(F_e / 2) = lam_a lam_c / (lam_b lam_d)``
is the cluster monomial ``prod_j x_j^bbar(j, e)`` at ``x = lam``, it is
``exp(F / 2)`` that mutates exactly like a y-seed; ``exp(F)`` is its square
and does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Hashable, Mapping

from .surface import Triangulation, flip, require_valid


@dataclass(frozen=True)
class PennerPoint:
    lengths: Mapping[Hashable, float]

    def __post_init__(self):
        lengths = {e: float(v) for e, v in dict(self.lengths).items()}
        bad = [e for e, v in lengths.items() if not math.isfinite(v)]
        if bad:
            raise ValueError(f"non-finite Penner coordinate on arc {bad[0]!r}")
        object.__setattr__(self, "lengths", lengths)

    def __getitem__(self, e):
        return self.lengths[e]


@dataclass(frozen=True)
class FockPoint:
    coords: Mapping[Hashable, float]

    def __getitem__(self, e):
        return self.coords[e]

    def loop_sums(self, t: Triangulation) -> dict:
        return {m: math.fsum(self.coords[e] for e in loop) for m, loop in t.puncture_loops.items()}


def lambda_of(p: PennerPoint) -> dict:
    return {e: math.sqrt(2.0) * math.exp(l / 2) for e, l in p.lengths.items()}


def length_of_lambda(lam: float) -> float:
    if not lam > 0:
        raise ValueError(f"lambda length must be positive, got {lam}")
    return 2 * math.log(lam / math.sqrt(2.0))


def quadrilateral(t: Triangulation, e: Hashable) -> tuple:
    """Sides ``(a, b, c, d)`` around ``e``: triangles ``(e, a, b)`` and ``(e, c, d)``."""
    (i1, p1), (i2, p2) = t.slots(e)
    t1 = t.triangles[i1][p1:] + t.triangles[i1][:p1]
    t2 = t.triangles[i2][p2:] + t.triangles[i2][:p2]
    return t1[1], t1[2], t2[1], t2[2]


def ptolemy_flip(p: PennerPoint, t: Triangulation, e: Hashable) -> tuple[PennerPoint, Triangulation]:
    """Flip ``e`` and update its length by ``lam_e lam_e' = lam_a lam_c + lam_b lam_d``."""
    t2, rec = flip(t, e)
    lam = lambda_of(p)
    new = (lam[rec.a] * lam[rec.c] + lam[rec.b] * lam[rec.d]) / lam[e]
    lengths = dict(p.lengths)
    lengths[rec.h_prime] = length_of_lambda(new)
    return PennerPoint(lengths), t2


def fock_of(p: PennerPoint, t: Triangulation) -> FockPoint:
    require_valid(t)
    l = p.lengths
    out = {}
    for e in t.arcs:
        a, b, c, d = quadrilateral(t, e)
        out[e] = l[a] - l[b] + l[c] - l[d]
    return FockPoint(out)


def shift_horocycles(p: PennerPoint, t: Triangulation, delta: Mapping[Hashable, float]) -> PennerPoint:
    """Move the horocycle at each puncture ``m``: every arc end there gains ``delta[m]``."""
    lengths = dict(p.lengths)
    for (e, m), count in t.endpoint_counts().items():
        lengths[e] += count * delta.get(m, 0.0)
    return PennerPoint(lengths)


def y_of(f: FockPoint) -> dict:
    """The y-seed ``exp(F_e / 2)`` attached to a Fock point."""
    return {e: math.exp(v / 2) for e, v in f.coords.items()}
