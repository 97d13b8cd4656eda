"""Shape parameters from y-variables, gluing products, and volume."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .mtorus import (
    GluingEquation,
    Kind,
    Layering,
    MappingClassPresentation,
    layer,
    universal_trajectory,
)
from .quiver import DEFAULT_TOL, YState, apply_sequence

DEGENERACY_TOL = 1e-9


class DegenerateTetrahedron(ValueError):
    pass


@dataclass(frozen=True)
class ShapeAssignment:
    z: tuple

    def __len__(self):
        return len(self.z)

    def __getitem__(self, t):
        return self.z[t]

    def nondegenerate(self, tol: float = DEGENERACY_TOL) -> bool:
        return all(abs(z) > tol and abs(z - 1) > tol for z in self.z)

    def positive(self, tol: float = DEGENERACY_TOL) -> bool:
        return all(z.imag > tol for z in self.z)


def shapes(
    p: MappingClassPresentation,
    y0,
    layering: Layering | None = None,
    tol: float = DEFAULT_TOL,
) -> ShapeAssignment:
    """``Z(t) = -y_{e(t)}(t)`` along the trajectory started at ``y0``."""
    layering = layering or layer(p)
    start = y0 if isinstance(y0, YState) else YState(y0, 0)
    _, states = apply_sequence(layering.quivers[0], start, p.flips, tol=tol)
    out = []
    for t, k in enumerate(p.flips):
        before = -states[t][k]
        after = -1 / states[t + 1][k]
        if abs(before - after) > 1e-10 * max(abs(before), 1e-300):
            raise ArithmeticError(f"shape extraction disagrees at t={t}: {before} vs {after}")
        out.append(complex(before))
    return ShapeAssignment(tuple(out))


def companions(z: complex, tol: float = DEGENERACY_TOL) -> tuple[complex, complex, complex]:
    """The three edge moduli ``(z, 1 - 1/z, 1/(1 - z))`` of an ideal tetrahedron."""
    if abs(z) <= tol or abs(z - 1) <= tol:
        raise DegenerateTetrahedron(f"degenerate shape parameter {z}")
    return z, 1 - 1 / z, 1 / (1 - z)


def _factor(kind: Kind, z: complex) -> complex:
    if kind in (Kind.END_CREATE, Kind.END_DESTROY):
        return z
    if kind is Kind.ADJ_PLUS:
        return 1 - 1 / z
    if kind is Kind.ADJ_MINUS:
        return 1 / (1 - z)
    if kind is Kind.ADJ_PLUS2:
        return (1 - 1 / z) * (1 - 1 / z)
    if kind is Kind.ADJ_MINUS2:
        return 1 / ((1 - z) * (1 - z))
    raise ValueError(kind)


def gluing_product(eq: GluingEquation, z: ShapeAssignment | Sequence[complex], tol: float = DEGENERACY_TOL) -> complex:
    zs = z.z if isinstance(z, ShapeAssignment) else tuple(z)
    out = 1 + 0j
    for c in eq.contributions:
        zt = zs[c.time % eq.period]
        if abs(zt) <= tol or abs(zt - 1) <= tol:
            raise DegenerateTetrahedron(f"degenerate shape parameter Z({c.time % eq.period}) = {zt}")
        out *= _factor(c.kind, zt)
    return out


def partial_product_oracle(
    p: MappingClassPresentation,
    y0: Mapping | YState,
    eq: GluingEquation,
    T: int,
    layering: Layering | None = None,
) -> tuple[complex, complex]:
    """Running gluing product up to ``T`` against ``-1 / y_{g0}(T + 1)``.

    Shapes are read off the trajectory continued across periods, so the
    identity is checked without assuming ``y0`` is periodic.
    """
    edge = eq.edge
    if not edge.t_create <= T < edge.t_destroy:
        raise ValueError(f"T={T} outside [{edge.t_create}, {edge.t_destroy})")
    layering = layering or layer(p)
    l = p.length
    periods = (T + 1) // l + 1
    traj = universal_trajectory(p, y0, periods, layering)
    prod = 1 + 0j
    for c in eq.contributions:
        if c.time > T:
            break
        zt = -traj[c.time][p.flips[c.time % l]]
        prod *= _factor(c.kind, zt)
    rhs = -1 / traj[T + 1][edge.label_at(T + 1)]
    return prod, rhs


def _bernoulli(count: int) -> list[Fraction]:
    B = [Fraction(1)]
    for m in range(1, count):
        B.append(-sum(math.comb(m + 1, k) * B[k] for k in range(m)) / (m + 1))
    return B


# coefficients B_n / (n + 1)! of Li2(z) = sum_n B_n u^(n+1) / (n+1)!, u = -log(1 - z)
_LI2_COEFFS = [float(b / math.factorial(n + 1)) for n, b in enumerate(_bernoulli(40))]


def _li2_reduced(w: complex) -> complex:
    """Dilogarithm for ``|w| <= 1`` and ``Re w <= 1/2`` (there ``|u| < 1.3``)."""
    u = -cmath.log(1 - w)
    u2 = u * u
    out = _LI2_COEFFS[0] * u + _LI2_COEFFS[1] * u2
    power = u
    for n in range(2, len(_LI2_COEFFS), 2):
        power *= u2
        term = _LI2_COEFFS[n] * power
        out += term
        if abs(term) < 1e-18 * abs(out):
            break
    return out


def bloch_wigner(z: complex) -> float:
    """Bloch-Wigner dilogarithm ``Im Li2(z) + arg(1 - z) log|z|``.

    ``z`` is first moved, through the six anharmonic substitutions, to the
    region ``|w| <= 1, Re w <= 1/2`` where the Bernoulli series converges
    fast; ``D`` is invariant under the cyclic ones and flips sign under the
    others.  Returns 0 at ``z = 0, 1`` by continuity.
    """
    z = complex(z)
    if z == 0 or z == 1:
        return 0.0
    for w, sign in (
        (z, 1),
        (1 - 1 / z, 1),
        (1 / (1 - z), 1),
        (1 / z, -1),
        (1 - z, -1),
        (z / (z - 1), -1),
    ):
        if abs(w) <= 1 and w.real <= 0.5:
            break
    d = _li2_reduced(w).imag + cmath.phase(1 - w) * math.log(abs(w)) if w != 0 else 0.0
    return sign * d


def volume(z: ShapeAssignment | Sequence[complex], tol: float = DEGENERACY_TOL) -> float:
    zs = z.z if isinstance(z, ShapeAssignment) else tuple(z)
    for t, zt in enumerate(zs):
        if abs(zt) <= tol or abs(zt - 1) <= tol:
            raise DegenerateTetrahedron(f"degenerate shape parameter Z({t}) = {zt}")
    return math.fsum(bloch_wigner(zt) for zt in zs)
