"""Validate, layer, solve and evaluate a problem; every report number comes from here."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping

from . import kernels
from .hyperbolic import DegenerateTetrahedron, ShapeAssignment, gluing_product, shapes, volume
from .mtorus import (
    CuspRelation,
    GluingEquation,
    Layering,
    LayeringError,
    PeriodicityError,
    check_periodicity,
    check_sigma,
    cusp_relations,
    edge_lifecycles,
    gluing_equations,
    layer,
)
from .problem import ProblemFile
from .quiver import MutationError, YState, apply_sequence
from .solver import PeriodicitySystem, SolverConfig, Solutions, solve
from .surface import TriangulationError, validate


@dataclass
class Evaluation:
    """Everything checkable about one initial assignment ``y0``."""

    y0: dict
    defined: bool
    failure: str | None = None
    periodicity_residual: float = math.inf
    cusp_residuals: dict = field(default_factory=dict)
    gluing_residuals: dict = field(default_factory=dict)
    shapes: tuple | None = None
    nondegenerate: bool = False
    positive: bool = False
    volume: float | None = None

    @property
    def geometric(self) -> bool:
        return self.defined and self.nondegenerate and self.positive

    @property
    def cusp_max(self) -> float:
        return max(self.cusp_residuals.values(), default=math.inf if not self.defined else 0.0)

    @property
    def gluing_max(self) -> float:
        return max(self.gluing_residuals.values(), default=math.inf)


class Pipeline:
    """A parsed problem taken through validation and layering.

    Construction never raises on a bad surface or presentation; check
    :attr:`errors` (empty means the problem is usable).
    """

    def __init__(self, problem: ProblemFile, backend: str | None = None):
        self.problem = problem
        self.presentation = problem.presentation
        self.backend = backend
        self.errors: list[str] = []
        self.periodicity: tuple[bool, str] = (False, "not checked")
        self.layering: Layering | None = None
        self.equations: list[GluingEquation] = []
        self.cusps: list[CuspRelation] = []

        self.errors += validate(self.presentation.base)
        bad = check_sigma(self.presentation)
        if bad:
            self.errors.append(bad)
        if self.errors:
            return
        try:
            self.periodicity = check_periodicity(self.presentation)
            if not self.periodicity[0]:
                self.errors.append(f"periodicity: {self.periodicity[1]}")
                return
            self.layering = layer(self.presentation)
            self.equations = gluing_equations(
                self.presentation, edge_lifecycles(self.presentation, self.layering), self.layering
            )
            self.cusps = cusp_relations(self.presentation)
        except (TriangulationError, PeriodicityError, LayeringError) as exc:
            self.errors.append(str(exc))

    @property
    def ok(self) -> bool:
        return not self.errors

    def summary(self) -> dict:
        p = self.presentation
        return {
            "length": p.length,
            "arcs": len(p.arcs),
            "punctures": len(p.base.punctures),
            "flips": list(p.flips),
            "gluing_equations": len(self.equations),
        }

    def system(self, cfg: SolverConfig) -> PeriodicitySystem:
        return PeriodicitySystem(
            self.presentation,
            self.layering,
            reduce_cusp=cfg.reduce_cusp,
            mutation_tol=cfg.mutation_tol,
            backend=cfg.backend or self.backend,
        )

    def solve(self, cfg: SolverConfig, initial_points=None) -> Solutions:
        if not self.ok:
            raise ValueError("; ".join(self.errors))
        return solve(self.system(cfg), cfg, initial_points)

    @staticmethod
    def edge_name(eq: GluingEquation) -> str:
        e = eq.edge
        return f"{e.label_at(e.t_create + 1)}@{e.t_create + 1}"

    def evaluate(self, y0: Mapping[Hashable, complex], degeneracy_tol: float = 1e-9) -> Evaluation:
        p = self.presentation
        y0 = {e: complex(y0[e]) for e in p.arcs}
        ev = Evaluation(y0, defined=False)
        try:
            _, states = apply_sequence(self.layering.quivers[0], YState(y0, 0), p.flips)
            z = shapes(p, y0, self.layering, tol=degeneracy_tol)
        except MutationError as exc:
            ev.failure = str(exc)
            return ev
        ev.defined = True
        final = states[-1]
        ev.periodicity_residual = max(abs(final[h] - y0[p.sigma[h]]) for h in p.arcs)
        for c in self.cusps:
            prod = 1 + 0j
            for e, k in c.exponents.items():
                prod *= y0[e] ** k
            ev.cusp_residuals[c.puncture] = abs(prod - 1)
        ev.shapes = z.z
        ev.nondegenerate = z.nondegenerate(degeneracy_tol)
        ev.positive = z.positive(degeneracy_tol)
        if ev.nondegenerate:
            for eq in self.equations:
                try:
                    ev.gluing_residuals[self.edge_name(eq)] = abs(gluing_product(eq, z, degeneracy_tol) - 1)
                except DegenerateTetrahedron:
                    ev.gluing_residuals[self.edge_name(eq)] = math.inf
            ev.volume = volume(z, degeneracy_tol)
        return ev

    def checks(self, ev: Evaluation, tol: float) -> list[dict]:
        """Named pass/fail checks for ``verify``; positivity is reported but not required."""
        out = [{"name": "defined", "value": None, "ok": ev.defined, "detail": ev.failure}]
        if not ev.defined:
            return out
        out.append(_check("periodicity", ev.periodicity_residual, tol))
        for m, v in ev.cusp_residuals.items():
            out.append(_check(f"cusp[{m}]", v, tol))
        out.append({"name": "nondegenerate", "value": None, "ok": ev.nondegenerate, "detail": None})
        for name, v in ev.gluing_residuals.items():
            out.append(_check(f"gluing[{name}]", v, tol))
        out.append({"name": "positive", "value": None, "ok": ev.positive, "detail": "informational", "required": False})
        return out


def _check(name: str, value: float, tol: float) -> dict:
    return {"name": name, "value": value, "ok": bool(value <= tol), "detail": None}


def backend_name(cfg: SolverConfig) -> str:
    return cfg.backend or kernels.BACKEND
