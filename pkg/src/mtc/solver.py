"""Multi-start damped Gauss-Newton on the periodicity + cusp system.

Unknowns are the initial y-values of the base arcs.  Residual rows are
``y_h(l) - y_sigma(h)(0)`` for every arc ``h`` followed by ``y_m - 1`` for
every puncture ``m``.  The system is overdetermined (puncture monomials
are conserved by mutation), which Gauss-Newton handles directly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .hyperbolic import DEGENERACY_TOL, ShapeAssignment, shapes
from .kernels import EvaluationFailure, Program
from .mtorus import Layering, MappingClassPresentation, cusp_relations, layer
from .quiver import DEFAULT_TOL, MutationError


@dataclass(frozen=True)
class SolverConfig:
    tol_residual: float = 1e-10
    tol_dedupe: float = 1e-6
    max_iterations: int = 200
    num_starts: int = 512
    seed: int = 0
    max_halvings: int = 30
    start_radii: tuple = (0.1, 3.0)
    start_min_angle: float = 0.1  # keeps starts away from the real axis
    jacobian_step: float = 1e-7
    levenberg_shift: float = 1e-8
    rank_tol: float = 1e-10
    mutation_tol: float = DEFAULT_TOL
    degeneracy_tol: float = DEGENERACY_TOL
    reduce_cusp: bool = True
    polish_steps: int = 3
    workers: int = 1
    backend: str | None = None

    def __post_init__(self):
        for name in ("tol_residual", "tol_dedupe", "jacobian_step", "mutation_tol", "degeneracy_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.num_starts < 0 or self.max_iterations < 1:
            raise ValueError("num_starts must be >= 0 and max_iterations >= 1")
        lo, hi = self.start_radii
        if not 0 < lo <= hi:
            raise ValueError("start_radii must satisfy 0 < lo <= hi")


@dataclass(frozen=True)
class Solution:
    arcs: tuple
    y0: tuple
    residual_norm: float
    defined: bool = True
    nondegenerate: bool = True
    positive: bool = False
    shapes: tuple | None = None
    rank_deficient: bool = False
    start: int | None = None
    iterations: int | None = None

    @property
    def geometric(self) -> bool:
        return self.defined and self.nondegenerate and self.positive

    def as_dict(self) -> dict:
        return dict(zip(self.arcs, self.y0))


class Solutions(list):
    """A list of :class:`Solution` carrying run diagnostics."""

    def __init__(self, items=(), diagnostics: Mapping | None = None):
        super().__init__(items)
        self.diagnostics = dict(diagnostics or {})

    @property
    def geometric(self) -> list[Solution]:
        return [s for s in self if s.geometric]


class PeriodicitySystem:
    def __init__(
        self,
        presentation: MappingClassPresentation,
        layering: Layering | None = None,
        reduce_cusp: bool = True,
        mutation_tol: float = DEFAULT_TOL,
        backend: str | None = None,
    ):
        self.presentation = presentation
        self.layering = layering or layer(presentation)
        self.cusps = cusp_relations(presentation)
        self.reduce_cusp = reduce_cusp
        exps = [c.reduced() if reduce_cusp else dict(c.exponents) for c in self.cusps]
        self.program = Program.from_layering(self.layering, exps)
        self.mutation_tol = mutation_tol
        self.backend = backend
        self._ev = self.evaluator()

    @property
    def unknowns(self) -> tuple:
        return self.presentation.arcs

    @property
    def n(self) -> int:
        return len(self.unknowns)

    @property
    def residual_dim(self) -> int:
        return self.n + len(self.cusps)

    def evaluator(self):
        """A fresh evaluator; they hold scratch buffers, so use one per thread."""
        return self.program.evaluator(self.mutation_tol, self.backend)

    def vector(self, y0) -> np.ndarray:
        if isinstance(y0, Mapping):
            return np.array([complex(y0[e]) for e in self.unknowns], dtype=np.complex128)
        return np.asarray(y0, dtype=np.complex128)


def residual(sys: PeriodicitySystem, y0) -> np.ndarray:
    return kernels.residual(sys._ev, sys.vector(y0))


def jacobian(sys: PeriodicitySystem, y0, rel_step: float = 1e-7) -> np.ndarray:
    return kernels.jacobian(sys._ev, sys.vector(y0), rel_step)


def start_point(cfg: SolverConfig, n: int, index: int) -> np.ndarray:
    """Reproducible start ``index``: annulus modulus, angle away from the real axis."""
    rng = np.random.default_rng([cfg.seed, index])
    lo, hi = cfg.start_radii
    r = rng.uniform(lo, hi, n)
    a = cfg.start_min_angle
    theta = rng.uniform(a, math.pi - a, n)
    theta = np.where(rng.random(n) < 0.5, theta, -theta)
    return r * np.exp(1j * theta)


@dataclass
class _Outcome:
    x: np.ndarray | None
    norm: float
    iterations: int
    status: str
    rank_deficient: bool = False


def gauss_newton(ev, x0: np.ndarray, cfg: SolverConfig) -> _Outcome:
    code, x, norm, it, regularized = ev.gauss_newton(
        x0,
        cfg.max_iterations,
        cfg.tol_residual,
        cfg.max_halvings,
        cfg.jacobian_step,
        cfg.levenberg_shift,
        cfg.polish_steps,
    )
    status = kernels.STATUS[code]
    if status != "converged":
        x = None
    return _Outcome(x, float(norm), int(it), status, bool(regularized))


def _dedupe_key(y: np.ndarray, tol: float) -> tuple:
    digits = max(0, -math.floor(math.log10(tol)))
    return tuple(
        v
        for z in y
        for v in (round(z.real, digits) + 0.0, round(z.imag, digits) + 0.0)
    )


def _run_chunk(sys: PeriodicitySystem, cfg: SolverConfig, starts: Sequence[tuple[int, np.ndarray]]):
    ev = sys.evaluator()
    return [(idx, gauss_newton(ev, x0, cfg)) for idx, x0 in starts]


def solve(
    sys: PeriodicitySystem,
    cfg: SolverConfig = SolverConfig(),
    initial_points: Sequence | None = None,
) -> Solutions:
    """Multi-start search; returns distinct roots sorted canonically.

    ``initial_points`` are tried before the random starts (with negative
    start indices).  No completeness claim is made.
    """
    starts = []
    for j, p0 in enumerate(initial_points or ()):
        starts.append((-1 - j, sys.vector(p0)))
    for i in range(cfg.num_starts):
        starts.append((i, start_point(cfg, sys.n, i)))

    if cfg.workers > 1 and len(starts) > 1:
        chunks = [starts[w:: cfg.workers] for w in range(cfg.workers)]
        with ThreadPoolExecutor(cfg.workers) as pool:
            parts = list(pool.map(lambda c: _run_chunk(sys, cfg, c), chunks))
        results = sorted((item for part in parts for item in part), key=lambda t: (t[0] >= 0, abs(t[0])))
    else:
        results = _run_chunk(sys, cfg, starts)

    counts: dict = {}
    found: list[tuple[int, _Outcome]] = []
    for idx, out in results:
        counts[out.status] = counts.get(out.status, 0) + 1
        if out.x is None:
            continue
        if any(np.max(np.abs(out.x - prev.x)) <= cfg.tol_dedupe for _, prev in found):
            continue
        found.append((idx, out))

    sols = []
    for idx, out in found:
        J = jacobian(sys, out.x, cfg.jacobian_step)
        sv = np.linalg.svd(J, compute_uv=False)
        deficient = out.rank_deficient or bool(sv[-1] <= cfg.rank_tol * max(sv[0], 1.0))
        sol = Solution(
            sys.unknowns,
            tuple(complex(v) for v in out.x),
            out.norm,
            rank_deficient=deficient,
            start=idx,
            iterations=out.iterations,
        )
        sols.append(classify(sys, sol, cfg))
    sols.sort(key=lambda s: _dedupe_key(np.array(s.y0), cfg.tol_dedupe))
    diagnostics = {
        "starts": len(starts),
        "outcomes": counts,
        "distinct": len(sols),
        "geometric": sum(s.geometric for s in sols),
        "rank_deficient": sum(s.rank_deficient for s in sols),
    }
    return Solutions(sols, diagnostics)


def classify(sys: PeriodicitySystem, sol: Solution, cfg: SolverConfig = SolverConfig()) -> Solution:
    tol = cfg.degeneracy_tol
    try:
        z = shapes(sys.presentation, sol.as_dict(), sys.layering, tol=max(tol, sys.mutation_tol))
    except (MutationError, EvaluationFailure):
        return replace(sol, defined=False, nondegenerate=False, positive=False, shapes=None)
    return replace(
        sol,
        defined=True,
        nondegenerate=z.nondegenerate(tol),
        positive=z.positive(tol),
        shapes=z.z,
    )
