"""Problem files: a YAML description of a surface, a mapping class and solver options.

Schema::

    name: str                          # optional
    surface:
      arcs: [label, ...]
      triangles: [[a, b, c], ...]      # sides in clockwise order
      puncture_loops: {m: [e1, e2, ...], ...}
    mapping_class:
      flips: [k1, k2, ...]
      relabel: {h: sigma(h), ...}      # y_sigma(h)(0) = y_h(l)
    solver:                            # optional SolverConfig overrides
      num_starts: 512
    references:                        # optional golden values
      volume: float
      solution: {arc: [re, im], ...}
      shapes: [[re, im], ...]
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import yaml

from .mtorus import MappingClassPresentation
from .surface import Triangulation
from .solver import SolverConfig


class ProblemError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemFile:
    name: str
    triangulation: Triangulation
    presentation: MappingClassPresentation
    solver: Mapping[str, Any] = field(default_factory=dict)
    references: Mapping[str, Any] = field(default_factory=dict)
    path: str | None = None

    def solver_config(self, **overrides) -> SolverConfig:
        merged = {**self.solver, **{k: v for k, v in overrides.items() if v is not None}}
        return SolverConfig(**merged)

    def reference_solution(self) -> dict | None:
        sol = self.references.get("solution")
        if sol is None:
            return None
        return {e: _complex(v, f"references.solution[{e!r}]") for e, v in sol.items()}

    def reference_shapes(self) -> list | None:
        zs = self.references.get("shapes")
        return None if zs is None else [_complex(v, "references.shapes") for v in zs]


def _complex(v, where: str) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", "").replace("i", "j"))
        except ValueError:
            pass
    raise ProblemError(f"{where}: cannot read {v!r} as a complex number")


def _section(doc: Mapping, key: str, where: str = "") -> Mapping:
    sec = doc.get(key)
    if not isinstance(sec, Mapping):
        raise ProblemError(f"missing or malformed section '{where}{key}'")
    return sec


def _list(sec: Mapping, key: str, where: str) -> list:
    v = sec.get(key)
    if not isinstance(v, list):
        raise ProblemError(f"'{where}.{key}' must be a list")
    return v


def _resolve(label, arcs: set, where: str):
    if label not in arcs:
        raise ProblemError(f"{where}: unknown arc {label!r}")
    return label


def loads(text: str, path: str | None = None) -> ProblemFile:
    src = path or "<string>"
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        problem = getattr(exc, "problem", None) or str(exc)
        raise ProblemError(f"{src}: parse error at {where}: {problem}") from None
    if not isinstance(doc, Mapping):
        raise ProblemError(f"{src}: top level must be a mapping")

    surf = _section(doc, "surface")
    arcs = _list(surf, "arcs", "surface")
    if len(set(arcs)) != len(arcs):
        raise ProblemError("surface.arcs: duplicate labels")
    known = set(arcs)
    tris = []
    for i, tri in enumerate(_list(surf, "triangles", "surface")):
        if not isinstance(tri, list) or len(tri) != 3:
            raise ProblemError(f"surface.triangles[{i}]: expected three arcs, got {tri!r}")
        tris.append(tuple(_resolve(e, known, f"surface.triangles[{i}]") for e in tri))
    loops_raw = _section(surf, "puncture_loops", "surface.")
    loops = {}
    for m, loop in loops_raw.items():
        if not isinstance(loop, list) or not loop:
            raise ProblemError(f"surface.puncture_loops[{m!r}] must be a non-empty list")
        loops[m] = tuple(_resolve(e, known, f"surface.puncture_loops[{m!r}]") for e in loop)

    mc = _section(doc, "mapping_class")
    flips = [_resolve(k, known, f"mapping_class.flips[{i}]") for i, k in enumerate(_list(mc, "flips", "mapping_class"))]
    relabel_raw = _section(mc, "relabel", "mapping_class.")
    relabel = {}
    for h, g in relabel_raw.items():
        relabel[_resolve(h, known, "mapping_class.relabel")] = _resolve(g, known, f"mapping_class.relabel[{h!r}]")
    missing = [e for e in arcs if e not in relabel]
    if missing:
        raise ProblemError(f"mapping_class.relabel is not a permutation: arc {missing[0]!r} has no image")
    if len(set(relabel.values())) != len(relabel):
        seen: dict = {}
        for h, g in relabel.items():
            if g in seen:
                raise ProblemError(
                    f"mapping_class.relabel is not a permutation: {seen[g]!r} and {h!r} both map to {g!r}"
                )
            seen[g] = h

    solver = dict(doc.get("solver") or {})
    allowed = {f.name for f in dataclasses.fields(SolverConfig)}
    unknown = sorted(set(solver) - allowed)
    if unknown:
        raise ProblemError(f"solver: unknown option {unknown[0]!r}")
    if "start_radii" in solver:
        solver["start_radii"] = tuple(solver["start_radii"])
    try:
        SolverConfig(**solver)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"solver: {exc}") from None

    refs = dict(doc.get("references") or {})
    t = Triangulation(arcs, tris, loops)
    p = MappingClassPresentation(t, flips, relabel)
    name = str(doc.get("name") or (Path(path).stem if path else "problem"))
    out = ProblemFile(name, t, p, solver, refs, path)
    out.reference_solution()
    out.reference_shapes()
    return out


def parse(path) -> ProblemFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text, str(path))


def shipped(name: str) -> Path:
    """Path of a problem file bundled with the package."""
    here = Path(__file__).parent / "problems"
    p = here / (name if name.endswith(".yaml") else name + ".yaml")
    if not p.exists():
        raise ProblemError(f"no shipped problem {name!r}; available: {sorted(q.stem for q in here.glob('*.yaml'))}")
    return p
