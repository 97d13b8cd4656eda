"""Command-line entry point: ``mtc <command> <file> [options]``.

Commands: ``validate``, ``solve``, ``verify``, ``trajectory``.  ``<file>`` is
a problem file path or the name of a bundled problem.  Defaults for
``--seed``, ``--starts``, ``--tol``, ``--format``, ``--workers`` and
``--backend`` may be given as ``MTC_SEED`` etc.; explicit flags win, and
both override the problem file's ``solver`` section.

Exit status: 0 on success (a geometric solution was found, or every check
passed), 1 when the computation ran but failed, 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import yaml

from . import kernels
from .mtorus import LayeringError, PeriodicityError
from .pipeline import Pipeline
from .problem import ProblemError, parse, shipped
from .quiver import MutationError, YState, apply_sequence
from .report import emit, invalid_report, solve_report, trajectory_report, validate_report, verify_report
from .surface import TriangulationError

VERIFY_TOL = 1e-8

_ENV = {
    "seed": ("MTC_SEED", int),
    "starts": ("MTC_STARTS", int),
    "tol": ("MTC_TOL", float),
    "format": ("MTC_FORMAT", str),
    "workers": ("MTC_WORKERS", int),
    "backend": ("MTC_BACKEND", str),
}


class UsageError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtc", description="Hyperbolic structures on mapping tori from cluster y-dynamics.")
    ap.add_argument("command", choices=["validate", "solve", "verify", "trajectory"])
    ap.add_argument("file", help="problem file, or the name of a bundled problem")
    ap.add_argument("--seed", type=int, help="multi-start seed")
    ap.add_argument("--starts", type=int, help="number of random starts")
    ap.add_argument("--tol", type=float, help="solver residual tolerance (solve) or check tolerance (verify)")
    ap.add_argument("--format", choices=["text", "json"], help="output format (default text)")
    ap.add_argument("--workers", type=int, help="solver threads")
    ap.add_argument("--backend", choices=sorted(kernels.BACKENDS), help="kernel backend")
    ap.add_argument("--y0", help="initial y-values: inline list, or a file (YAML/JSON list, mapping, or a solve report)")
    ap.add_argument("--index", type=int, help="which solution to take when --y0 is a solve report")
    ap.add_argument("-o", "--output", help="write the report here instead of stdout")
    return ap


def _apply_env(args: argparse.Namespace, environ) -> None:
    for name, (var, conv) in _ENV.items():
        if getattr(args, name) is None and environ.get(var):
            try:
                setattr(args, name, conv(environ[var]))
            except ValueError:
                raise UsageError(f"environment variable {var}={environ[var]!r} is not a valid {conv.__name__}") from None
    if args.format is None:
        args.format = "text"
    if args.format not in ("text", "json"):
        raise UsageError(f"unknown format {args.format!r}")
    if args.backend is not None and args.backend not in kernels.BACKENDS:
        raise UsageError(f"backend {args.backend!r} unavailable; have {sorted(kernels.BACKENDS)}")


def _problem_path(name: str) -> Path:
    p = Path(name)
    if p.exists() or p.suffix in (".yaml", ".yml") or os.sep in name:
        return p
    return shipped(name)


def _to_complex(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, str):
        return complex(v.replace(" ", "").replace("i", "j").replace("*", ""))
    raise ValueError(f"cannot read {v!r} as a complex number")


def parse_y0(spec: str, arcs, index: int | None = None) -> dict:
    """Initial values from an inline string or a file, keyed by arc label."""
    path = Path(spec)
    if path.is_file():
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    else:
        try:
            data = yaml.safe_load(spec)
        except yaml.YAMLError:
            data = spec
        if isinstance(data, str) or isinstance(data, (int, float)):
            data = [s for s in str(spec).split(",") if s.strip()]
    if isinstance(data, dict) and "solutions" in data:
        sols = data["solutions"]
        if not sols:
            raise UsageError("report contains no solutions")
        if index is None:
            index = next((i for i, s in enumerate(sols) if s.get("geometric")), 0)
        if not 0 <= index < len(sols):
            raise UsageError(f"solution index {index} out of range (report has {len(sols)})")
        data = sols[index]["y0"]
    elif isinstance(data, dict) and "evaluation" in data:
        data = data["evaluation"]["y0"]
    try:
        if isinstance(data, dict):
            by_name = {str(k): v for k, v in data.items()}
            missing = [e for e in arcs if str(e) not in by_name]
            if missing:
                raise UsageError(f"y0 has no value for arc {missing[0]!r}")
            extra = sorted(set(by_name) - {str(e) for e in arcs})
            if extra:
                raise UsageError(f"y0 names unknown arc {extra[0]!r}")
            return {e: _to_complex(by_name[str(e)]) for e in arcs}
        if isinstance(data, list):
            if len(data) != len(arcs):
                raise UsageError(f"y0 has {len(data)} values, expected {len(arcs)} (one per arc {list(arcs)})")
            return {e: _to_complex(v) for e, v in zip(arcs, data)}
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"bad y0: {exc}") from None
    raise UsageError(f"cannot read y0 from {spec!r}")


def _solver_cfg(problem, args):
    return problem.solver_config(
        seed=args.seed,
        num_starts=args.starts,
        tol_residual=args.tol,
        workers=args.workers,
        backend=args.backend,
    )


def run(argv=None, environ=None) -> tuple[int, str]:
    """Run a command; returns ``(exit status, report text)``."""
    args = build_parser().parse_args(argv)
    environ = os.environ if environ is None else environ
    _apply_env(args, environ)
    problem = parse(_problem_path(args.file))
    pipe = Pipeline(problem, backend=args.backend)

    if args.command == "validate":
        rep = validate_report(pipe)
        return (0 if pipe.ok else 1), emit(rep, args.format)

    if not pipe.ok:
        return 1, emit(invalid_report(pipe, args.command), args.format)

    if args.command == "solve":
        cfg = _solver_cfg(problem, args)
        sols = pipe.solve(cfg)
        rep = solve_report(pipe, sols, cfg, cfg.backend or kernels.BACKEND)
        return (0 if rep["geometric_solutions"] else 1), emit(rep, args.format)

    arcs = pipe.presentation.arcs
    if args.y0 is not None:
        y0 = parse_y0(args.y0, arcs, args.index)
    elif problem.reference_solution() is not None:
        y0 = problem.reference_solution()
    else:
        raise UsageError(f"{args.command} needs --y0 (the problem file has no reference solution)")

    if args.command == "verify":
        tol = args.tol if args.tol is not None else VERIFY_TOL
        cfg = problem.solver_config()
        ev = pipe.evaluate(y0, cfg.degeneracy_tol)
        rep = verify_report(pipe, ev, pipe.checks(ev, tol), tol)
        return (0 if rep["passed"] else 1), emit(rep, args.format)

    quivers, states = apply_sequence(pipe.layering.quivers[0], YState(y0, 0), pipe.presentation.flips)
    return 0, emit(trajectory_report(pipe, quivers, states), args.format)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args_out = build_parser().parse_args(argv).output
    try:
        code, text = run(argv)
    except (UsageError, ProblemError) as exc:
        print(f"mtc: error: {exc}", file=sys.stderr)
        return 2
    except (MutationError, TriangulationError, PeriodicityError, LayeringError) as exc:
        print(f"mtc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args_out:
        Path(args_out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
