"""Report assembly and emission (text and JSON).

JSON field names are fixed; complex numbers are ``[re, im]`` pairs and reals
are rounded to 12 significant digits when the report is built, so a report
parsed back from JSON re-emits byte for byte.
"""

from __future__ import annotations

import json
import math

from .pipeline import Evaluation, Pipeline


def real(x) -> float | None:
    if x is None:
        return None
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.12g}")


def cplx(z) -> list:
    z = complex(z)
    return [real(z.real), real(z.imag)]


def _label(e):
    return e if isinstance(e, (int, str)) else str(e)


def presentation_block(pipe: Pipeline) -> dict:
    p = pipe.presentation
    return {
        "name": pipe.problem.name,
        "length": p.length,
        "arcs": [_label(e) for e in p.arcs],
        "punctures": [_label(m) for m in p.base.punctures],
        "flips": [_label(k) for k in p.flips],
        "relabel": [[_label(h), _label(p.sigma[h])] for h in p.arcs],
    }


def evaluation_block(ev: Evaluation, arcs) -> dict:
    return {
        "y0": [cplx(ev.y0[e]) for e in arcs],
        "defined": ev.defined,
        "failure": ev.failure,
        "nondegenerate": ev.nondegenerate,
        "positive": ev.positive,
        "geometric": ev.geometric,
        "periodicity_residual": real(ev.periodicity_residual),
        "cusp_residual_max": real(ev.cusp_max) if ev.defined else None,
        "gluing_residual_max": real(ev.gluing_max) if ev.gluing_residuals else None,
        "shapes": [cplx(z) for z in ev.shapes] if ev.shapes is not None else None,
        "volume": real(ev.volume),
    }


def solve_report(pipe: Pipeline, sols, cfg, backend: str) -> dict:
    arcs = pipe.presentation.arcs
    rows = []
    for s in sols:
        ev = pipe.evaluate(s.as_dict(), cfg.degeneracy_tol)
        row = evaluation_block(ev, arcs)
        row["residual"] = real(s.residual_norm)
        row["rank_deficient"] = s.rank_deficient
        row["start"] = s.start
        rows.append(row)
    geometric = [r for r in rows if r["geometric"]]
    d = sols.diagnostics
    return {
        "command": "solve",
        "presentation": presentation_block(pipe),
        "periodicity": {"ok": pipe.periodicity[0], "message": pipe.periodicity[1]},
        "solver": {
            "seed": cfg.seed,
            "starts": cfg.num_starts,
            "tol_residual": real(cfg.tol_residual),
            "tol_dedupe": real(cfg.tol_dedupe),
            "backend": backend,
        },
        "diagnostics": {
            "starts": d.get("starts", 0),
            "outcomes": dict(sorted(d.get("outcomes", {}).items())),
            "distinct": d.get("distinct", len(rows)),
            "rank_deficient": d.get("rank_deficient", 0),
        },
        "solutions": rows,
        "geometric_solutions": len(geometric),
        "volume": geometric[0]["volume"] if geometric else None,
        "errors": list(pipe.errors),
    }


def invalid_report(pipe: Pipeline, command: str) -> dict:
    return {
        "command": command,
        "presentation": presentation_block(pipe),
        "periodicity": {"ok": pipe.periodicity[0], "message": pipe.periodicity[1]},
        "errors": list(pipe.errors),
        "invalid": True,
    }


def validate_report(pipe: Pipeline) -> dict:
    out = invalid_report(pipe, "validate")
    del out["invalid"]
    out["valid"] = pipe.ok
    if pipe.ok:
        out["summary"] = {
            "gluing_equations": len(pipe.equations),
            "edge_classes": [Pipeline.edge_name(eq) for eq in pipe.equations],
            "cusp_relations": [
                {"puncture": _label(c.puncture), "exponents": [[_label(e), k] for e, k in c.exponents.items()]}
                for c in pipe.cusps
            ],
        }
    return out


def verify_report(pipe: Pipeline, ev: Evaluation, checks: list[dict], tol: float) -> dict:
    rows = [
        {"name": c["name"], "value": real(c["value"]) if c["value"] is not None else None,
         "ok": c["ok"], "required": c.get("required", True), "detail": c["detail"]}
        for c in checks
    ]
    failed = [c["name"] for c in rows if c["required"] and not c["ok"]]
    return {
        "command": "verify",
        "presentation": presentation_block(pipe),
        "tolerance": real(tol),
        "evaluation": evaluation_block(ev, pipe.presentation.arcs),
        "checks": rows,
        "failed": failed,
        "passed": not failed,
    }


def trajectory_report(pipe: Pipeline, quivers, states) -> dict:
    arcs = pipe.presentation.arcs
    flips = pipe.presentation.flips
    steps = []
    for t, (q, s) in enumerate(zip(quivers, states)):
        steps.append({
            "t": t,
            "flip": _label(flips[t]) if t < len(flips) else None,
            "quiver": q.bbar.tolist(),
            "y": [cplx(s[e]) for e in arcs],
        })
    return {"command": "trajectory", "presentation": presentation_block(pipe), "steps": steps}


# ---------------------------------------------------------------- emission


def emit(report: dict, fmt: str = "text") -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, allow_nan=False) + "\n"
    if fmt != "text":
        raise ValueError(f"unknown format {fmt!r}")
    if report.get("invalid"):
        return "\n".join(_head(report)) + "\n"
    return _TEXT[report["command"]](report)


def _c(z) -> str:
    if z is None:
        return "-"
    re, im = z
    return f"{re:.12g}{'+' if im >= 0 else '-'}{abs(im):.12g}i"


def _r(x) -> str:
    return "-" if x is None else f"{x:.6g}"


def _head(r: dict) -> list[str]:
    p = r["presentation"]
    lines = [
        f"problem: {p['name']}",
        f"presentation: l={p['length']} n={len(p['arcs'])} |M|={len(p['punctures'])} flips={p['flips']}",
        f"periodicity: {'ok' if r.get('periodicity', {}).get('ok') else 'FAILED'}",
    ]
    for err in r.get("errors", []):
        lines.append(f"error: {err}")
    return lines


def _text_solve(r: dict) -> str:
    lines = _head(r)
    if "solutions" not in r:
        return "\n".join(lines) + "\n"
    d, s = r["diagnostics"], r["solver"]
    lines.append(f"solver: seed={s['seed']} starts={s['starts']} backend={s['backend']}")
    outcomes = ", ".join(f"{k}={v}" for k, v in d["outcomes"].items())
    lines.append(f"outcomes: {outcomes}")
    lines.append(f"distinct solutions: {d['distinct']}")
    lines.append(f"geometric solutions: {r['geometric_solutions']}")
    arcs = r["presentation"]["arcs"]
    for i, sol in enumerate(r["solutions"]):
        flags = [k for k in ("defined", "nondegenerate", "positive") if sol[k]]
        tag = "GEOMETRIC" if sol["geometric"] else ",".join(flags) or "undefined"
        lines.append(f"solution {i}: [{tag}] residual={_r(sol['residual'])}")
        if not sol["geometric"]:
            continue
        for e, y in zip(arcs, sol["y0"]):
            lines.append(f"  y_{e} = {_c(y)}")
        for t, z in enumerate(sol["shapes"]):
            lines.append(f"  Z({t}) = {_c(z)}")
        lines.append(f"  gluing residual max: {_r(sol['gluing_residual_max'])}")
        lines.append(f"  cusp residual max: {_r(sol['cusp_residual_max'])}")
        lines.append(f"  volume: {sol['volume']:.12g}")
    if r["volume"] is not None:
        lines.append(f"volume: {r['volume']:.12g}")
    return "\n".join(lines) + "\n"


def _text_validate(r: dict) -> str:
    lines = _head(r)
    lines.append(f"valid: {'yes' if r['valid'] else 'no'}")
    if r["valid"]:
        s = r["summary"]
        lines.append(f"edge classes: {', '.join(s['edge_classes'])}")
        for c in s["cusp_relations"]:
            mono = " ".join(f"y_{e}^{k}" if k != 1 else f"y_{e}" for e, k in c["exponents"])
            lines.append(f"cusp {c['puncture']}: {mono} = 1")
    return "\n".join(lines) + "\n"


def _text_verify(r: dict) -> str:
    lines = _head({**r, "periodicity": {"ok": True}})[:2]
    ev = r["evaluation"]
    for t, z in enumerate(ev["shapes"] or []):
        lines.append(f"Z({t}) = {_c(z)}")
    for c in r["checks"]:
        status = "ok" if c["ok"] else ("FAIL" if c["required"] else "no")
        val = "" if c["value"] is None else f" {c['value']:.3g}"
        extra = f" ({c['detail']})" if c["detail"] else ""
        lines.append(f"check {c['name']}:{val} {status}{extra}")
    if ev["volume"] is not None:
        lines.append(f"volume: {ev['volume']:.12g}")
    lines.append("verify: " + ("passed" if r["passed"] else "failed: " + ", ".join(r["failed"])))
    return "\n".join(lines) + "\n"


def _text_trajectory(r: dict) -> str:
    lines = [f"problem: {r['presentation']['name']}"]
    arcs = r["presentation"]["arcs"]
    for step in r["steps"]:
        nxt = f" -> flip {step['flip']}" if step["flip"] is not None else ""
        lines.append(f"t={step['t']}{nxt}")
        lines.append("  Q = " + str(step["quiver"]))
        lines.append("  y = " + ", ".join(f"{e}: {_c(y)}" for e, y in zip(arcs, step["y"])))
    return "\n".join(lines) + "\n"


_TEXT = {
    "solve": _text_solve,
    "validate": _text_validate,
    "verify": _text_verify,
    "trajectory": _text_trajectory,
}
