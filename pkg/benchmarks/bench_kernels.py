"""Compare the compiled and pure-Python kernels on the bundled problems.

    python benchmarks/bench_kernels.py [--starts N] [--repeat R]

Times residual evaluation, Jacobian evaluation and a full multi-start
solve per backend, and checks that both backends find the same roots.
"""

import argparse
import time

import numpy as np

from mtc import kernels
from mtc.pipeline import Pipeline
from mtc.problem import parse, shipped
from mtc.solver import SolverConfig, start_point

PROBLEMS = ("once_punctured_torus_LR", "five_punctured_sphere_s1s2s3inv")


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--starts", type=int, default=64)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    backends = sorted(kernels.BACKENDS)
    print(f"backends available: {', '.join(backends)}")
    if "cython" not in backends:
        print("compiled extension not built; only the fallback is timed")

    for name in PROBLEMS:
        pipe = Pipeline(parse(shipped(name)))
        cfg0 = SolverConfig(num_starts=args.starts, seed=0)
        x = start_point(cfg0, len(pipe.presentation.arcs), 0)
        print(f"\n{name}  (l={pipe.presentation.length}, n={len(pipe.presentation.arcs)}, starts={args.starts})")
        print(f"{'backend':<8} {'residual us':>12} {'jacobian us':>12} {'solve s':>9} {'distinct':>9} {'geometric':>10}")
        found = {}
        for b in backends:
            ev = pipe.system(SolverConfig(backend=b)).evaluator()
            n_eval = 2000 if b == "cython" else 200
            t_res = best_of(lambda: [ev.residual(x) for _ in range(n_eval)], args.repeat) / n_eval
            t_jac = best_of(lambda: [ev.jacobian(x, 1e-7) for _ in range(n_eval // 10)], args.repeat) / (n_eval // 10)
            cfg = SolverConfig(num_starts=args.starts, seed=0, backend=b)
            t0 = time.perf_counter()
            sols = pipe.solve(cfg)
            t_solve = time.perf_counter() - t0
            found[b] = sols
            print(f"{b:<8} {t_res * 1e6:>12.2f} {t_jac * 1e6:>12.2f} {t_solve:>9.3f} {len(sols):>9} {len(sols.geometric):>10}")
        if len(found) == 2:
            # individual starts may land in different basins (rounding differs),
            # so compare the root sets rather than the runs
            a, c = found["python"], found["cython"]
            common = sum(
                any(np.max(np.abs(np.array(u.y0) - np.array(v.y0))) < 1e-8 for v in c) for u in a
            )
            geo = all(
                np.max(np.abs(np.array(u.y0) - np.array(v.y0))) < 1e-8
                for u, v in zip(a.geometric, c.geometric)
            ) and len(a.geometric) == len(c.geometric)
            print(f"roots in common: {common} of {len(a)} / {len(c)}; geometric roots agree: {'yes' if geo else 'NO'}")


if __name__ == "__main__":
    main()
