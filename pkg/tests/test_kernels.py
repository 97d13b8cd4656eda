import os
import subprocess
import sys

import numpy as np
import pytest

from mtc import kernels
from mtc.kernels import EvaluationFailure, Program
from mtc.mtorus import cusp_relations, layer
from mtc.quiver import YState, apply_sequence

from conftest import random_complex

BACKENDS = sorted(kernels.BACKENDS)


def program(p):
    return Program.from_layering(layer(p), [c.reduced() for c in cusp_relations(p)])


def test_compiled_backend_is_built():
    # the editable install builds the extension; the fallback is still always present
    assert "python" in kernels.BACKENDS
    assert "cython" in kernels.BACKENDS, "compiled extension missing; run pip install -e . --no-build-isolation"


def test_program_tables(torus):
    prog = program(torus)
    assert prog.ks.tolist() == [1, 0]
    lay = layer(torus)
    for t, k in enumerate(prog.ks):
        assert prog.qk[t].tolist() == np.maximum(lay.quivers[t].bbar[k], 0).tolist()
        assert prog.bk[t].tolist() == lay.quivers[t].bbar[:, k].tolist()
    assert prog.perm.tolist() == [2, 0, 1]
    assert prog.cexp.tolist() == [[1, 1, 1]]


@pytest.mark.parametrize("backend", BACKENDS)
class TestEvaluator:
    def test_trajectory_matches_reference(self, presentation, backend, rng):
        ev = program(presentation).evaluator(backend=backend)
        lay = layer(presentation)
        for _ in range(10):
            y0 = random_complex(rng, len(presentation.arcs))
            _, states = apply_sequence(lay.quivers[0], YState(dict(zip(presentation.arcs, y0))), presentation.flips)
            traj = kernels.trajectory(ev, y0)
            expected = np.array([s.as_list(presentation.arcs) for s in states])
            assert np.allclose(traj, expected, rtol=1e-13, atol=0)

    def test_residual_definition(self, presentation, backend, rng):
        prog = program(presentation)
        ev = prog.evaluator(backend=backend)
        y0 = np.array(random_complex(rng, len(presentation.arcs)))
        r = kernels.residual(ev, y0)
        yl = kernels.trajectory(ev, y0)[-1]
        n = len(y0)
        assert np.allclose(r[:n], yl - y0[prog.perm], rtol=0, atol=1e-13 * np.max(np.abs(yl)))
        for j, row in enumerate(prog.cexp):
            assert abs(r[n + j] - (np.prod(y0 ** row) - 1)) < 1e-12 * max(1, abs(np.prod(y0 ** row)))

    def test_jacobian_is_holomorphic_derivative(self, presentation, backend, rng):
        # the residual is holomorphic, so the real-direction difference quotient must
        # agree with the imaginary-direction one
        ev = program(presentation).evaluator(backend=backend)
        y0 = np.array(random_complex(rng, len(presentation.arcs), lo=0.6, hi=1.6))
        J = kernels.jacobian(ev, y0, 1e-7)
        h = 1e-6
        for j in range(len(y0)):
            e = np.zeros(len(y0), complex)
            e[j] = 1j * h
            col = (kernels.residual(ev, y0 + e) - kernels.residual(ev, y0 - e)) / (2j * h)
            assert np.allclose(J[:, j], col, rtol=1e-5, atol=1e-6 * np.max(np.abs(J)))

    def test_failure_reports_step(self, torus, backend):
        ev = program(torus).evaluator(backend=backend)
        status, out = ev.trajectory([1j, -1 + 0j, 2j])
        assert status == 0 and out is None
        with pytest.raises(EvaluationFailure) as exc:
            kernels.residual(ev, [1j, -1 + 0j, 2j])
        assert exc.value.step == 0
        # y_2 = 1, y_1 = -4 gives y_1(1) = -4 * (1 + 1) ** -2 = -1: pole at the second flip
        status, _ = ev.residual([-4 + 0j, 1 + 0j, 1j])
        assert status == 1

    def test_gauss_newton_converges_near_root(self, torus, backend):
        ev = program(torus).evaluator(backend=backend)
        root = np.array([1, complex(-0.5, -np.sqrt(3) / 2), complex(-0.5, np.sqrt(3) / 2)])
        code, x, norm, it, reg = ev.gauss_newton(root + 0.05, 50, 1e-12, 30, 1e-7, 1e-8, 2)
        assert kernels.STATUS[code] == "converged"
        assert np.max(np.abs(x - root)) < 1e-10 and norm < 1e-12

    def test_gauss_newton_undefined_start(self, torus, backend):
        ev = program(torus).evaluator(backend=backend)
        code, x, norm, it, reg = ev.gauss_newton(np.array([1j, -1 + 0j, 2j]), 50, 1e-12, 30, 1e-7, 1e-8, 2)
        assert kernels.STATUS[code] == "undefined_start" and x is None and it == 0


def test_backends_agree(presentation, rng):
    if len(BACKENDS) < 2:
        pytest.skip("only one backend")
    prog = program(presentation)
    evs = [prog.evaluator(backend=b) for b in BACKENDS]
    for _ in range(20):
        y0 = random_complex(rng, len(presentation.arcs))
        rs = [kernels.residual(ev, y0) for ev in evs]
        assert np.allclose(rs[0], rs[1], rtol=1e-13, atol=1e-13)
        js = [kernels.jacobian(ev, y0, 1e-7) for ev in evs]
        assert np.allclose(js[0], js[1], rtol=1e-7, atol=1e-7 * np.max(np.abs(js[0])))


def test_pure_python_switch():
    env = dict(os.environ, MTC_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "from mtc import kernels; print(kernels.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
