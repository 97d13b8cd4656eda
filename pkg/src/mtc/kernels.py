"""Compile a presentation into flat integer arrays and evaluate it fast.

The evaluator backend is the Cython extension when it is importable, else
the pure-Python twin.  Set ``MTC_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Hashable, Mapping

import numpy as np

from . import _kernel_py
from .quiver import DEFAULT_TOL, UndefinedMutation

if os.environ.get("MTC_PURE_PYTHON", "") not in ("", "0"):
    _backend = _kernel_py
else:
    try:
        from . import _kernel_c as _backend
    except ImportError:  # extension not built
        _backend = _kernel_py

BACKEND = _backend.BACKEND
STATUS = _kernel_py.STATUS
BACKENDS = {"python": _kernel_py}
try:
    from . import _kernel_c

    BACKENDS["cython"] = _kernel_c
except ImportError:
    pass


class EvaluationFailure(UndefinedMutation):
    pass


@dataclass(frozen=True)
class Program:
    """A flip sequence lowered to exponent tables over arc indices.

    Row ``t`` of ``qk`` holds ``Q_t(k_t, i)`` and of ``bk`` holds
    ``bbar_t(i, k_t)``.  ``perm[h]`` is the index of ``sigma(arc h)`` and row
    ``j`` of ``cexp`` the exponent vector of the ``j``-th cusp relation.
    """

    arcs: tuple
    ks: np.ndarray
    qk: np.ndarray
    bk: np.ndarray
    perm: np.ndarray
    cexp: np.ndarray

    @classmethod
    def from_layering(cls, layering, cusp_exponents: list[Mapping[Hashable, int]]) -> "Program":
        p = layering.presentation
        arcs = p.arcs
        idx = {e: i for i, e in enumerate(arcs)}
        n, l = len(arcs), p.length
        ks = np.array([idx[k] for k in p.flips], dtype=np.int64)
        qk = np.zeros((l, n), dtype=np.int64)
        bk = np.zeros((l, n), dtype=np.int64)
        for t, k in enumerate(ks):
            b = layering.quivers[t].bbar
            qk[t] = np.maximum(b[k, :], 0)
            bk[t] = b[:, k]
        perm = np.array([idx[p.sigma[e]] for e in arcs], dtype=np.int64)
        cexp = np.zeros((len(cusp_exponents), n), dtype=np.int64)
        for j, ex in enumerate(cusp_exponents):
            for e, v in ex.items():
                cexp[j, idx[e]] = v
        return cls(tuple(arcs), ks, qk, bk, perm, cexp)

    def evaluator(self, tol: float = DEFAULT_TOL, backend: str | None = None):
        mod = BACKENDS[backend] if backend else _backend
        return mod.Evaluator(self.ks, self.qk, self.bk, self.perm, self.cexp, tol)


def _check(status, value, what):
    if status >= 0:
        raise EvaluationFailure(f"{what} failed: undefined mutation", step=status)
    return value


def trajectory(ev, y0) -> np.ndarray:
    return _check(*ev.trajectory(y0), "trajectory")


def residual(ev, y0) -> np.ndarray:
    return _check(*ev.residual(y0), "residual")


def jacobian(ev, y0, rel_step: float = 1e-7) -> np.ndarray:
    return _check(*ev.jacobian(y0, rel_step), "jacobian")
