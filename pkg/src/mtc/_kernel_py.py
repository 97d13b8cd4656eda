"""Pure-Python evaluator for compiled y-mutation programs.

Mirrors ``_kernel_c.pyx`` line for line; used when the extension is not
built or when ``MTC_PURE_PYTHON=1``.
"""

import numpy as np

BACKEND = "python"
STATUS = ("converged", "undefined_start", "undefined_jacobian", "damping_exhausted",
          "max_iterations", "diverged")
PIVOT_TOL = 1e-14


def _ipow(x, n):
    if n < 0:
        x = 1 / x
        n = -n
    out = 1 + 0j
    for _ in range(n):
        out *= x
    return out


class Evaluator:
    def __init__(self, ks, qk, bk, perm, cexp, tol):
        self.ks = [int(k) for k in ks]
        self.qk = [[int(v) for v in row] for row in qk]
        self.bk = [[int(v) for v in row] for row in bk]
        self.perm = [int(p) for p in perm]
        self.cexp = [[(j, int(v)) for j, v in enumerate(row) if v] for row in cexp]
        self.tol = float(tol)
        self.n = len(self.perm)
        self.m = len(self.cexp)
        self.l = len(self.ks)

    def _forward(self, y, out_rows=None):
        tol = self.tol
        n = self.n
        for t in range(self.l):
            k = self.ks[t]
            yk = y[k]
            opk = 1 + yk
            if abs(opk) <= tol or abs(yk) <= tol:
                return t
            qrow = self.qk[t]
            brow = self.bk[t]
            for i in range(n):
                if i == k:
                    continue
                q = qrow[i]
                b = brow[i]
                if q:
                    y[i] *= _ipow(yk, q)
                if b:
                    y[i] *= _ipow(opk, b)
            y[k] = 1 / yk
            if out_rows is not None:
                out_rows.append(list(y))
        return -1

    def trajectory(self, y0):
        y = [complex(v) for v in y0]
        rows = [list(y)]
        status = self._forward(y, rows)
        if status >= 0:
            return status, None
        return -1, np.array(rows, dtype=np.complex128)

    def _residual(self, y0):
        y = list(y0)
        status = self._forward(y)
        if status >= 0:
            return status, None
        r = [y[h] - y0[self.perm[h]] for h in range(self.n)]
        for row in self.cexp:
            prod = 1 + 0j
            for j, e in row:
                prod *= _ipow(y0[j], e)
            r.append(prod - 1)
        return -1, r

    def residual(self, y0):
        status, r = self._residual([complex(v) for v in y0])
        if status >= 0:
            return status, None
        return -1, np.array(r, dtype=np.complex128)

    def jacobian(self, y0, rel_step):
        y0 = [complex(v) for v in y0]
        rows = self.n + self.m
        J = np.empty((rows, self.n), dtype=np.complex128)
        for j in range(self.n):
            h = rel_step * max(1.0, abs(y0[j]))
            yp = list(y0)
            yp[j] += h
            sp, rp = self._residual(yp)
            if sp >= 0:
                return sp, None
            ym = list(y0)
            ym[j] -= h
            sm, rm = self._residual(ym)
            if sm >= 0:
                return sm, None
            inv = 1 / (2 * h)
            for i in range(rows):
                J[i, j] = (rp[i] - rm[i]) * inv
        return -1, J

    def gauss_newton(self, x0, max_iterations, tol_residual, max_halvings, rel_step, shift, polish_steps):
        """Damped Gauss-Newton from ``x0``; same contract as the compiled kernel."""
        x = np.array(x0, dtype=np.complex128)
        status, r = self.residual(x)
        if status >= 0:
            return 1, None, float("inf"), 0, False
        norm = float(np.linalg.norm(r))
        regularized = False
        it = polish = 0
        code = -1
        while it < max_iterations:
            if norm <= tol_residual:
                if polish >= polish_steps:
                    break
                polish += 1
            if not norm <= 1e300:
                code = 5
                break
            status, J = self.jacobian(x, rel_step)
            if status >= 0:
                code = 2
                break
            A = J.conj().T @ J
            g = J.conj().T @ r
            scale = max(1.0, float(np.max(A.diagonal().real)))
            L = _cholesky(A, 0.0, scale)
            if L is None:
                regularized = True
                L = _cholesky(A, shift * scale, scale)
                if L is None:
                    it += 1
                    break
            y = np.linalg.solve(L, -g)
            dx = np.linalg.solve(L.conj().T, y)
            alpha = 1.0
            accepted = False
            for _ in range(max_halvings):
                trial = x + alpha * dx
                status, rt = self.residual(trial)
                if status < 0:
                    nt = float(np.linalg.norm(rt))
                    if nt < norm:
                        x, r, norm = trial, rt, nt
                        accepted = True
                        break
                alpha *= 0.5
            it += 1
            if not accepted:
                break
        if code < 0:
            if norm <= tol_residual:
                code = 0
            elif it >= max_iterations:
                code = 4
            else:
                code = 3
        return code, x, norm, it, regularized


def _cholesky(A, shift, scale):
    try:
        L = np.linalg.cholesky(A + shift * np.eye(len(A)))
    except np.linalg.LinAlgError:
        return None
    if np.min(L.diagonal().real) ** 2 <= PIVOT_TOL * scale:
        return None
    return L
