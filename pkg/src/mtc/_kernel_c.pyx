# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled evaluator for y-mutation programs (see ``_kernel_py`` for the reference)."""

from libc.math cimport hypot, sqrt

import numpy as np

BACKEND = "cython"
STATUS = ("converged", "undefined_start", "undefined_jacobian", "damping_exhausted",
          "max_iterations", "diverged")

cdef double PIVOT_TOL = 1e-14

ctypedef double complex cplx


cdef inline double cabs(cplx z) noexcept nogil:
    return hypot(z.real, z.imag)


cdef inline cplx ipow(cplx x, int n) noexcept nogil:
    cdef cplx out = 1
    cdef int i
    if n < 0:
        x = 1 / x
        n = -n
    for i in range(n):
        out = out * x
    return out


cdef class Evaluator:
    cdef long long[::1] ks
    cdef long long[:, ::1] qk
    cdef long long[:, ::1] bk
    cdef long long[::1] perm
    cdef long long[:, ::1] cexp
    cdef double tol
    cdef public int n, m, l
    cdef cplx[::1] work
    cdef cplx[::1] rp
    cdef cplx[::1] rm
    cdef cplx[:, ::1] scratch

    def __init__(self, ks, qk, bk, perm, cexp, tol):
        self.ks = np.ascontiguousarray(ks, dtype=np.int64)
        self.l = len(ks)
        self.perm = np.ascontiguousarray(perm, dtype=np.int64)
        self.n = len(perm)
        self.qk = np.ascontiguousarray(np.asarray(qk, dtype=np.int64).reshape(self.l, self.n))
        self.bk = np.ascontiguousarray(np.asarray(bk, dtype=np.int64).reshape(self.l, self.n))
        self.cexp = np.ascontiguousarray(np.asarray(cexp, dtype=np.int64).reshape(-1, self.n))
        self.m = self.cexp.shape[0]
        self.tol = tol
        self.work = np.empty(self.n, dtype=np.complex128)
        self.rp = np.empty(self.n + self.m, dtype=np.complex128)
        self.rm = np.empty(self.n + self.m, dtype=np.complex128)
        self.scratch = np.empty((1, self.n), dtype=np.complex128)

    cdef int _forward(self, cplx[::1] y, cplx[:, ::1] rows, bint keep) noexcept nogil:
        cdef int t, i, k, q, b
        cdef cplx yk, opk
        for t in range(self.l):
            k = <int>self.ks[t]
            yk = y[k]
            opk = 1 + yk
            if cabs(opk) <= self.tol or cabs(yk) <= self.tol:
                return t
            for i in range(self.n):
                if i == k:
                    continue
                q = <int>self.qk[t, i]
                b = <int>self.bk[t, i]
                if q != 0:
                    y[i] = y[i] * ipow(yk, q)
                if b != 0:
                    y[i] = y[i] * ipow(opk, b)
            y[k] = 1 / yk
            if keep:
                for i in range(self.n):
                    rows[t + 1, i] = y[i]
        return -1

    cdef int _residual(self, cplx[::1] y0, cplx[::1] r) noexcept nogil:
        cdef int i, j, h, status
        cdef cplx prod
        for i in range(self.n):
            self.work[i] = y0[i]
        status = self._forward(self.work, self.scratch, False)
        if status >= 0:
            return status
        for h in range(self.n):
            r[h] = self.work[h] - y0[self.perm[h]]
        for i in range(self.m):
            prod = 1
            for j in range(self.n):
                if self.cexp[i, j] != 0:
                    prod = prod * ipow(y0[j], <int>self.cexp[i, j])
            r[self.n + i] = prod - 1
        return -1

    def trajectory(self, y0):
        cdef cplx[::1] y = np.array(y0, dtype=np.complex128)
        out = np.empty((self.l + 1, self.n), dtype=np.complex128)
        cdef cplx[:, ::1] rows = out
        cdef int i, status
        for i in range(self.n):
            rows[0, i] = y[i]
        with nogil:
            status = self._forward(y, rows, True)
        if status >= 0:
            return status, None
        return -1, out

    def residual(self, y0):
        cdef cplx[::1] y = np.ascontiguousarray(y0, dtype=np.complex128)
        out = np.empty(self.n + self.m, dtype=np.complex128)
        cdef cplx[::1] r = out
        cdef int status
        with nogil:
            status = self._residual(y, r)
        if status >= 0:
            return status, None
        return -1, out

    def jacobian(self, y0, double rel_step):
        cdef cplx[::1] y = np.array(y0, dtype=np.complex128)
        cdef int rows = self.n + self.m
        out = np.empty((rows, self.n), dtype=np.complex128)
        cdef cplx[:, ::1] J = out
        cdef int i, j, status = -1
        cdef double h
        cdef cplx keep
        with nogil:
            for j in range(self.n):
                keep = y[j]
                h = rel_step * (1.0 if cabs(keep) < 1.0 else cabs(keep))
                y[j] = keep + h
                status = self._residual(y, self.rp)
                if status >= 0:
                    break
                y[j] = keep - h
                status = self._residual(y, self.rm)
                y[j] = keep
                if status >= 0:
                    break
                for i in range(rows):
                    J[i, j] = (self.rp[i] - self.rm[i]) / (2 * h)
        if status >= 0:
            return status, None
        return -1, out

    cdef double _norm(self, cplx[::1] r) noexcept nogil:
        cdef double s = 0
        cdef int i
        for i in range(r.shape[0]):
            s += r[i].real * r[i].real + r[i].imag * r[i].imag
        return sqrt(s)

    def gauss_newton(self, x0, int max_iterations, double tol_residual, int max_halvings,
                     double rel_step, double shift, int polish_steps):
        """Damped Gauss-Newton from ``x0``.

        Returns ``(status, x, norm, iterations, regularized)`` with status
        codes from ``STATUS``.
        """
        cdef int n = self.n, rows = self.n + self.m
        cdef cplx[::1] x = np.array(x0, dtype=np.complex128)
        cdef cplx[::1] r = np.empty(rows, dtype=np.complex128)
        cdef cplx[::1] rt = np.empty(rows, dtype=np.complex128)
        cdef cplx[::1] trial = np.empty(n, dtype=np.complex128)
        cdef cplx[::1] dx = np.empty(n, dtype=np.complex128)
        cdef cplx[::1] g = np.empty(n, dtype=np.complex128)
        cdef cplx[:, ::1] J = np.empty((rows, n), dtype=np.complex128)
        cdef cplx[:, ::1] A = np.empty((n, n), dtype=np.complex128)
        cdef cplx[:, ::1] L = np.empty((n, n), dtype=np.complex128)
        cdef int status, it = 0, polish = 0, i, j, k, h, code = -1
        cdef bint regularized = False, accepted
        cdef double norm, nt, alpha, step, scale
        cdef cplx acc, keep

        with nogil:
            status = self._residual(x, r)
            if status >= 0:
                code = 1
            else:
                norm = self._norm(r)
                while it < max_iterations:
                    if norm <= tol_residual:
                        if polish >= polish_steps:
                            break
                        polish += 1
                    if norm != norm or norm > 1e300:
                        code = 5
                        break
                    # central-difference Jacobian
                    for j in range(n):
                        keep = x[j]
                        step = rel_step * (1.0 if cabs(keep) < 1.0 else cabs(keep))
                        x[j] = keep + step
                        status = self._residual(x, self.rp)
                        if status < 0:
                            x[j] = keep - step
                            status = self._residual(x, self.rm)
                        x[j] = keep
                        if status >= 0:
                            break
                        for i in range(rows):
                            J[i, j] = (self.rp[i] - self.rm[i]) / (2 * step)
                    if status >= 0:
                        code = 2
                        break
                    # normal equations A = J^H J, g = J^H r
                    scale = 1.0
                    for j in range(n):
                        for k in range(j + 1):
                            acc = 0
                            for i in range(rows):
                                acc = acc + J[i, j].conjugate() * J[i, k]
                            A[j, k] = acc
                            A[k, j] = acc.conjugate()
                        acc = 0
                        for i in range(rows):
                            acc = acc + J[i, j].conjugate() * r[i]
                        g[j] = acc
                        if A[j, j].real > scale:
                            scale = A[j, j].real
                    if not _cholesky(A, L, 0.0, scale):
                        regularized = True
                        if not _cholesky(A, L, shift * scale, scale):
                            it += 1
                            break
                    _chol_solve(L, g, dx)
                    alpha = 1.0
                    accepted = False
                    for h in range(max_halvings):
                        for j in range(n):
                            trial[j] = x[j] + alpha * dx[j]
                        status = self._residual(trial, rt)
                        if status < 0:
                            nt = self._norm(rt)
                            if nt < norm:
                                for j in range(n):
                                    x[j] = trial[j]
                                for i in range(rows):
                                    r[i] = rt[i]
                                norm = nt
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
        if code == 1:
            return code, None, float("inf"), 0, False
        return code, np.asarray(x), norm, it, regularized


cdef bint _cholesky(cplx[:, ::1] A, cplx[:, ::1] L, double shift, double scale) noexcept nogil:
    """Lower Cholesky factor of ``A + shift I``; False when a pivot collapses."""
    cdef int n = A.shape[0], i, j, k
    cdef double d
    cdef cplx acc
    for j in range(n):
        d = A[j, j].real + shift
        for k in range(j):
            d -= L[j, k].real * L[j, k].real + L[j, k].imag * L[j, k].imag
        if not d > PIVOT_TOL * scale:
            return False
        L[j, j] = sqrt(d)
        for i in range(j + 1, n):
            acc = A[i, j]
            for k in range(j):
                acc = acc - L[i, k] * L[j, k].conjugate()
            L[i, j] = acc / L[j, j].real
        for i in range(j):
            L[i, j] = 0
    return True


cdef void _chol_solve(cplx[:, ::1] L, cplx[::1] g, cplx[::1] dx) noexcept nogil:
    """Solve ``L L^H dx = -g``."""
    cdef int n = L.shape[0], i, k
    cdef cplx acc
    for i in range(n):
        acc = -g[i]
        for k in range(i):
            acc = acc - L[i, k] * dx[k]
        dx[i] = acc / L[i, i].real
    for i in range(n - 1, -1, -1):
        acc = dx[i]
        for k in range(i + 1, n):
            acc = acc - L[k, i].conjugate() * dx[k]
        dx[i] = acc / L[i, i].real
