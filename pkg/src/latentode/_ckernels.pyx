# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: Gram-form Lasso coordinate descent and RK4 on
polynomial companion systems. Signatures mirror :mod:`latentode._fallback`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, isfinite

cnp.import_array()


cdef inline double _soft(double z, double lam) noexcept nogil:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


def cd_gram(double[:, ::1] gram, double[::1] xty, double lam,
            double[::1] coef, int max_iter, double tol):
    """Cyclic coordinate descent on 0.5*c'Gc - b'c + lam*|c|_1, in place.

    Returns ``(n_sweeps, converged)``.
    """
    cdef Py_ssize_t p = gram.shape[0]
    cdef Py_ssize_t i, j, k
    cdef double[::1] q = np.zeros(p)
    cdef double old, new, delta, max_delta, max_coef, g, gjj
    cdef int sweep = 0
    cdef bint converged = False

    with nogil:
        for j in range(p):
            if coef[j] != 0.0:
                for i in range(p):
                    q[i] += gram[i, j] * coef[j]

        while sweep < max_iter:
            sweep += 1
            max_delta = 0.0
            max_coef = 0.0
            for j in range(p):
                gjj = gram[j, j]
                if gjj <= 0.0:
                    continue
                old = coef[j]
                g = xty[j] - q[j] + gjj * old
                new = _soft(g, lam) / gjj
                delta = new - old
                if delta != 0.0:
                    coef[j] = new
                    for i in range(p):
                        q[i] += gram[i, j] * delta
                    if fabs(delta) > max_delta:
                        max_delta = fabs(delta)
                if fabs(new) > max_coef:
                    max_coef = fabs(new)
            if max_delta < tol * (max_coef if max_coef > 1.0 else 1.0):
                converged = True
                for j in range(p):
                    if gram[j, j] <= 0.0:
                        continue
                    g = xty[j] - q[j]
                    if coef[j] == 0.0:
                        if fabs(g) > lam + tol:
                            converged = False
                            break
                    elif coef[j] > 0.0:
                        if fabs(g - lam) > tol:
                            converged = False
                            break
                    else:
                        if fabs(g + lam) > tol:
                            converged = False
                            break
                if converged:
                    break
    return sweep, bool(converged)


cdef void _poly_rhs(double[::1] s, cnp.int64_t[:, ::1] expo, double[:, ::1] coefs,
                    double[::1] icpt, int order, double[::1] mono,
                    double[::1] out) noexcept nogil:
    cdef Py_ssize_t p = expo.shape[0]
    cdef Py_ssize_t m = expo.shape[1]
    cdef Py_ssize_t n_eq = coefs.shape[0]
    cdef Py_ssize_t i, k, e, h
    cdef double v, acc
    for i in range(p):
        v = 1.0
        for k in range(m):
            for e in range(expo[i, k]):
                v *= s[k]
        mono[i] = v
    for h in range(n_eq):
        for k in range(order - 1):
            out[h * order + k] = s[h * order + k + 1]
        acc = icpt[h]
        for i in range(p):
            acc += coefs[h, i] * mono[i]
        out[h * order + order - 1] = acc


def rk4_poly(cnp.int64_t[:, ::1] expo, double[:, ::1] coefs, double[::1] icpt,
             int order, double[::1] x0, double dt, int n_steps,
             double[:, ::1] out):
    """Integrate the companion system, writing channel values per step.

    ``out[k, h]`` receives channel ``h`` after ``k + 1`` steps. Returns the
    number of finite steps written (``n_steps`` when nothing diverged).
    """
    cdef Py_ssize_t m = x0.shape[0]
    cdef Py_ssize_t n_eq = coefs.shape[0]
    cdef Py_ssize_t p = expo.shape[0]
    cdef double[::1] s = np.array(x0, dtype=np.float64)
    cdef double[::1] tmp = np.empty(m)
    cdef double[::1] k1 = np.empty(m)
    cdef double[::1] k2 = np.empty(m)
    cdef double[::1] k3 = np.empty(m)
    cdef double[::1] k4 = np.empty(m)
    cdef double[::1] mono = np.empty(p)
    cdef Py_ssize_t step, i, h
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0
    cdef bint ok
    cdef int done = n_steps

    with nogil:
        for step in range(n_steps):
            _poly_rhs(s, expo, coefs, icpt, order, mono, k1)
            for i in range(m):
                tmp[i] = s[i] + half * k1[i]
            _poly_rhs(tmp, expo, coefs, icpt, order, mono, k2)
            for i in range(m):
                tmp[i] = s[i] + half * k2[i]
            _poly_rhs(tmp, expo, coefs, icpt, order, mono, k3)
            for i in range(m):
                tmp[i] = s[i] + dt * k3[i]
            _poly_rhs(tmp, expo, coefs, icpt, order, mono, k4)
            ok = True
            for i in range(m):
                s[i] = s[i] + sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
                if not isfinite(s[i]):
                    ok = False
            if not ok:
                done = step
                break
            for h in range(n_eq):
                out[step, h] = s[h * order]
    return done
