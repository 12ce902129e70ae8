# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels for the thin R updates (see _kernels_py for the spec).

Arithmetic mirrors the numpy fallback operation-for-operation so the two
backends agree to rounding order; the test suite asserts that equivalence.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

IS_COMPILED = True


cdef inline void _givens(double a, double b, double* c, double* s) nogil:
    cdef double r
    if b == 0.0:
        c[0] = 1.0
        s[0] = 0.0
        return
    if fabs(b) > fabs(a):
        r = -a / b
        s[0] = 1.0 / sqrt(1.0 + r * r)
        c[0] = s[0] * r
        if b > 0.0:
            c[0] = -c[0]
            s[0] = -s[0]
    else:
        r = -b / a
        c[0] = 1.0 / sqrt(1.0 + r * r)
        s[0] = c[0] * r
        if a < 0.0:
            c[0] = -c[0]
            s[0] = -s[0]


def solve_rt(double[:, ::1] R, double[::1] b):
    """Solve R^T z = b for upper-triangular R."""
    cdef Py_ssize_t n = R.shape[0]
    cdef cnp.ndarray[double, ndim=1] z_arr = np.zeros(n)
    cdef double[::1] z = z_arr
    cdef Py_ssize_t i, t
    cdef double acc
    for i in range(n):
        acc = b[i]
        for t in range(i):
            acc -= R[t, i] * z[t]
        z[i] = acc / R[i, i]
    return z_arr


def solve_r(double[:, ::1] R, double[::1] b):
    """Solve R x = b for upper-triangular R."""
    cdef Py_ssize_t n = R.shape[0]
    cdef cnp.ndarray[double, ndim=1] x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef Py_ssize_t i, t
    cdef double acc
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for t in range(i + 1, n):
            acc -= R[i, t] * x[t]
        x[i] = acc / R[i, i]
    return x_arr


def thin_add_row(double[:, ::1] R, double[::1] u):
    cdef Py_ssize_t p = R.shape[0]
    cdef Py_ssize_t i, j
    cdef double c, s, t
    for i in range(p):
        if u[i] == 0.0:
            continue
        _givens(R[i, i], u[i], &c, &s)
        R[i, i] = c * R[i, i] - s * u[i]
        for j in range(i + 1, p):
            t = R[i, j]
            R[i, j] = c * t - s * u[j]
            u[j] = s * t + c * u[j]
    return None


def thin_del_row(double[:, ::1] R, double[::1] u):
    cdef Py_ssize_t p = R.shape[0]
    cdef Py_ssize_t i, j
    cdef double r, d2, c, s, worst = np.inf
    for i in range(p):
        r = R[i, i]
        d2 = r * r - u[i] * u[i]
        if d2 < worst:
            worst = d2
        R[i, i] = sqrt(fabs(d2))
        if i < p - 1 and u[i] != 0.0:
            c = R[i, i] / r
            s = -u[i] / r
            if c == 0.0:
                continue
            for j in range(i + 1, p):
                R[i, j] = (R[i, j] + s * u[j]) / c
                u[j] = s * R[i, j] + c * u[j]
    return worst


cdef inline double _house(double a, double s, double* v1, double* tau) nogil:
    """Shared reflector scalars: returns mu for pivot a and squared norm s."""
    cdef double mu = sqrt(s + a * a)
    if a <= 0.0:
        v1[0] = a - mu
    else:
        v1[0] = -s / (a + mu)
    tau[0] = 2.0 * v1[0] * v1[0] / (s + v1[0] * v1[0])
    return mu


def thin_add_rows(double[:, ::1] R, double[:, ::1] U):
    cdef Py_ssize_t p = R.shape[0]
    cdef Py_ssize_t m = U.shape[0]
    cdef cnp.ndarray[double, ndim=2] W_arr = np.array(U, copy=True)
    cdef double[:, ::1] W = W_arr
    cdef cnp.ndarray[double, ndim=1] v2_arr = np.empty(m)
    cdef double[::1] v2 = v2_arr
    cdef Py_ssize_t i, j, t
    cdef double s, v1, tau, mu, ell
    for i in range(p - 1):
        s = 0.0
        for t in range(m):
            s += W[t, i] * W[t, i]
        if s == 0.0:
            continue
        mu = _house(R[i, i], s, &v1, &tau)
        R[i, i] = mu
        for t in range(m):
            v2[t] = W[t, i] / v1
        for j in range(i + 1, p):
            ell = R[i, j]
            for t in range(m):
                ell += v2[t] * W[t, j]
            ell *= tau
            R[i, j] -= ell
            for t in range(m):
                W[t, j] -= v2[t] * ell
    s = 0.0
    for t in range(m):
        s += W[t, p - 1] * W[t, p - 1]
    R[p - 1, p - 1] = sqrt(R[p - 1, p - 1] * R[p - 1, p - 1] + s)
    return None


def thin_del_rows(double[:, ::1] R, double[:, ::1] U):
    cdef Py_ssize_t p = R.shape[0]
    cdef Py_ssize_t m = U.shape[0]
    cdef cnp.ndarray[double, ndim=2] W_arr = np.array(U, copy=True)
    cdef double[:, ::1] W = W_arr
    cdef cnp.ndarray[double, ndim=1] v2_arr = np.empty(m)
    cdef double[::1] v2 = v2_arr
    cdef Py_ssize_t i, j, t
    cdef double s, r, d2, v1, b, tau, w, worst = np.inf
    for i in range(p):
        s = 0.0
        for t in range(m):
            s += W[t, i] * W[t, i]
        r = R[i, i]
        d2 = r * r - s
        if d2 < worst:
            worst = d2
        R[i, i] = sqrt(fabs(d2))
        if i < p - 1 and s != 0.0:
            v1 = R[i, i] - r
            if v1 == 0.0:
                continue
            b = v1 * v1
            tau = 2.0 * b / (b + s)
            for t in range(m):
                v2[t] = W[t, i] / v1
            for j in range(i + 1, p):
                w = 0.0
                for t in range(m):
                    w += v2[t] * W[t, j]
                w *= tau
                R[i, j] = (R[i, j] + w) / (1.0 - tau)
                for t in range(m):
                    W[t, j] -= v2[t] * (tau * R[i, j] + w)
    return worst


def thin_add_cols(double[:, ::1] R, double[:, ::1] cross, double[:, ::1] vv):
    cdef Py_ssize_t p = R.shape[0]
    cdef Py_ssize_t m = cross.shape[1]
    cdef cnp.ndarray[double, ndim=2] out_arr = np.zeros((p + m, p + m))
    cdef double[:, ::1] out = out_arr
    cdef Py_ssize_t i, j, t
    cdef double acc, d2, worst = np.inf
    for i in range(p):
        for j in range(p):
            out[i, j] = R[i, j]
    # R12 columns by forward substitution on R^T
    for j in range(m):
        for i in range(p):
            acc = cross[i, j]
            for t in range(i):
                acc -= R[t, i] * out[t, p + j]
            out[i, p + j] = acc / R[i, i]
    # R22 by the Gram recursion
    for i in range(m):
        d2 = vv[i, i]
        for t in range(p):
            d2 -= out[t, p + i] * out[t, p + i]
        for t in range(i):
            d2 -= out[p + t, p + i] * out[p + t, p + i]
        if d2 < worst:
            worst = d2
        out[p + i, p + i] = sqrt(fabs(d2))
        for j in range(i + 1, m):
            acc = vv[i, j]
            for t in range(p):
                acc -= out[t, p + i] * out[t, p + j]
            for t in range(i):
                acc -= out[p + t, p + i] * out[p + t, p + j]
            out[p + i, p + j] = acc / out[p + i, p + i]
    return out_arr, worst


def thin_step(double[:, ::1] R, Py_ssize_t i, Py_ssize_t a):
    cdef Py_ssize_t l = R.shape[1]
    cdef Py_ssize_t j, t
    cdef double c, s, r0, acc, v1, tau, mu
    cdef cnp.ndarray[double, ndim=1] v2_arr
    cdef double[::1] v2
    if a > 1:
        acc = 0.0
        for t in range(a):
            acc += R[i + 1 + t, i] * R[i + 1 + t, i]
        if acc == 0.0:
            if R[i, i] < 0.0:
                # tau = 2 degenerate branch: flip row i
                R[i, i] = -R[i, i]
                for j in range(i + 1, l):
                    R[i, j] = -R[i, j]
            return None
        mu = _house(R[i, i], acc, &v1, &tau)
        v2_arr = np.empty(a)
        v2 = v2_arr
        for t in range(a):
            v2[t] = R[i + 1 + t, i] / v1
        R[i, i] = mu
        for t in range(a):
            R[i + 1 + t, i] = 0.0
        for j in range(i + 1, l):
            acc = R[i, j]
            for t in range(a):
                acc += v2[t] * R[i + 1 + t, j]
            acc *= tau
            R[i, j] -= acc
            for t in range(a):
                R[i + 1 + t, j] -= v2[t] * acc
    else:
        if R[i + 1, i] == 0.0 and R[i, i] >= 0.0:
            return None
        _givens(R[i, i], R[i + 1, i], &c, &s)
        R[i, i] = c * R[i, i] - s * R[i + 1, i]
        R[i + 1, i] = 0.0
        for j in range(i + 1, l):
            r0 = R[i, j]
            R[i, j] = c * r0 - s * R[i + 1, j]
            R[i + 1, j] = s * r0 + c * R[i + 1, j]
    return None


def thin_del_cols(double[:, ::1] R, Py_ssize_t k, Py_ssize_t m):
    cdef Py_ssize_t p = R.shape[0]
    cdef Py_ssize_t w = p - m
    cdef cnp.ndarray[double, ndim=2] T_arr
    cdef double[:, ::1] T
    cdef cnp.ndarray[double, ndim=1] v2_arr
    cdef double[::1] v2
    cdef Py_ssize_t i, j, t
    cdef double s, v1, tau, mu, acc
    if k == w:
        return np.array(R[:w, :w], copy=True, order="C")
    T_arr = np.empty((p, w))
    T = T_arr
    for i in range(p):
        for j in range(k):
            T[i, j] = R[i, j]
        for j in range(k, w):
            T[i, j] = R[i, j + m]
    if m == 1:
        for i in range(k, w):
            thin_step(T, i, 1)
        return np.array(T_arr[:w, :w], copy=True, order="C")
    v2_arr = np.empty(m)
    v2 = v2_arr
    for i in range(k, w - 1):
        s = 0.0
        for t in range(m):
            s += T[i + 1 + t, i] * T[i + 1 + t, i]
        if s == 0.0:
            if T[i, i] < 0.0:
                for j in range(i, w):
                    T[i, j] = -T[i, j]
            continue
        mu = _house(T[i, i], s, &v1, &tau)
        for t in range(m):
            v2[t] = T[i + 1 + t, i] / v1
        T[i, i] = mu
        for t in range(m):
            T[i + 1 + t, i] = 0.0
        for j in range(i + 1, w):
            acc = T[i, j]
            for t in range(m):
                acc += v2[t] * T[i + 1 + t, j]
            acc *= tau
            T[i, j] -= acc
            for t in range(m):
                T[i + 1 + t, j] -= v2[t] * acc
    s = 0.0
    for t in range(m + 1):
        s += T[w - 1 + t, w - 1] * T[w - 1 + t, w - 1]
    T[w - 1, w - 1] = sqrt(s)
    return np.array(T_arr[:w, :w], copy=True, order="C")
