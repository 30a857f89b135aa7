# cython: language_level=3
"""Compiled versions of the hot kernels; see ``_pykernels`` for the contract."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, hypot

cnp.import_array()

cdef enum:
    OPTIMAL = 0
    UNBOUNDED = 1
    LIMIT = 2
    RULE_BLAND = 0
    RULE_DANTZIG = 1
    DEGENERATE_LIMIT = 50

cdef double DEGENERATE_STEP = 1e-14


def jacobi_eigh(S, const long[:, :, ::1] schedule, double tol=1e-15, int max_sweeps=60):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] a_arr = np.array(S, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] vt_arr = np.eye(n)
    cdef double[:, ::1] a = a_arr
    cdef double[:, ::1] vt = vt_arr
    cdef Py_ssize_t i, k, p, q, rnd, pair
    cdef Py_ssize_t n_rounds = schedule.shape[0]
    cdef Py_ssize_t n_pairs = schedule.shape[1]
    cdef double scale = 0.0, off, apq, theta, t, c, s, x, y
    cdef int sweep, sweeps = 0
    cdef double tiny = 1e-300

    for i in range(n):
        for k in range(n):
            scale += a[i, k] * a[i, k]
    scale = sqrt(scale)
    if n < 2 or scale == 0.0:
        return np.diag(a_arr).copy(), vt_arr, 0

    cdef double[::1] cs = np.empty(n_pairs)
    cdef double[::1] ss = np.empty(n_pairs)

    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n):
            for k in range(n):
                if i != k:
                    off += a[i, k] * a[i, k]
        if sqrt(off) <= tol * scale:
            break
        sweeps = sweep + 1
        for rnd in range(n_rounds):
            # angles for the whole round come from the matrix at round start
            for pair in range(n_pairs):
                p = schedule[rnd, pair, 0]
                q = schedule[rnd, pair, 1]
                apq = a[p, q]
                if fabs(apq) > tiny:
                    theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                    if theta >= 0.0:
                        t = 1.0 / (theta + hypot(theta, 1.0))
                    else:
                        t = -1.0 / (-theta + hypot(theta, 1.0))
                    c = 1.0 / sqrt(t * t + 1.0)
                    cs[pair] = c
                    ss[pair] = t * c
                else:
                    cs[pair] = 1.0
                    ss[pair] = 0.0
            for pair in range(n_pairs):
                if ss[pair] == 0.0:
                    continue
                p = schedule[rnd, pair, 0]
                q = schedule[rnd, pair, 1]
                c = cs[pair]
                s = ss[pair]
                for k in range(n):
                    x = a[p, k]
                    y = a[q, k]
                    a[p, k] = c * x - s * y
                    a[q, k] = s * x + c * y
                for k in range(n):
                    x = vt[p, k]
                    y = vt[q, k]
                    vt[p, k] = c * x - s * y
                    vt[q, k] = s * x + c * y
            for pair in range(n_pairs):
                if ss[pair] == 0.0:
                    continue
                p = schedule[rnd, pair, 0]
                q = schedule[rnd, pair, 1]
                c = cs[pair]
                s = ss[pair]
                for k in range(n):
                    x = a[k, p]
                    y = a[k, q]
                    a[k, p] = c * x - s * y
                    a[k, q] = s * x + c * y
                a[p, q] = 0.0
                a[q, p] = 0.0
    return np.diag(a_arr).copy(), vt_arr, sweeps


def simplex_iterate(const double[:, ::1] At, const double[::1] c, long[::1] basis,
                    double[:, ::1] Binv, double[::1] xB, unsigned char[::1] in_basis,
                    Py_ssize_t n_enter, Py_ssize_t max_iter, int rule, long[::1] state,
                    double pivot_tol, double opt_tol, double zero_tol):
    cdef Py_ssize_t m = Binv.shape[0]
    cdef Py_ssize_t it, i, j, k, q, r, leaving
    cdef double dj, best, theta, ratio, wr, wi, v
    cdef bint bland
    cdef double[::1] pi = np.empty(m)
    cdef double[::1] w = np.empty(m)

    for it in range(max_iter):
        for k in range(m):
            pi[k] = 0.0
        for i in range(m):
            v = c[basis[i]]
            if v != 0.0:
                for k in range(m):
                    pi[k] += v * Binv[i, k]

        bland = rule == RULE_BLAND or state[1] != 0
        q = -1
        best = -opt_tol
        for j in range(n_enter):
            if in_basis[j]:
                continue
            dj = c[j]
            for k in range(m):
                dj -= pi[k] * At[j, k]
            if dj < best:
                q = j
                if bland:
                    break
                best = dj
        if q < 0:
            return OPTIMAL, it

        for i in range(m):
            v = 0.0
            for k in range(m):
                v += Binv[i, k] * At[q, k]
            w[i] = v

        # basics within zero_tol of zero count as exactly degenerate
        r = -1
        theta = 0.0
        for i in range(m):
            if w[i] > pivot_tol:
                ratio = (xB[i] if xB[i] > zero_tol else 0.0) / w[i]
                if r < 0 or ratio < theta:
                    r = i
                    theta = ratio
        if r < 0:
            return UNBOUNDED, it
        # Bland tie-break: smallest basic index among minimal ratios
        best = theta * (1.0 + 1e-12)
        for i in range(m):
            if w[i] > pivot_tol:
                ratio = (xB[i] if xB[i] > zero_tol else 0.0) / w[i]
                if ratio <= best and basis[i] < basis[r]:
                    r = i
        theta = (xB[r] if xB[r] > zero_tol else 0.0) / w[r]

        if theta <= DEGENERATE_STEP:
            state[0] += 1
            if rule == RULE_DANTZIG and state[0] > DEGENERATE_LIMIT:
                state[1] = 1
        else:
            state[0] = 0

        for i in range(m):
            v = xB[i] - theta * w[i]
            xB[i] = v if fabs(v) > zero_tol else 0.0
        xB[r] = theta
        wr = w[r]
        for k in range(m):
            Binv[r, k] /= wr
        for i in range(m):
            if i == r:
                continue
            wi = w[i]
            if wi != 0.0:
                for k in range(m):
                    Binv[i, k] -= wi * Binv[r, k]

        leaving = basis[r]
        in_basis[leaving] = 0
        in_basis[q] = 1
        basis[r] = q
    return LIMIT, max_iter
