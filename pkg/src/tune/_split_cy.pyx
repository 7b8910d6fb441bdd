# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled best-split kernel; see _split_np.py for the contract."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def best_split(double[:, ::1] X, double[::1] grad, double[::1] hess, Py_ssize_t min_leaf,
               double min_child_hess=0.0):
    cdef Py_ssize_t n = X.shape[0]
    cdef Py_ssize_t p = X.shape[1]
    if n < 2 * min_leaf:
        return -1, 0.0, 0.0

    cdef double g_total = 0.0, h_total = 0.0
    cdef Py_ssize_t i, j, k
    for i in range(n):
        g_total += grad[i]
        h_total += hess[i]
    cdef double parent = g_total * g_total / h_total

    cdef int best_feat = -1
    cdef double best_thr = 0.0, best_gain = 0.0
    cdef double gl, hl, gain, prev, cur
    cdef double[::1] col = np.empty(n, dtype=np.float64)
    cdef long long[::1] order
    cdef cnp.ndarray col_arr

    for j in range(p):
        for i in range(n):
            col[i] = X[i, j]
        order = np.argsort(np.asarray(col), kind="stable").astype(np.int64)
        gl = 0.0
        hl = 0.0
        for i in range(n - 1):
            k = order[i]
            gl += grad[k]
            hl += hess[k]
            cur = X[k, j]
            prev = X[order[i + 1], j]
            if cur == prev:
                continue
            if i + 1 < min_leaf or n - i - 1 < min_leaf:
                continue
            if min_child_hess > 0.0 and (hl < min_child_hess or h_total - hl < min_child_hess):
                continue
            gain = gl * gl / hl + (g_total - gl) * (g_total - gl) / (h_total - hl) - parent
            if gain > best_gain + 1e-12:
                best_feat = <int> j
                best_thr = 0.5 * (cur + prev)
                best_gain = gain
    return best_feat, best_thr, best_gain
