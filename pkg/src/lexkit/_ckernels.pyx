# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled dynamic-programming kernels.

Each function mirrors its counterpart in ``_pykernels`` operation for
operation (float64 adds/mins in the same pairing), so the two backends
return bit-identical results.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()

BACKEND = "compiled"


def dtw_norm(cost):
    """Length-normalized alignment cost over a local-cost matrix."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] c_arr = \
        np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t ta = c_arr.shape[0]
    cdef Py_ssize_t tb = c_arr.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] prev_arr = \
        np.full((ta, tb), INFINITY)
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] cur_arr = \
        np.full((ta, tb), INFINITY)
    cdef double[:, ::1] lc = c_arr
    cdef double[:, ::1] prev = prev_arr
    cdef double[:, ::1] cur = cur_arr
    cdef double[:, ::1] tmp
    cdef double best, end, v
    cdef Py_ssize_t layer, i, j, n_layers

    prev[0, 0] = lc[0, 0]
    best = prev[ta - 1, tb - 1] / 1.0
    n_layers = ta + tb - 1
    with nogil:
        for layer in range(1, n_layers):
            for i in range(ta):
                for j in range(tb):
                    v = INFINITY
                    if i > 0 and prev[i - 1, j] < v:
                        v = prev[i - 1, j]
                    if j > 0 and prev[i, j - 1] < v:
                        v = prev[i, j - 1]
                    if i > 0 and j > 0 and prev[i - 1, j - 1] < v:
                        v = prev[i - 1, j - 1]
                    cur[i, j] = v + lc[i, j]
            end = cur[ta - 1, tb - 1]
            if end < INFINITY:
                v = end / (layer + 1)
                if v < best:
                    best = v
            tmp = prev
            prev = cur
            cur = tmp
    return float(best)


def levenshtein(a, b):
    """Unit-cost edit distance between two int sequences."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] a_arr = \
        np.ascontiguousarray(a, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] b_arr = \
        np.ascontiguousarray(b, dtype=np.int32)
    cdef Py_ssize_t n = a_arr.shape[0]
    cdef Py_ssize_t m = b_arr.shape[0]
    if n == 0:
        return int(m)
    if m == 0:
        return int(n)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] prev_arr = \
        np.arange(m + 1, dtype=np.int64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1, mode="c"] cur_arr = \
        np.empty(m + 1, dtype=np.int64)
    cdef long long[::1] prev = prev_arr
    cdef long long[::1] cur = cur_arr
    cdef long long[::1] swp
    cdef int[::1] av = a_arr
    cdef int[::1] bv = b_arr
    cdef Py_ssize_t i, j
    cdef long long v, cand
    cdef int ai
    with nogil:
        for i in range(1, n + 1):
            cur[0] = i
            ai = av[i - 1]
            for j in range(1, m + 1):
                v = prev[j - 1] + (0 if bv[j - 1] == ai else 1)
                cand = prev[j] + 1
                if cand < v:
                    v = cand
                cand = cur[j - 1] + 1
                if cand < v:
                    v = cand
                cur[j] = v
            swp = prev
            prev = cur
            cur = swp
    return int(prev[m])


def dpdp_backtrack(cost, double lam):
    """Minimum-cost unit path through a T x K assignment-cost matrix."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] c_arr = \
        np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t t_len = c_arr.shape[0]
    cdef Py_ssize_t k = c_arr.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2, mode="c"] dp_arr = \
        np.empty((t_len, k), dtype=np.float64)
    cdef cnp.ndarray[cnp.int32_t, ndim=1, mode="c"] path_arr = \
        np.empty(t_len, dtype=np.int32)
    cdef double[:, ::1] lc = c_arr
    cdef double[:, ::1] dp = dp_arr
    cdef int[::1] path = path_arr
    cdef Py_ssize_t t, j, best_j
    cdef double m, ml, v, best
    with nogil:
        for j in range(k):
            dp[0, j] = lc[0, j]
        for t in range(1, t_len):
            m = dp[t - 1, 0]
            for j in range(1, k):
                if dp[t - 1, j] < m:
                    m = dp[t - 1, j]
            ml = m + lam
            for j in range(k):
                v = dp[t - 1, j]
                if ml < v:
                    v = ml
                dp[t, j] = v + lc[t, j]
        best = dp[t_len - 1, 0]
        best_j = 0
        for j in range(1, k):
            if dp[t_len - 1, j] < best:
                best = dp[t_len - 1, j]
                best_j = j
        path[t_len - 1] = <int> best_j
        for t in range(t_len - 2, -1, -1):
            best_j = 0
            best = dp[t, 0] + (0.0 if path[t + 1] == 0 else lam)
            for j in range(1, k):
                v = dp[t, j] + (0.0 if path[t + 1] == j else lam)
                if v < best:
                    best = v
                    best_j = j
            path[t] = <int> best_j
    return path_arr
