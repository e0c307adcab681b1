# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror ``_kernels_py``."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def countsketch_dense(const cnp.int64_t[::1] buckets, const double[::1] signs,
                      const double[:, :] M, Py_ssize_t rows):
    cdef Py_ssize_t n = M.shape[0], m = M.shape[1], i, c
    cdef cnp.int64_t h
    cdef double s
    out_arr = np.zeros((rows, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        h = buckets[i]
        s = signs[i]
        for c in range(m):
            out[h, c] += s * M[i, c]
    return out_arr


def countsketch_csr(const cnp.int64_t[::1] buckets, const double[::1] signs,
                    const cnp.int32_t[::1] indptr, const cnp.int32_t[::1] indices,
                    const double[::1] data, Py_ssize_t rows, Py_ssize_t m):
    cdef Py_ssize_t n = indptr.shape[0] - 1, i, p
    cdef cnp.int64_t h
    cdef double s
    out_arr = np.zeros((rows, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(n):
        h = buckets[i]
        s = signs[i]
        for p in range(indptr[i], indptr[i + 1]):
            out[h, indices[p]] += s * data[p]
    return out_arr


def min_sqdist(const double[:, :] X, const double[:, :] C):
    cdef Py_ssize_t n = X.shape[0], k = C.shape[0], d = X.shape[1], i, j, c
    cdef double best, acc, diff
    cdef cnp.int64_t arg
    d2_arr = np.empty(n, dtype=np.float64)
    idx_arr = np.empty(n, dtype=np.int64)
    cdef double[::1] d2 = d2_arr
    cdef cnp.int64_t[::1] idx = idx_arr
    for i in range(n):
        best = float("inf")
        arg = -1
        for j in range(k):
            acc = 0.0
            for c in range(d):
                diff = X[i, c] - C[j, c]
                acc += diff * diff
                if acc >= best:
                    break
            if acc < best:
                best = acc
                arg = j
        d2[i] = best
        idx[i] = arg
    return d2_arr, idx_arr
