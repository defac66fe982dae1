# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops; see ``_fallback`` for the reference numpy versions."""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange

cnp.import_array()


def gather_apply(const cnp.int64_t[:, :] idx, const double complex[:, :] w,
                 const double complex[:, :] h, int threads=1):
    """out[i, p] = sum_k w[i, k] * h[idx[i, k], p]."""
    cdef Py_ssize_t n = idx.shape[0], kk = idx.shape[1], p = h.shape[1]
    cdef Py_ssize_t i, k, q
    cdef cnp.int64_t src
    cdef double complex wik
    out = np.zeros((n, p), dtype=np.complex128)
    cdef double complex[:, :] o = out
    for i in prange(n, nogil=True, num_threads=max(threads, 1), schedule="static"):
        for k in range(kk):
            wik = w[i, k]
            if wik.real == 0.0 and wik.imag == 0.0:
                continue
            src = idx[i, k]
            for q in range(p):
                o[i, q] = o[i, q] + wik * h[src, q]
    return out


def overlap_mass(const double[:] lo, const double[:] hi, const double[:] weight):
    """mass[i] = sum of weight[j] over closed intervals j meeting interval i."""
    cdef Py_ssize_t m = lo.shape[0], i, a, b
    cdef cnp.int64_t[:] olo = np.argsort(lo, kind="stable")
    cdef cnp.int64_t[:] ohi = np.argsort(hi, kind="stable")
    slo = np.empty(m, dtype=np.float64)
    shi = np.empty(m, dtype=np.float64)
    clo = np.zeros(m + 1, dtype=np.float64)
    chi = np.zeros(m + 1, dtype=np.float64)
    cdef double[:] vlo = slo, vhi = shi, cl = clo, ch = chi
    for i in range(m):
        vlo[i] = lo[olo[i]]
        vhi[i] = hi[ohi[i]]
        cl[i + 1] = cl[i] + weight[olo[i]]
        ch[i + 1] = ch[i] + weight[ohi[i]]
    out = np.empty(m, dtype=np.float64)
    cdef double[:] o = out
    # queries visited in sorted order, so each count is a monotone sweep
    a = 0
    for i in range(m):
        b = ohi[i]
        while a < m and vlo[a] <= hi[b]:
            a += 1
        o[b] = cl[a]
    a = 0
    for i in range(m):
        b = olo[i]
        while a < m and vhi[a] < lo[b]:
            a += 1
        o[b] -= ch[a]
    return out
