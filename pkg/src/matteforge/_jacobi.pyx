# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Jacobi sweeps for foreground re-estimation."""
import numpy as np
cimport cython
from cython.parallel cimport prange


def jacobi_iterate(fhat, data, weights, den, long iters, int threads=0):
    """Run ``iters`` simultaneous sweeps; same contract as the NumPy fallback."""
    cdef double[:, :, ::1] src = np.array(fhat, dtype=np.float64, order="C", copy=True)
    cdef double[:, :, ::1] dst = np.array(src, copy=True)
    cdef double[:, :, ::1] d = np.ascontiguousarray(data, dtype=np.float64)
    cdef double[:, :, ::1] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef double[:, ::1] dn = np.ascontiguousarray(den, dtype=np.float64)
    cdef Py_ssize_t h = src.shape[0], wd = src.shape[1]
    cdef Py_ssize_t y, x, c
    cdef long t
    cdef double num
    cdef double[:, :, ::1] tmp
    cdef int nthreads = threads if threads > 0 else 1
    for t in range(iters):
        for y in prange(h, nogil=True, num_threads=nthreads, schedule="static"):
            for x in range(wd):
                if dn[y, x] <= 0.0:
                    for c in range(3):
                        dst[y, x, c] = src[y, x, c]
                    continue
                for c in range(3):
                    num = d[y, x, c]
                    if y > 0:
                        num = num + w[0, y, x] * src[y - 1, x, c]
                    if y < h - 1:
                        num = num + w[1, y, x] * src[y + 1, x, c]
                    if x > 0:
                        num = num + w[2, y, x] * src[y, x - 1, c]
                    if x < wd - 1:
                        num = num + w[3, y, x] * src[y, x + 1, c]
                    dst[y, x, c] = num / dn[y, x]
        tmp = src
        src = dst
        dst = tmp
    return np.asarray(src)
