# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the batched kernels in ``_ops_py``.

Operation order matches the NumPy reference exactly so both backends
return bit-identical arrays.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, floor, fmod

cnp.import_array()


cdef inline double _frac(double u) nogil:
    cdef double m = fmod(u, 1.0)
    if m != 0.0 and m < 0.0:
        m += 1.0
    return m


def fold_batch(double[:, ::1] x, double[::1] lam):
    cdef Py_ssize_t b = x.shape[0], n = x.shape[1], i, k
    cdef double tl, u
    out_arr = np.empty((b, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(b):
        tl = 2.0 * lam[i]
        for k in range(n):
            u = x[i, k] / tl + 0.5
            out[i, k] = tl * (_frac(u) - 0.5)
    return out_arr


def quantize_batch(double[:, ::1] x, double[::1] lam, int bits):
    cdef Py_ssize_t b = x.shape[0], n = x.shape[1], i, k
    cdef double lo = -(<double> (1 << (bits - 1)))
    cdef double hi = (<double> (1 << (bits - 1))) - 1.0
    cdef double q0, u, idx
    out_arr = np.empty((b, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(b):
        q0 = 2.0 * lam[i] / (<double> (1 << bits))
        for k in range(n):
            u = x[i, k] / q0
            if x[i, k] > 0.0:
                idx = floor(u)
            else:
                idx = ceil(u) - 1.0
            if idx < lo:
                idx = lo
            if idx > hi:
                idx = hi
            out[i, k] = (idx + 0.5) * q0
    return out_arr


def diff_batch(x, int order):
    cdef cnp.ndarray[double, ndim=2] cur = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t b, n, i, k, r
    cdef double[:, ::1] src, dst
    for r in range(order):
        b = cur.shape[0]
        n = cur.shape[1] - 1
        nxt = np.empty((b, n), dtype=np.float64)
        src = cur
        dst = nxt
        for i in range(b):
            for k in range(n):
                dst[i, k] = src[i, k + 1] - src[i, k]
        cur = nxt
    return cur


def cumsum0_batch(double[:, ::1] x):
    cdef Py_ssize_t b = x.shape[0], n = x.shape[1], i, k
    cdef double acc
    out_arr = np.empty((b, n + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(b):
        acc = 0.0
        out[i, 0] = 0.0
        for k in range(n):
            acc = acc + x[i, k]
            out[i, k + 1] = acc
    return out_arr


def round_2lam_batch(double[:, ::1] x, double[::1] lam):
    cdef Py_ssize_t b = x.shape[0], n = x.shape[1], i, k
    cdef double tl
    out_arr = np.empty((b, n), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for i in range(b):
        tl = 2.0 * lam[i]
        for k in range(n):
            out[i, k] = tl * ceil(floor(x[i, k] / lam[i]) / 2.0)
    return out_arr


def unfold_batch(s, lam, beta, int order, Py_ssize_t j_idx):
    cdef cnp.ndarray[double, ndim=2] cur = np.ascontiguousarray(s, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] lam_a = np.ascontiguousarray(lam, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] beta_a = np.ascontiguousarray(beta, dtype=np.float64)
    cdef Py_ssize_t b, n, i, k, r
    cdef double acc, acc2, st1, stj, kap, tl
    cdef double[:, ::1] src, dst
    cdef double[::1] lv = lam_a, bv = beta_a
    for r in range(order - 1):
        b = cur.shape[0]
        n = cur.shape[1]
        t = cumsum0_batch(cur)
        st = cumsum0_batch(t)
        nxt = np.empty((b, n + 1), dtype=np.float64)
        src = t
        dst = nxt
        for i in range(b):
            st1 = st[i, 1]
            stj = st[i, j_idx + 1]
            kap = floor((st1 - stj) / (12.0 * bv[i]) + 0.5)
            tl = 2.0 * lv[i]
            for k in range(n + 1):
                dst[i, k] = tl * ceil(floor(src[i, k] / lv[i]) / 2.0) + tl * kap
        cur = nxt
    return cumsum0_batch(cur)
