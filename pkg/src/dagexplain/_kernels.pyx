# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled split search.  Same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log2, NAN

cnp.import_array()


cdef inline double _ent(double c1, double n) nogil:
    cdef double out = 0.0, p
    if c1 > 0:
        p = c1 / n
        out -= p * log2(p)
    if n - c1 > 0:
        p = (n - c1) / n
        out -= p * log2(p)
    return out


cdef inline double _gain(double l1, double nl, double r1, double nr, double h) nogil:
    cdef double n = nl + nr
    cdef double gain = h - (nl / n) * _ent(l1, nl) - (nr / n) * _ent(r1, nr)
    if gain < 0:
        gain = 0.0
    return gain


cdef inline double _gr(double l1, double nl, double r1, double nr, double h) nogil:
    return _gain(l1, nl, r1, nr, h) / _ent(nl, nl + nr)


def gain_ratio_counts(long l0, long l1, long r0, long r1):
    cdef double nl = l0 + l1, nr = r0 + r1
    if nl == 0 or nr == 0:
        return 0.0
    cdef double h = _ent(l1 + r1, nl + nr)
    if h == 0.0:
        return 0.0
    return _gr(l1, nl, r1, nr, h)


def best_split(double[:, :] X, y, features, bint use_gain_ratio=True):
    cdef Py_ssize_t n = X.shape[0], i
    cdef long f, best_f = -1
    cdef double best_t = NAN, best_gr = -1.0, gr, h, l1, total1
    cdef cnp.int64_t[:] yv = np.ascontiguousarray(y, dtype=np.int64)
    cdef cnp.int64_t[:] order
    cdef double[:] xs = np.empty(n, dtype=np.float64)
    cdef cnp.int64_t[:] ys = np.empty(n, dtype=np.int64)
    if n < 2:
        return (-1, NAN, -1.0)
    total1 = 0
    for i in range(n):
        total1 += yv[i]
    h = _ent(total1, n)
    for f in features:
        order = np.argsort(np.asarray(X[:, f]), kind="stable").astype(np.int64)
        for i in range(n):
            xs[i] = X[order[i], f]
            ys[i] = yv[order[i]]
        l1 = 0
        for i in range(n - 1):
            l1 += ys[i]
            if xs[i] == xs[i + 1]:
                continue
            if h == 0.0:
                gr = 0.0
            elif use_gain_ratio:
                gr = _gr(l1, i + 1, total1 - l1, n - i - 1, h)
            else:
                gr = _gain(l1, i + 1, total1 - l1, n - i - 1, h)
            if gr > best_gr:
                best_gr = gr
                best_f = f
                best_t = (xs[i] + xs[i + 1]) / 2.0
    return (int(best_f), float(best_t), float(best_gr))
