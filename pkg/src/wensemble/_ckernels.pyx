# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same contracts as ``wensemble._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor

cnp.import_array()


def confusion_counts(actual, predicted, Py_ssize_t n_classes):
    cdef const cnp.int64_t[:] a = np.ascontiguousarray(actual, dtype=np.int64)
    cdef const cnp.int64_t[:] p = np.ascontiguousarray(predicted, dtype=np.int64)
    out = np.zeros((n_classes, n_classes), dtype=np.int64)
    cdef cnp.int64_t[:, :] cm = out
    cdef Py_ssize_t i
    for i in range(a.shape[0]):
        cm[a[i], p[i]] += 1
    return out


def roc_sweep(scores, positive):
    s_arr = np.asarray(scores, dtype=np.float64)
    order = np.argsort(-s_arr, kind="stable")
    cdef const double[:] s = np.ascontiguousarray(s_arr[order])
    cdef const cnp.uint8_t[:] lab = np.ascontiguousarray(
        np.asarray(positive, dtype=bool)[order], dtype=np.uint8)
    cdef Py_ssize_t n = s.shape[0]
    fp_out = np.zeros(n + 1, dtype=np.int64)
    tp_out = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[:] fpv = fp_out
    cdef cnp.int64_t[:] tpv = tp_out
    cdef cnp.int64_t tp = 0, fp = 0
    cdef Py_ssize_t i, m = 1
    for i in range(n):
        if lab[i]:
            tp += 1
        else:
            fp += 1
        if i == n - 1 or s[i + 1] != s[i]:
            fpv[m] = fp
            tpv[m] = tp
            m += 1
    return fp_out[:m], tp_out[:m]


def weighted_fuse(stack, weights):
    cdef const double[:, :, :] st = np.ascontiguousarray(stack, dtype=np.float64)
    cdef const double[:] w = np.ascontiguousarray(weights, dtype=np.float64)
    cdef Py_ssize_t K = st.shape[0], N = st.shape[1], C = st.shape[2]
    out = np.zeros((N, C), dtype=np.float64)
    cdef double[:, :] acc = out
    cdef Py_ssize_t i, j, k
    cdef double total
    for i in range(N):
        for k in range(K):
            for j in range(C):
                acc[i, j] = acc[i, j] + w[k] * st[k, i, j]
        total = 0.0
        for j in range(C):
            total = total + acc[i, j]
        for j in range(C):
            acc[i, j] = acc[i, j] / total
    return out


def nearest_remap(src, inv, offset, int fill):
    cdef const cnp.uint8_t[:, :, :] s = np.ascontiguousarray(src, dtype=np.uint8)
    cdef Py_ssize_t h = s.shape[0], w = s.shape[1], ch = s.shape[2]
    cdef double a00 = inv[0][0], a01 = inv[0][1]
    cdef double a10 = inv[1][0], a11 = inv[1][1]
    cdef double bx = offset[0], by = offset[1]
    cdef double cx = (w - 1) / 2.0
    cdef double cy = (h - 1) / 2.0
    out = np.full((h, w, ch), fill, dtype=np.uint8)
    cdef cnp.uint8_t[:, :, :] o = out
    cdef Py_ssize_t x, y, c, ix, iy
    cdef double dx, dy, fx, fy
    for y in range(h):
        dy = y - cy
        for x in range(w):
            dx = x - cx
            fx = floor(((a00 * dx + a01 * dy) + cx + bx) + 0.5)
            fy = floor(((a10 * dx + a11 * dy) + cy + by) + 0.5)
            if fx < 0 or fx >= w or fy < 0 or fy >= h:
                continue
            ix = <Py_ssize_t>fx
            iy = <Py_ssize_t>fy
            for c in range(ch):
                o[y, x, c] = s[iy, ix, c]
    return out
