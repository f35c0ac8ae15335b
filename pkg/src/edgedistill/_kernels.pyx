# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled dense forward/backward kernels; same contract as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport tanh

cnp.import_array()

BACKEND = "cython"


def linear_forward(const double[::1] params, const double[:, ::1] X, Py_ssize_t n_classes):
    cdef Py_ssize_t N = X.shape[0], D = X.shape[1], i, c, d
    cdef double acc
    out = np.empty((N, n_classes), dtype=np.float64)
    cdef double[:, ::1] Z = out
    cdef Py_ssize_t boff = n_classes * D
    for i in range(N):
        for c in range(n_classes):
            acc = params[boff + c]
            for d in range(D):
                acc += params[c * D + d] * X[i, d]
            Z[i, c] = acc
    return out


def linear_backward(const double[:, ::1] X, const double[:, ::1] G, Py_ssize_t n_classes):
    cdef Py_ssize_t N = X.shape[0], D = X.shape[1], i, c, d
    cdef double g
    out = np.zeros(n_classes * D + n_classes, dtype=np.float64)
    cdef double[::1] grad = out
    cdef Py_ssize_t boff = n_classes * D
    for i in range(N):
        for c in range(n_classes):
            g = G[i, c]
            grad[boff + c] += g
            for d in range(D):
                grad[c * D + d] += g * X[i, d]
    return out


cdef inline double _act(double v, int act) nogil:
    if act == 0:
        return v if v > 0.0 else 0.0
    return tanh(v)


def mlp_forward(const double[::1] params, const double[:, ::1] X, Py_ssize_t hidden,
                Py_ssize_t n_classes, int act):
    cdef Py_ssize_t N = X.shape[0], D = X.shape[1], i, h, c, d
    cdef Py_ssize_t ob1 = hidden * D, oW2 = ob1 + hidden, ob2 = oW2 + n_classes * hidden
    cdef double acc
    out = np.empty((N, n_classes), dtype=np.float64)
    cdef double[:, ::1] Z = out
    cdef double[::1] A = np.empty(hidden, dtype=np.float64)
    for i in range(N):
        for h in range(hidden):
            acc = params[ob1 + h]
            for d in range(D):
                acc += params[h * D + d] * X[i, d]
            A[h] = _act(acc, act)
        for c in range(n_classes):
            acc = params[ob2 + c]
            for h in range(hidden):
                acc += params[oW2 + c * hidden + h] * A[h]
            Z[i, c] = acc
    return out


def mlp_backward(const double[::1] params, const double[:, ::1] X, const double[:, ::1] G,
                 Py_ssize_t hidden, Py_ssize_t n_classes, int act):
    cdef Py_ssize_t N = X.shape[0], D = X.shape[1], i, h, c, d
    cdef Py_ssize_t ob1 = hidden * D, oW2 = ob1 + hidden, ob2 = oW2 + n_classes * hidden
    cdef double acc, g, da
    out = np.zeros(ob2 + n_classes, dtype=np.float64)
    cdef double[::1] grad = out
    cdef double[::1] pre = np.empty(hidden, dtype=np.float64)
    cdef double[::1] A = np.empty(hidden, dtype=np.float64)
    for i in range(N):
        for h in range(hidden):
            acc = params[ob1 + h]
            for d in range(D):
                acc += params[h * D + d] * X[i, d]
            pre[h] = acc
            A[h] = _act(acc, act)
        for c in range(n_classes):
            g = G[i, c]
            grad[ob2 + c] += g
            for h in range(hidden):
                grad[oW2 + c * hidden + h] += g * A[h]
        for h in range(hidden):
            da = 0.0
            for c in range(n_classes):
                da += G[i, c] * params[oW2 + c * hidden + h]
            if act == 0:
                if pre[h] <= 0.0:
                    continue
            else:
                da *= 1.0 - A[h] * A[h]
            grad[ob1 + h] += da
            for d in range(D):
                grad[h * D + d] += da * X[i, d]
    return out
