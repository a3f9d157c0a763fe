# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels mirroring eocloak._pykernels row by row.

Each output row is computed independently so the prange schedule cannot
change results.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport log, sin, M_PI

cnp.import_array()

cdef double INV2PI = 0.5 / M_PI


def log_remainder(const double[:, ::1] points, const double[::1] speed,
                  const double[::1] t):
    cdef Py_ssize_t n = points.shape[0], i, j
    cdef double dx, dy, s
    out = np.empty((n, n))
    cdef double[:, ::1] o = out
    for i in prange(n, nogil=True):
        for j in range(n):
            if i == j:
                o[i, j] = log(speed[i])
            else:
                dx = points[i, 0] - points[j, 0]
                dy = points[i, 1] - points[j, 1]
                s = sin(0.5 * (t[i] - t[j]))
                o[i, j] = 0.5 * log((dx * dx + dy * dy) / (4.0 * s * s))
    return out


def normal_derivative(const double[:, ::1] targets, const double[:, ::1] tnormals,
                      const double[:, ::1] sources, const double[::1] sweights):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    cdef double dx, dy
    out = np.empty((m, n))
    cdef double[:, ::1] o = out
    for i in prange(m, nogil=True):
        for j in range(n):
            dx = targets[i, 0] - sources[j, 0]
            dy = targets[i, 1] - sources[j, 1]
            o[i, j] = INV2PI * (dx * tnormals[i, 0] + dy * tnormals[i, 1]) \
                / (dx * dx + dy * dy) * sweights[j]
    return out


def np_adjoint(const double[:, ::1] points, const double[:, ::1] normals,
               const double[::1] curvature, const double[::1] weights):
    cdef Py_ssize_t n = points.shape[0], i, j
    cdef double dx, dy
    out = np.empty((n, n))
    cdef double[:, ::1] o = out
    for i in prange(n, nogil=True):
        for j in range(n):
            if i == j:
                o[i, j] = 0.25 / M_PI * curvature[i] * weights[i]
            else:
                dx = points[i, 0] - points[j, 0]
                dy = points[i, 1] - points[j, 1]
                o[i, j] = INV2PI * (dx * normals[i, 0] + dy * normals[i, 1]) \
                    / (dx * dx + dy * dy) * weights[j]
    return out


def potential_matrices(const double[:, ::1] targets, const double[:, ::1] sources,
                       const double[::1] sweights):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    cdef double dx, dy, r2, w
    val = np.empty((m, n))
    gx = np.empty((m, n))
    gy = np.empty((m, n))
    cdef double[:, ::1] v = val, a = gx, b = gy
    for i in prange(m, nogil=True):
        for j in range(n):
            dx = targets[i, 0] - sources[j, 0]
            dy = targets[i, 1] - sources[j, 1]
            r2 = dx * dx + dy * dy
            w = INV2PI * sweights[j]
            v[i, j] = 0.5 * log(r2) * w
            a[i, j] = dx / r2 * w
            b[i, j] = dy / r2 * w
    return val, gx, gy


def potential_apply(const double[:, ::1] targets, const double[:, ::1] sources,
                    const double[::1] wdens, chunk=None):
    cdef Py_ssize_t m = targets.shape[0], n = sources.shape[0], i, j
    cdef double dx, dy, r2, sv, sa, sb
    val = np.empty(m)
    gx = np.empty(m)
    gy = np.empty(m)
    cdef double[::1] v = val, a = gx, b = gy
    for i in prange(m, nogil=True):
        sv = 0.0
        sa = 0.0
        sb = 0.0
        for j in range(n):
            dx = targets[i, 0] - sources[j, 0]
            dy = targets[i, 1] - sources[j, 1]
            r2 = dx * dx + dy * dy
            sv = sv + 0.5 * log(r2) * wdens[j]
            sa = sa + dx / r2 * wdens[j]
            sb = sb + dy / r2 * wdens[j]
        v[i] = INV2PI * sv
        a[i] = INV2PI * sa
        b[i] = INV2PI * sb
    return val, gx, gy
