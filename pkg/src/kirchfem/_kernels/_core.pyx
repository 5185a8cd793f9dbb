# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-element quadrature kernels.

These loops sit inside every nonlinear residual, tangent and functional
evaluation, so they run thousands of times per solve; the NumPy fallback in
``_fallback.py`` implements the same contracts.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def interp_at_qp(const double[::1] u_full, const cnp.int64_t[:, ::1] conn, const double[:, ::1] phi):
    cdef Py_ssize_t ne = conn.shape[0]
    cdef Py_ssize_t nl = conn.shape[1]
    cdef Py_ssize_t nq = phi.shape[1]
    out = np.empty((ne, nq), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef Py_ssize_t e, l, q
    cdef double acc
    with nogil:
        for e in range(ne):
            for q in range(nq):
                acc = 0.0
                for l in range(nl):
                    acc += u_full[conn[e, l]] * phi[l, q]
                o[e, q] = acc
    return out


def scatter_load(const cnp.int64_t[:, ::1] conn, const double[:, ::1] phi,
                 const double[:, ::1] wq, const double[:, ::1] fq, Py_ssize_t n_nodes):
    cdef Py_ssize_t ne = conn.shape[0]
    cdef Py_ssize_t nl = conn.shape[1]
    cdef Py_ssize_t nq = phi.shape[1]
    out = np.zeros(n_nodes, dtype=np.float64)
    cdef double[::1] b = out
    cdef Py_ssize_t e, l, q
    cdef double acc, w
    with nogil:
        for e in range(ne):
            for l in range(nl):
                acc = 0.0
                for q in range(nq):
                    acc += wq[e, q] * fq[e, q] * phi[l, q]
                b[conn[e, l]] += acc
    return out


def tangent_element_values(const double[:, ::1] phi, const double[:, ::1] wq, const double[:, ::1] fpq):
    cdef Py_ssize_t nl = phi.shape[0]
    cdef Py_ssize_t nq = phi.shape[1]
    cdef Py_ssize_t ne = wq.shape[0]
    out = np.zeros((ne, nl, nl), dtype=np.float64)
    cdef double[:, :, ::1] v = out
    cdef Py_ssize_t e, i, j, q
    cdef double w
    with nogil:
        for e in range(ne):
            for q in range(nq):
                w = wq[e, q] * fpq[e, q]
                for i in range(nl):
                    for j in range(nl):
                        v[e, i, j] += w * phi[i, q] * phi[j, q]
    return out
