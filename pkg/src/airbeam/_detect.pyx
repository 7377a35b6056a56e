# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled exhaustive-search detection kernels.

Hypothesis tables have shape ``(spatial, symbol_vectors, antennas)``:
``table[r, h, j]`` is the noiseless sample antenna ``j`` would see under
spatial hypothesis ``r`` and symbol vector ``h``. Ties resolve to the first
hypothesis in ``(r, h)`` order.
"""
import numpy as np

from libc.math cimport INFINITY


def ml_detect_batch(const double complex[:, ::1] y, const double complex[:, :, ::1] table):
    cdef Py_ssize_t nf = y.shape[0]
    cdef Py_ssize_t na = y.shape[1]
    cdef Py_ssize_t nr = table.shape[0]
    cdef Py_ssize_t nh = table.shape[1]
    if table.shape[2] != na:
        raise ValueError("table antenna axis does not match y")
    r_out = np.empty(nf, dtype=np.intp)
    h_out = np.empty(nf, dtype=np.intp)
    cdef Py_ssize_t[::1] rv = r_out
    cdef Py_ssize_t[::1] hv = h_out
    cdef Py_ssize_t f, r, h, j, br, bh
    cdef double best, d, re, im
    with nogil:
        for f in range(nf):
            best = INFINITY
            br = 0
            bh = 0
            for r in range(nr):
                for h in range(nh):
                    d = 0.0
                    for j in range(na):
                        re = y[f, j].real - table[r, h, j].real
                        im = y[f, j].imag - table[r, h, j].imag
                        d = d + (re * re + im * im)
                    if d < best:
                        best = d
                        br = r
                        bh = h
            rv[f] = br
            hv[f] = bh
    return r_out, h_out, nf * nr * nh, nf * nr * nh * na


def greedy_detect_batch(const double complex[:, ::1] y, const double complex[:, :, ::1] table):
    cdef Py_ssize_t nf = y.shape[0]
    cdef Py_ssize_t na = y.shape[1]
    cdef Py_ssize_t nh = table.shape[1]
    if table.shape[0] != na or table.shape[2] != na:
        raise ValueError("greedy detection needs one spatial hypothesis per antenna")
    r_out = np.empty(nf, dtype=np.intp)
    h_out = np.empty(nf, dtype=np.intp)
    cdef Py_ssize_t[::1] rv = r_out
    cdef Py_ssize_t[::1] hv = h_out
    cdef Py_ssize_t f, h, j, br, bh
    cdef double best, d, re, im
    with nogil:
        for f in range(nf):
            best = -1.0
            br = 0
            for j in range(na):
                d = y[f, j].real * y[f, j].real + y[f, j].imag * y[f, j].imag
                if d > best:
                    best = d
                    br = j
            best = INFINITY
            bh = 0
            for h in range(nh):
                re = y[f, br].real - table[br, h, br].real
                im = y[f, br].imag - table[br, h, br].imag
                d = re * re + im * im
                if d < best:
                    best = d
                    bh = h
            rv[f] = br
            hv[f] = bh
    return r_out, h_out, nf * nh, nf * na
