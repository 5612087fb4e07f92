# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner kernels for the split-operator stepping loop.

These fuse the elementwise phase/mask multiplications so the FFT is the
only remaining per-step cost. A numpy implementation with identical
signatures lives in ``_kernels_py``; the package selects one at import.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def apply_rank_one(cnp.complex128_t[:, ::1] psi,
                   cnp.complex128_t[::1] row,
                   cnp.complex128_t[::1] col):
    """psi[i, j] *= row[i] * col[j] in place (separable phase factor)."""
    cdef Py_ssize_t n1 = psi.shape[0], n2 = psi.shape[1]
    cdef Py_ssize_t i, j
    cdef double complex r
    with nogil:
        for i in range(n1):
            r = row[i]
            for j in range(n2):
                psi[i, j] = psi[i, j] * r * col[j]


def apply_field(cnp.complex128_t[:, ::1] psi,
                cnp.complex128_t[:, ::1] field):
    """psi *= field in place (non-separable factor, e.g. kinetic phase)."""
    cdef Py_ssize_t n1 = psi.shape[0], n2 = psi.shape[1]
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n1):
            for j in range(n2):
                psi[i, j] = psi[i, j] * field[i, j]


def apply_mask_rank_one(cnp.complex128_t[:, ::1] psi,
                        cnp.float64_t[::1] row,
                        cnp.float64_t[::1] col):
    """psi[i, j] *= row[i] * col[j] in place (real separable mask)."""
    cdef Py_ssize_t n1 = psi.shape[0], n2 = psi.shape[1]
    cdef Py_ssize_t i, j
    cdef double r
    with nogil:
        for i in range(n1):
            r = row[i]
            for j in range(n2):
                psi[i, j] = psi[i, j] * (r * col[j])


def norm_sq(cnp.complex128_t[:, ::1] psi):
    """Sum of |psi|^2 over the grid (no cell-area factor)."""
    cdef Py_ssize_t n1 = psi.shape[0], n2 = psi.shape[1]
    cdef Py_ssize_t i, j
    cdef double acc = 0.0
    cdef double complex z
    with nogil:
        for i in range(n1):
            for j in range(n2):
                z = psi[i, j]
                acc += z.real * z.real + z.imag * z.imag
    return acc


def overlap(cnp.complex128_t[:, ::1] a, cnp.complex128_t[:, ::1] b):
    """Sum of conj(a) * b over the grid (no cell-area factor)."""
    cdef Py_ssize_t n1 = a.shape[0], n2 = a.shape[1]
    cdef Py_ssize_t i, j
    cdef double re = 0.0, im = 0.0
    cdef double complex z
    with nogil:
        for i in range(n1):
            for j in range(n2):
                z = a[i, j].conjugate() * b[i, j]
                re += z.real
                im += z.imag
    return complex(re, im)
