# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: plane-wave synthesis and Crank-Nicolson stepping."""
import numpy as np
cimport numpy as cnp
from libc.math cimport cos, fabs, sin

cnp.import_array()

cdef enum:
    ANCHOR = 128

cdef double TINY = 1e-250


def phase_sum(double x0, double dx, Py_ssize_t n, double[::1] ks,
              double complex[::1] coef):
    """out[i] = sum_j coef[j] exp(i ks[j] (x0 + i dx)) on a uniform grid.

    Each column is generated by complex rotation and re-anchored with an
    exact exponential every ANCHOR points, so rounding stays near 1e-14.
    """
    cdef Py_ssize_t nk = ks.shape[0]
    cdef Py_ssize_t i, j, start, stop
    cdef double kj, ph
    cdef double complex z, step
    out_arr = np.zeros(n, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    for j in range(nk):
        kj = ks[j]
        step = cos(kj * dx) + 1j * sin(kj * dx)
        start = 0
        while start < n:
            stop = start + ANCHOR
            if stop > n:
                stop = n
            ph = kj * (x0 + start * dx)
            z = coef[j] * (cos(ph) + 1j * sin(ph))
            for i in range(start, stop):
                out[i] += z
                z = z * step
            start = stop
    return out_arr


def cn_propagate(double complex[::1] psi, Py_ssize_t nsteps,
                 double complex[::1] a_diag, double complex a_off,
                 double complex[::1] b_diag, double complex b_off):
    """Advance psi by nsteps of A psi_new = B psi_old (tridiagonal, constant off-diagonals).

    Dirichlet ends: psi holds interior nodes only. Amplitudes below TINY
    are flushed to zero; subnormal arithmetic would otherwise dominate the
    cost in the far tails of a Gaussian.
    """
    cdef Py_ssize_t n = psi.shape[0]
    cdef Py_ssize_t i, s
    cp_arr = np.empty(n, dtype=np.complex128)
    inv_arr = np.empty(n, dtype=np.complex128)
    r_arr = np.empty(n, dtype=np.complex128)
    out_arr = np.array(psi, dtype=np.complex128, copy=True)
    cdef double complex[::1] cp = cp_arr
    cdef double complex[::1] inv = inv_arr
    cdef double complex[::1] r = r_arr
    cdef double complex[::1] u = out_arr
    cdef double complex den, z

    # Thomas factorization is reused for every step.
    den = a_diag[0]
    inv[0] = 1.0 / den
    cp[0] = a_off * inv[0]
    for i in range(1, n):
        den = a_diag[i] - a_off * cp[i - 1]
        inv[i] = 1.0 / den
        cp[i] = a_off * inv[i]

    for s in range(nsteps):
        r[0] = b_diag[0] * u[0] + b_off * u[1]
        for i in range(1, n - 1):
            r[i] = b_diag[i] * u[i] + b_off * (u[i - 1] + u[i + 1])
        r[n - 1] = b_diag[n - 1] * u[n - 1] + b_off * u[n - 2]
        r[0] = r[0] * inv[0]
        for i in range(1, n):
            r[i] = (r[i] - a_off * r[i - 1]) * inv[i]
        u[n - 1] = r[n - 1]
        for i in range(n - 2, -1, -1):
            z = r[i] - cp[i] * u[i + 1]
            if fabs(z.real) + fabs(z.imag) < TINY:
                z = 0.0
            u[i] = z
    return out_arr


def sample_transform(double x0, double dx, double complex[::1] vals,
                     double[::1] ks):
    """out[j] = sum_i vals[i] exp(-i ks[j] (x0 + i dx)), by Horner's rule."""
    cdef Py_ssize_t n = vals.shape[0]
    cdef Py_ssize_t nk = ks.shape[0]
    cdef Py_ssize_t i, j
    cdef double kj, ph
    cdef double complex z, acc
    out_arr = np.empty(nk, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    for j in range(nk):
        kj = ks[j]
        z = cos(kj * dx) - 1j * sin(kj * dx)
        acc = 0.0
        for i in range(n - 1, -1, -1):
            acc = acc * z + vals[i]
        ph = kj * x0
        out[j] = acc * (cos(ph) - 1j * sin(ph))
    return out_arr
