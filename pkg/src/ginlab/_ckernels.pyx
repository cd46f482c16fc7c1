# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Same contracts as ``ginlab._pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, fabs, sqrt, INFINITY

cnp.import_array()

ctypedef double complex cplx


cdef inline double cabs2(cplx z) nogil:
    return z.real * z.real + z.imag * z.imag


def pfaffian_batch(a):
    cdef cnp.ndarray[cplx, ndim=3] w = np.array(a, dtype=np.complex128, copy=True, order="C")
    cdef Py_ssize_t nb = w.shape[0], n = w.shape[1]
    cdef cnp.ndarray[cplx, ndim=1] mant = np.ones(nb, dtype=np.complex128)
    cdef cnp.ndarray[double, ndim=1] logs = np.zeros(nb)
    cdef Py_ssize_t b, k, i, j, kp
    cdef double best, m
    cdef cplx piv, tmp, tau_i, ci
    cdef cplx[:, :, ::1] A = w
    if n % 2 == 1:
        return np.zeros(nb, dtype=np.complex128), logs
    with nogil:
        for b in range(nb):
            k = 0
            while k < n - 1:
                kp = k + 1
                best = cabs2(A[b, k + 1, k])
                for i in range(k + 2, n):
                    m = cabs2(A[b, i, k])
                    if m > best:
                        best = m
                        kp = i
                if kp != k + 1:
                    for j in range(k, n):
                        tmp = A[b, k + 1, j]
                        A[b, k + 1, j] = A[b, kp, j]
                        A[b, kp, j] = tmp
                    for i in range(k, n):
                        tmp = A[b, i, k + 1]
                        A[b, i, k + 1] = A[b, i, kp]
                        A[b, i, kp] = tmp
                    mant[b] = -mant[b]
                piv = A[b, k, k + 1]
                if piv == 0:
                    mant[b] = 0
                    logs[b] = 0
                    break
                m = sqrt(cabs2(piv))
                mant[b] = mant[b] * (piv / m)
                logs[b] += log(m)
                # row k is retired after this step; reuse it for tau
                for j in range(k + 2, n):
                    A[b, k, j] = A[b, k, j] / piv
                for i in range(k + 2, n):
                    tau_i = A[b, k, i]
                    ci = A[b, i, k + 1]
                    for j in range(k + 2, n):
                        A[b, i, j] += tau_i * A[b, j, k + 1] - ci * A[b, k, j]
                k += 2
    return mant, logs


def band_lu_factor(cnp.ndarray[cplx, ndim=2] a, Py_ssize_t bw):
    cdef Py_ssize_t n = a.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] pv = np.arange(n, dtype=np.intp)
    cdef cplx[:, ::1] A = a
    cdef Py_ssize_t j, i, c, p, last
    cdef double best, m
    cdef cplx d, tmp, l
    with nogil:
        for j in range(n - 1):
            last = j + bw + 1
            if last > n:
                last = n
            p = j
            best = cabs2(A[j, j])
            for i in range(j + 1, last):
                m = cabs2(A[i, j])
                if m > best:
                    best = m
                    p = i
            pv[j] = p
            if p != j:
                for c in range(j, n):
                    tmp = A[j, c]
                    A[j, c] = A[p, c]
                    A[p, c] = tmp
            d = A[j, j]
            if d == 0:
                continue
            for i in range(j + 1, last):
                l = A[i, j] / d
                A[i, j] = l
                for c in range(j + 1, n):
                    A[i, c] -= l * A[j, c]
    return pv


def band_lu_forward(cnp.ndarray[cplx, ndim=2] lu, cnp.ndarray[cnp.intp_t, ndim=1] piv,
                    Py_ssize_t bw, cnp.ndarray[cplx, ndim=1] b):
    cdef Py_ssize_t n = lu.shape[0]
    cdef cplx[:, ::1] L = lu
    cdef cplx[::1] x = b
    cdef Py_ssize_t j, i, p, last
    cdef cplx tmp
    with nogil:
        for j in range(n - 1):
            p = piv[j]
            if p != j:
                tmp = x[j]
                x[j] = x[p]
                x[p] = tmp
            last = j + bw + 1
            if last > n:
                last = n
            for i in range(j + 1, last):
                x[i] -= L[i, j] * x[j]
    return b


def pair_conjugates(ev, double tol):
    cdef cnp.ndarray[cplx, ndim=1] e = np.ascontiguousarray(ev, dtype=np.complex128)
    cdef Py_ssize_t n = e.shape[0]
    cdef cnp.ndarray[cnp.intp_t, ndim=1] partner = np.full(n, -1, dtype=np.intp)
    cdef cnp.ndarray[cnp.intp_t, ndim=1] order = np.argsort(-np.abs(e.imag), kind="stable").astype(np.intp)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] free = np.ones(n, dtype=np.uint8)
    cdef Py_ssize_t a, i, j, best_j
    cdef double best, d, tol2 = tol * tol
    cdef bint ok = True
    cdef cplx ci
    with nogil:
        for a in range(n):
            i = order[a]
            if not free[i]:
                continue
            free[i] = 0
            ci = e[i].real - 1j * e[i].imag
            best = INFINITY
            best_j = -1
            for j in range(n):
                if free[j]:
                    d = cabs2(e[j] - ci)
                    if d < best:
                        best = d
                        best_j = j
            if best_j < 0:
                ok = False
                break
            if best > tol2:
                ok = False
            free[best_j] = 0
            partner[i] = best_j
            partner[best_j] = i
    return partner, bool(ok)
