# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch kernel: log|det B_N(x)| for many x without Python overhead.

Assembly and the LU factorization run under ``nogil`` so chunked calls can
be spread over threads.  The banded path (dgbtrf) is used when the symbol
bandwidth is small against the window, the dense path (dgetrf) otherwise.
"""

from libc.math cimport sin, cos, round, log, fabs, M_PI, INFINITY
from libc.stdlib cimport malloc, free

from scipy.linalg.cython_lapack cimport dgbtrf, dgetrf

import numpy as np


def batch_logabsdet(double[::1] xs, int n_sites, double omega, double[::1] taps):
    """log|det B(x)| over the window [0, n_sites) for each x in xs.

    taps[d] is the cosine-factor coefficient at diagonal offset d (taps[0]
    carries the energy shift).  Returns -inf where a pivot is exactly zero.
    """
    cdef Py_ssize_t m = xs.shape[0]
    out = np.empty(m, dtype=np.float64)
    if m == 0:
        return out
    cdef double[::1] ov = out
    cdef int n = n_sites
    cdef int r = taps.shape[0] - 1
    while r > 0 and taps[r] == 0.0:
        r -= 1
    cdef bint banded = r > 0 and 6 * r * r < n * n
    cdef int kl = r, ku = r, ldab = 3 * r + 1, info = 0
    cdef Py_ssize_t p
    cdef int i, j, lo, hi
    cdef double th, acc, x
    cdef double *ab = NULL
    cdef double *dense = NULL
    cdef double *sv = <double*>malloc(sizeof(double) * n)
    cdef double *cv = <double*>malloc(sizeof(double) * n)
    cdef int *ipiv = <int*>malloc(sizeof(int) * n)
    if banded:
        ab = <double*>malloc(sizeof(double) * ldab * n)
    elif r > 0:
        dense = <double*>malloc(sizeof(double) * n * n)
    if sv == NULL or cv == NULL or ipiv == NULL or (banded and ab == NULL) or (r > 0 and not banded and dense == NULL):
        free(ab); free(dense); free(sv); free(cv); free(ipiv)
        raise MemoryError()

    with nogil:
        for p in range(m):
            x = xs[p]
            for i in range(n):
                th = x + i * omega
                th -= round(th)
                sv[i] = sin(M_PI * th)
                cv[i] = cos(M_PI * th)
            if r == 0:
                acc = 0.0
                for i in range(n):
                    acc += log(fabs(sv[i] + cv[i] * taps[0]))
                ov[p] = acc
            elif banded:
                for j in range(n):
                    lo = j - ku
                    if lo < 0:
                        lo = 0
                    hi = j + kl
                    if hi > n - 1:
                        hi = n - 1
                    for i in range(lo, hi + 1):
                        ab[j * ldab + kl + ku + i - j] = cv[i] * taps[i - j if i > j else j - i]
                    ab[j * ldab + kl + ku] += sv[j]
                info = 0
                dgbtrf(&n, &n, &kl, &ku, ab, &ldab, ipiv, &info)
                if info > 0:
                    ov[p] = -INFINITY
                else:
                    acc = 0.0
                    for j in range(n):
                        acc += log(fabs(ab[j * ldab + kl + ku]))
                    ov[p] = acc
            else:
                for j in range(n):
                    for i in range(n):
                        if i == j:
                            dense[j * n + i] = sv[i] + cv[i] * taps[0]
                        elif (i - j if i > j else j - i) <= r:
                            dense[j * n + i] = cv[i] * taps[i - j if i > j else j - i]
                        else:
                            dense[j * n + i] = 0.0
                info = 0
                dgetrf(&n, &n, dense, &n, ipiv, &info)
                if info > 0:
                    ov[p] = -INFINITY
                else:
                    acc = 0.0
                    for j in range(n):
                        acc += log(fabs(dense[j * n + j]))
                    ov[p] = acc

    free(ab); free(dense); free(sv); free(cv); free(ipiv)
    return out
