# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: CSR products, Kronecker-sum terms, banded Cholesky.

Band layout (shared with the Python fallback): ``Lb[i, bw - d] = L[i, i - d]``
for ``0 <= d <= bw``; entries reaching before column 0 are zero.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

from .errors import NotSPDError

NAME = "cython"


def csr_matvec(const int[::1] indptr, const int[::1] indices, const double[::1] data,
               const double[::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, jj
    cdef double acc
    out = np.empty(n)
    cdef double[::1] y = out
    with nogil:
        for i in range(n):
            acc = 0.0
            for jj in range(indptr[i], indptr[i + 1]):
                acc = acc + data[jj] * x[indices[jj]]
            y[i] = acc
    return out


def kron_term_apply(const int[::1] g_indptr, const int[::1] g_indices, const double[::1] g_data,
                    const int[::1] a_indptr, const int[::1] a_indices, const double[::1] a_data,
                    const double[:, ::1] V, double[:, ::1] Y):
    """Accumulate ``Y += G V A^T`` (block j gains sum_k G[j,k] A V[k])."""
    cdef Py_ssize_t ns = V.shape[0]
    cdef Py_ssize_t nphy = V.shape[1]
    cdef Py_ssize_t j, kk, k, s, tt
    cdef double g, acc
    z_arr = np.empty(nphy)
    cdef double[::1] z = z_arr
    with nogil:
        for j in range(ns):
            if g_indptr[j] == g_indptr[j + 1]:
                continue
            for s in range(nphy):
                z[s] = 0.0
            for kk in range(g_indptr[j], g_indptr[j + 1]):
                k = g_indices[kk]
                g = g_data[kk]
                for s in range(nphy):
                    z[s] = z[s] + g * V[k, s]
            for s in range(nphy):
                acc = 0.0
                for tt in range(a_indptr[s], a_indptr[s + 1]):
                    acc = acc + a_data[tt] * z[a_indices[tt]]
                Y[j, s] = Y[j, s] + acc


def band_cholesky(const double[:, ::1] Ab):
    """Row-oriented Cholesky of a symmetric band matrix given by its lower band."""
    cdef Py_ssize_t n = Ab.shape[0]
    cdef Py_ssize_t bw = Ab.shape[1] - 1
    cdef Py_ssize_t i, j, k, lo
    cdef double s
    cdef Py_ssize_t bad = -1
    out = np.zeros((n, bw + 1))
    cdef double[:, ::1] L = out
    with nogil:
        for i in range(n):
            lo = i - bw if i > bw else 0
            for j in range(lo, i + 1):
                s = Ab[i, bw - (i - j)]
                k = lo if lo > j - bw else j - bw
                while k < j:
                    s = s - L[i, bw - (i - k)] * L[j, bw - (j - k)]
                    k = k + 1
                if j == i:
                    if s <= 0.0:
                        bad = i
                        break
                    L[i, bw] = sqrt(s)
                else:
                    L[i, bw - (i - j)] = s / L[j, bw]
            if bad >= 0:
                break
    if bad >= 0:
        raise NotSPDError(f"non-positive pivot at row {bad}")
    return out


def band_prepare(Lb):
    return np.ascontiguousarray(Lb, dtype=np.float64)


def band_solve_rows(const double[:, ::1] L, double[:, ::1] B):
    """Overwrite each row b of ``B`` with the solution of ``L L^T x = b``."""
    cdef Py_ssize_t n = L.shape[0]
    cdef Py_ssize_t bw = L.shape[1] - 1
    cdef Py_ssize_t nr = B.shape[0]
    cdef Py_ssize_t r, i, k, lo, hi
    cdef double s
    with nogil:
        for r in range(nr):
            for i in range(n):
                s = B[r, i]
                lo = i - bw if i > bw else 0
                for k in range(lo, i):
                    s = s - L[i, bw - (i - k)] * B[r, k]
                B[r, i] = s / L[i, bw]
            i = n - 1
            while i >= 0:
                s = B[r, i]
                hi = i + bw if i + bw < n - 1 else n - 1
                for k in range(i + 1, hi + 1):
                    s = s - L[k, bw - (k - i)] * B[r, k]
                B[r, i] = s / L[i, bw]
                i = i - 1
