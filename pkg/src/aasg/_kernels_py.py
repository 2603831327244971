"""NumPy/SciPy implementation of the kernel API, used when the extension is absent.

Same signatures and band layout as the compiled module.
"""
import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .errors import NotSPDError

NAME = "python"


def _csr(indptr, indices, data, ncols):
    return sp.csr_matrix((data, indices, indptr), shape=(len(indptr) - 1, ncols), copy=False)


def csr_matvec(indptr, indices, data, x):
    return _csr(indptr, indices, data, len(x)) @ x


def kron_term_apply(g_indptr, g_indices, g_data, a_indptr, a_indices, a_data, V, Y):
    G = _csr(g_indptr, g_indices, g_data, V.shape[0])
    A = _csr(a_indptr, a_indices, a_data, V.shape[1])
    Z = G @ V
    Y += (A @ Z.T).T


def _to_lapack(Lb):
    # Lb[i, bw - d] = L[i, i - d]  ->  ab[d, j] = L[j + d, j]
    n, w = Lb.shape
    bw = w - 1
    ab = np.zeros((w, n))
    for d in range(w):
        ab[d, : n - d] = Lb[d:, bw - d]
    return ab


def band_cholesky(Ab):
    Ab = np.asarray(Ab, dtype=float)
    n, w = Ab.shape
    bw = w - 1
    try:
        cb = scipy.linalg.cholesky_banded(_to_lapack(Ab), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NotSPDError(str(exc)) from None
    Lb = np.zeros_like(Ab)
    for d in range(w):
        Lb[d:, bw - d] = cb[d, : n - d]
    return Lb


def band_prepare(Lb):
    return _to_lapack(np.asarray(Lb, dtype=float))


def band_solve_rows(handle, B):
    B[...] = scipy.linalg.cho_solve_banded((handle, True), B.T, check_finite=False).T
