"""Sparse linear algebra: CSR matrices, Kronecker-sum operators, Krylov solvers.

Operators passed to ``cg``/``bicgstab`` need a ``matvec(x)`` method (dense
arrays are accepted too); preconditioners need ``solve(r)``.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import BreakdownError, InputError, NotSPDError

__all__ = [
    "SparseMatrix",
    "KronSumOperator",
    "SolveReport",
    "BandCholesky",
    "MeanPreconditioner",
    "csr_matvec",
    "kron_apply",
    "cg",
    "bicgstab",
    "cholesky_factor",
    "cholesky_solve",
]


class SparseMatrix:
    """Compressed sparse row matrix with sorted column indices and no stored zeros."""

    def __init__(self, indptr, indices, data, shape: tuple[int, int]):
        self.indptr = np.ascontiguousarray(indptr, dtype=np.int32)
        self.indices = np.ascontiguousarray(indices, dtype=np.int32)
        self.data = np.ascontiguousarray(data, dtype=np.float64)
        self.shape = (int(shape[0]), int(shape[1]))
        if len(self.indptr) != self.shape[0] + 1:
            raise InputError("row pointer length does not match the row count")

    @classmethod
    def from_coo(cls, rows, cols, vals, shape, keep_zeros: bool = False) -> "SparseMatrix":
        """Sum duplicates, sort columns and (by default) drop explicit zeros."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        nrows, ncols = shape
        key = rows * ncols + cols
        order = np.argsort(key, kind="stable")
        key = key[order]
        vals = vals[order]
        uniq, start = np.unique(key, return_index=True)
        summed = np.add.reduceat(vals, start) if len(vals) else vals
        if not keep_zeros:
            nz = summed != 0.0
            uniq, summed = uniq[nz], summed[nz]
        r = uniq // ncols
        c = uniq % ncols
        indptr = np.zeros(nrows + 1, dtype=np.int64)
        np.add.at(indptr, r + 1, 1)
        return cls(np.cumsum(indptr), c, summed, shape)

    @classmethod
    def from_dense(cls, M) -> "SparseMatrix":
        M = np.asarray(M, dtype=float)
        r, c = np.nonzero(M)
        return cls.from_coo(r, c, M[r, c], M.shape)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(np.arange(n + 1), np.arange(n), np.ones(n), (n, n))

    @property
    def nnz(self) -> int:
        return len(self.data)

    def matvec(self, x) -> np.ndarray:
        return csr_matvec(self, x)

    def __matmul__(self, x):
        return self.matvec(x)

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        out[rows, self.indices] = self.data
        return out

    def transpose(self) -> "SparseMatrix":
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        return SparseMatrix.from_coo(self.indices, rows, self.data, self.shape[::-1])

    def diagonal(self) -> np.ndarray:
        d = np.zeros(min(self.shape))
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        on = rows == self.indices
        d[rows[on]] = self.data[on]
        return d

    def bandwidth(self) -> int:
        rows = np.repeat(np.arange(self.shape[0]), np.diff(self.indptr))
        return int(np.max(np.abs(rows - self.indices))) if self.nnz else 0

    def scaled(self, alpha: float) -> "SparseMatrix":
        return SparseMatrix(self.indptr, self.indices, alpha * self.data, self.shape)

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def csr_matvec(A: SparseMatrix, x) -> np.ndarray:
    """Sparse matrix-vector product."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.shape != (A.shape[1],):
        raise InputError(f"vector of length {x.shape} does not match matrix {A.shape}")
    return kernels.active.csr_matvec(A.indptr, A.indices, A.data, x)


class KronSumOperator:
    """Matrix-free ``sum_i G_i (x) A_i`` acting on block vectors [u_1; ...; u_ns]."""

    def __init__(self, terms: Sequence[tuple[SparseMatrix, SparseMatrix]]):
        if not terms:
            raise InputError("Kronecker sum needs at least one term")
        self.terms = list(terms)
        self.n_stoch = self.terms[0][0].shape[0]
        self.n_phy = self.terms[0][1].shape[0]
        for G, A in self.terms:
            if G.shape != (self.n_stoch, self.n_stoch) or A.shape != (self.n_phy, self.n_phy):
                raise InputError("Kronecker factors have inconsistent dimensions")

    @property
    def shape(self) -> tuple[int, int]:
        n = self.n_stoch * self.n_phy
        return (n, n)

    def matvec(self, v) -> np.ndarray:
        return kron_apply(self, v)

    def toarray(self) -> np.ndarray:
        return sum(np.kron(G.toarray(), A.toarray()) for G, A in self.terms)


def kron_apply(op: KronSumOperator, v) -> np.ndarray:
    """Apply the Kronecker sum block-wise, never forming it."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (op.n_stoch * op.n_phy,):
        raise InputError(f"vector of length {v.shape} does not match operator {op.shape}")
    V = np.ascontiguousarray(v.reshape(op.n_stoch, op.n_phy))
    Y = np.zeros_like(V)
    k = kernels.active
    for G, A in op.terms:
        if G.nnz == 0 or A.nnz == 0:
            continue
        k.kron_term_apply(G.indptr, G.indices, G.data, A.indptr, A.indices, A.data, V, Y)
    return Y.reshape(-1)


@dataclass
class SolveReport:
    iterations: int
    residual: float
    converged: bool
    seconds: float
    history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual": self.residual,
            "converged": self.converged,
            "seconds": self.seconds,
        }


class _Identity:
    def solve(self, r):
        return np.array(r, dtype=float, copy=True)


class _Dense:
    def __init__(self, M):
        self.M = np.asarray(M, dtype=float)

    def matvec(self, x):
        return self.M @ x


def _as_operator(op):
    return _Dense(op) if isinstance(op, np.ndarray) else op


def _check_finite(value: float, where: str, it: int) -> None:
    if not math.isfinite(value):
        raise BreakdownError(f"non-finite value in {where} at iteration {it}", it)


def cg(op, precond, b, tol: float = 1e-8, maxit: int | None = None, x0=None):
    """Preconditioned conjugate gradients on the true relative residual.

    Returns ``(x, SolveReport)``; ``report.history`` holds the preconditioned
    residual norms ``sqrt(r.z)`` per iteration.
    """
    t0 = time.perf_counter()
    op = _as_operator(op)
    M = precond if precond is not None else _Identity()
    b = np.asarray(b, dtype=float)
    n = b.size
    maxit = 10 * n if maxit is None else maxit
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float, copy=True)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, time.perf_counter() - t0)
    r = b - op.matvec(x) if x0 is not None else b.copy()
    rel = float(np.linalg.norm(r)) / bnorm
    history: list[float] = []
    it = 0
    while rel > tol and it < maxit:
        z = M.solve(r)
        p = z.copy()
        rz = float(r @ z)
        _check_finite(rz, "preconditioner", it)
        history.append(math.sqrt(max(rz, 0.0)))
        while it < maxit:
            q = op.matvec(p)
            pq = float(p @ q)
            _check_finite(pq, "operator", it)
            if pq <= 0.0:
                raise BreakdownError(f"operator not positive definite (p.Ap = {pq})", it)
            alpha = rz / pq
            x += alpha * p
            r -= alpha * q
            it += 1
            rel = float(np.linalg.norm(r)) / bnorm
            _check_finite(rel, "residual", it)
            if rel <= tol:
                break
            z = M.solve(r)
            rz_new = float(r @ z)
            history.append(math.sqrt(max(rz_new, 0.0)))
            p *= rz_new / rz
            p += z
            rz = rz_new
        # guard against drift between the recursive and the true residual
        r = b - op.matvec(x)
        rel = float(np.linalg.norm(r)) / bnorm
    report = SolveReport(it, rel, rel <= tol, time.perf_counter() - t0, history)
    return x, report


def bicgstab(op, precond, b, tol: float = 1e-8, maxit: int | None = None, x0=None):
    """Right-preconditioned Bi-CGSTAB; restarts once on breakdown."""
    t0 = time.perf_counter()
    op = _as_operator(op)
    M = precond if precond is not None else _Identity()
    b = np.asarray(b, dtype=float)
    n = b.size
    maxit = 10 * n if maxit is None else maxit
    bnorm = float(np.linalg.norm(b))
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float, copy=True)
    if bnorm == 0.0:
        return np.zeros(n), SolveReport(0, 0.0, True, time.perf_counter() - t0)
    r = b - op.matvec(x)
    rel = float(np.linalg.norm(r)) / bnorm
    history = [rel]
    it = 0
    restarts = 0
    tiny = np.finfo(float).tiny
    rhat = r.copy()
    rho = alpha = omega = 1.0
    v = np.zeros(n)
    p = np.zeros(n)
    while rel > tol and it < maxit:
        rho_new = float(rhat @ r)
        _check_finite(rho_new, "rho", it)
        if abs(rho_new) < tiny * max(1.0, bnorm * bnorm) or omega == 0.0:
            if restarts >= 1:
                raise BreakdownError(f"Bi-CGSTAB rho breakdown at iteration {it}", it)
            restarts += 1
            rhat = r.copy()
            rho = alpha = omega = 1.0
            v[:] = 0.0
            p[:] = 0.0
            continue
        beta = (rho_new / rho) * (alpha / omega)
        p = r + beta * (p - omega * v)
        phat = M.solve(p)
        v = op.matvec(phat)
        denom = float(rhat @ v)
        if denom == 0.0:
            if restarts >= 1:
                raise BreakdownError(f"Bi-CGSTAB breakdown (rhat.v = 0) at iteration {it}", it)
            restarts += 1
            rhat = r.copy()
            rho = alpha = omega = 1.0
            v[:] = 0.0
            p[:] = 0.0
            continue
        alpha = rho_new / denom
        s = r - alpha * v
        it += 1
        if float(np.linalg.norm(s)) / bnorm <= tol:
            x += alpha * phat
            r = s
            rel = float(np.linalg.norm(r)) / bnorm
            history.append(rel)
            break
        shat = M.solve(s)
        t = op.matvec(shat)
        tt = float(t @ t)
        _check_finite(tt, "operator", it)
        if tt == 0.0:
            raise BreakdownError(f"Bi-CGSTAB omega breakdown at iteration {it}", it)
        omega = float(t @ s) / tt
        x += alpha * phat + omega * shat
        r = s - omega * t
        rho = rho_new
        rel = float(np.linalg.norm(r)) / bnorm
        _check_finite(rel, "residual", it)
        history.append(rel)
        if omega == 0.0:
            if restarts >= 1:
                raise BreakdownError(f"Bi-CGSTAB omega breakdown at iteration {it}", it)
            restarts += 1
            rhat = r.copy()
            rho = alpha = omega = 1.0
            v[:] = 0.0
            p[:] = 0.0
    rel = float(np.linalg.norm(b - op.matvec(x))) / bnorm
    return x, SolveReport(it, rel, rel <= tol, time.perf_counter() - t0, history)


class BandCholesky:
    """Cholesky factor ``A = L L^T`` held in lower band storage."""

    def __init__(self, Lb: np.ndarray):
        self.Lb = Lb
        self.n = Lb.shape[0]
        self.bw = Lb.shape[1] - 1
        self._handle = kernels.active.band_prepare(Lb)
        self._backend = kernels.active

    def L(self) -> np.ndarray:
        """Dense lower-triangular factor (for inspection and tests)."""
        out = np.zeros((self.n, self.n))
        for d in range(self.bw + 1):
            i = np.arange(d, self.n)
            out[i, i - d] = self.Lb[d:, self.bw - d]
        return out

    def solve(self, b) -> np.ndarray:
        return cholesky_solve(self, b)

    def solve_rows(self, B: np.ndarray) -> None:
        """In-place solve for every row of a C-contiguous 2-D array."""
        if self._backend is not kernels.active:
            self._handle = kernels.active.band_prepare(self.Lb)
            self._backend = kernels.active
        kernels.active.band_solve_rows(self._handle, B)


def cholesky_factor(A: SparseMatrix) -> BandCholesky:
    """Band Cholesky factorization of a symmetric positive definite CSR matrix."""
    n = A.shape[0]
    if A.shape != (n, n):
        raise InputError("Cholesky needs a square matrix")
    bw = A.bandwidth()
    rows = np.repeat(np.arange(n), np.diff(A.indptr))
    low = A.indices <= rows
    Ab = np.zeros((n, bw + 1))
    Ab[rows[low], bw - (rows[low] - A.indices[low])] = A.data[low]
    if np.any(A.diagonal() <= 0.0):
        raise NotSPDError("non-positive diagonal entry")
    return BandCholesky(kernels.active.band_cholesky(Ab))


def cholesky_solve(factor: BandCholesky, b) -> np.ndarray:
    """Solve ``L L^T x = b``; ``b`` may be one vector or a stack of rows."""
    B = np.array(b, dtype=np.float64, copy=True, order="C")
    one = B.ndim == 1
    if one:
        B = B.reshape(1, -1)
    if B.shape[1] != factor.n:
        raise InputError(f"right-hand side of length {B.shape[1]} for a factor of size {factor.n}")
    factor.solve_rows(B)
    return B[0] if one else B


class MeanPreconditioner:
    """Block-diagonal ``I (x) A_mean`` solve with one shared Cholesky factor."""

    def __init__(self, factor: BandCholesky, n_stoch: int):
        self.factor = factor
        self.n_stoch = n_stoch

    def solve(self, r) -> np.ndarray:
        B = np.array(r, dtype=np.float64, copy=True).reshape(self.n_stoch, self.factor.n)
        self.factor.solve_rows(B)
        return B.reshape(-1)
