"""Stochastic Galerkin system for the KL-affine diffusion problem.

The operator is ``sum_{m=0}^{N} G_m (x) A_m`` where ``A_0`` is the mean
stiffness, ``A_m`` the stiffness of KL mode m, ``G_0 = I`` and
``G_m(j, k) = <xi_m Phi_j Phi_k>``. With the orthonormal Legendre basis the
right-hand side is ``e_0 (x) f``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConvergenceError, InputError
from .fem import Grid2d, StiffnessFamily, assemble_family, assemble_load
from .multiindex import AnovaSet, IndexCatalog
from .polyquad import legendre_table, recurrence_beta
from .randomfield import KlField, positivity_report
from .sparsela import (
    KronSumOperator,
    MeanPreconditioner,
    SolveReport,
    SparseMatrix,
    cg,
    cholesky_factor,
)

log = logging.getLogger(__name__)

__all__ = [
    "DiffusionProblem",
    "GpcCoefficients",
    "assemble_g",
    "assemble_rhs",
    "solve_sgm",
    "component_variance",
    "total_statistics",
    "surrogate_eval",
]


class DiffusionProblem:
    """Physical-space data shared by every stochastic solve on one field and grid.

    Holds the per-mode stiffness matrices, the load vector and the Cholesky
    factor of the mean stiffness; build once and reuse across rounds.
    """

    def __init__(self, field: KlField, grid: Grid2d, source=1.0):
        if field.a0.shape != (grid.n_nodes,):
            raise InputError("field was not sampled on this grid's nodes")
        self.field = field
        self.grid = grid
        self.family: StiffnessFamily = assemble_family(grid, np.vstack([field.a0, field.modes]))
        self.f = assemble_load(grid, source)
        self.positivity = positivity_report(field)
        if self.positivity <= 0.0:
            log.warning("coefficient lower bound %.3g <= 0; the problem may be ill-posed", self.positivity)

    @property
    def N(self) -> int:
        return self.field.N

    @cached_property
    def matrices(self) -> list[SparseMatrix]:
        """A_0 (mean) followed by A_1..A_N; identically zero modes are empty."""
        out = []
        for i in range(self.family.data.shape[0]):
            A = self.family.matrix(i)
            if not np.any(A.data):
                A = SparseMatrix(np.zeros(A.shape[0] + 1), [], [], A.shape)
            out.append(A)
        return out

    @cached_property
    def mean_factor(self):
        return cholesky_factor(self.matrices[0])


@dataclass
class GpcCoefficients:
    """Coefficient fields ``u_j(x)`` (one row per catalog entry)."""

    catalog: IndexCatalog
    blocks: np.ndarray

    def __post_init__(self):
        if self.blocks.ndim != 2 or self.blocks.shape[0] != len(self.catalog):
            raise InputError("block count must equal the catalog size")

    @property
    def mean(self) -> np.ndarray:
        return self.blocks[0]

    @property
    def variance(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.blocks[1:], self.blocks[1:])

    def flat(self) -> np.ndarray:
        return self.blocks.reshape(-1)


def assemble_g(catalog: IndexCatalog, m: int) -> SparseMatrix:
    """Stochastic factor for dimension label m (0 = mean term)."""
    n = len(catalog)
    if m == 0:
        return SparseMatrix.identity(n)
    if not 1 <= m <= catalog.N:
        raise InputError(f"dimension label {m} outside 0..{catalog.N}")
    t = m - 1
    rows, cols, vals = [], [], []
    pos = catalog.position
    for j, e in enumerate(catalog.entries):
        up = e[:t] + (e[t] + 1,) + e[t + 1 :]
        k = pos.get(up)
        if k is not None:
            b = recurrence_beta(e[t] + 1)
            rows += [j, k]
            cols += [k, j]
            vals += [b, b]
    return SparseMatrix.from_coo(rows, cols, vals, (n, n))


def assemble_rhs(catalog: IndexCatalog, f_vec) -> np.ndarray:
    """``h (x) f`` with ``h = e_0``: block 0 carries the load, the rest vanish."""
    f_vec = np.asarray(f_vec, dtype=float)
    out = np.zeros((len(catalog), f_vec.size))
    out[0] = f_vec
    return out.reshape(-1)


def galerkin_operator(catalog: IndexCatalog, problem: DiffusionProblem) -> KronSumOperator:
    terms = []
    for m, A in enumerate(problem.matrices):
        if A.nnz == 0:
            continue
        G = assemble_g(catalog, m)
        if G.nnz:
            terms.append((G, A))
    return KronSumOperator(terms)


def _inject(warm: GpcCoefficients, catalog: IndexCatalog, n_phy: int) -> np.ndarray:
    x0 = np.zeros((len(catalog), n_phy))
    if warm.catalog.is_prefix_of(catalog):
        x0[: len(warm.catalog)] = warm.blocks
    else:
        for j, e in enumerate(warm.catalog.entries):
            k = catalog.position.get(e)
            if k is not None:
                x0[k] = warm.blocks[j]
    return x0.reshape(-1)


def solve_sgm(
    catalog: IndexCatalog,
    problem: DiffusionProblem,
    tol: float = 1e-8,
    maxit: int | None = None,
    warm: GpcCoefficients | None = None,
    precondition: bool = True,
) -> tuple[GpcCoefficients, SolveReport]:
    """Solve the Galerkin system on ``catalog`` with mean-based preconditioned CG.

    Raises
    ------
    ConvergenceError
        If CG stops before reaching ``tol``; the report is attached.
    """
    if catalog.N != problem.N:
        raise InputError(f"catalog dimension {catalog.N} differs from field dimension {problem.N}")
    n_stoch, n_phy = len(catalog), problem.grid.n_phy
    op = galerkin_operator(catalog, problem)
    b = assemble_rhs(catalog, problem.f)
    M = MeanPreconditioner(problem.mean_factor, n_stoch) if precondition else None
    x0 = _inject(warm, catalog, n_phy) if warm is not None else None
    if maxit is None:
        maxit = max(10 * n_stoch, 100)
    x, report = cg(op, M, b, tol=tol, maxit=maxit, x0=x0)
    if not report.converged:
        raise ConvergenceError(
            f"CG reached relative residual {report.residual:.3e} after {report.iterations} iterations", report
        )
    return GpcCoefficients(catalog, x.reshape(n_stoch, n_phy)), report


def component_variance(coeffs: GpcCoefficients, T: AnovaSet) -> np.ndarray:
    """Variance field of one ANOVA component: sum of squared coefficient fields."""
    T = tuple(T)
    if not T:
        raise InputError("the order-0 term carries no variance")
    r = coeffs.catalog.set_range(T)
    blk = coeffs.blocks[r.start : r.stop]
    return np.einsum("ij,ij->j", blk, blk)


def total_statistics(coeffs: GpcCoefficients) -> tuple[np.ndarray, np.ndarray]:
    """Mean (block 0) and variance (sum of squares of the other blocks)."""
    return coeffs.mean.copy(), coeffs.variance


def basis_values(catalog: IndexCatalog, xi) -> np.ndarray:
    """``Phi_j(xi)`` for every catalog entry; ``xi`` is (N,) or (S, N)."""
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    X = np.atleast_2d(xi)
    if X.shape[1] != catalog.N:
        raise InputError(f"expected points of dimension {catalog.N}, got {X.shape[1]}")
    table = legendre_table(max(catalog.max_degree, 1), X)  # (deg, S, N)
    E = catalog.array
    out = np.ones((X.shape[0], len(catalog)))
    for t in range(catalog.N):
        col = E[:, t]
        if np.any(col):
            out *= table[col, :, t].T
    return out[0] if single else out


def surrogate_eval(coeffs: GpcCoefficients, xi) -> np.ndarray:
    """Evaluate ``sum_j u_j(x) Phi_j(xi)`` at one point (or a stack of points)."""
    return basis_values(coeffs.catalog, xi) @ coeffs.blocks
