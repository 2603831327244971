"""ANOVA decomposition of functions on [-1, 1]^N by tensor Gauss quadrature.

Components follow the classical recursion: integrate out the variables not in
``T`` and subtract every lower component ``u_S`` with ``S`` a proper subset
of ``T``. Each component can then be projected onto the orthonormal Legendre
basis to inspect which multi-indices carry it.
"""
from __future__ import annotations

from itertools import combinations
from typing import Callable

import numpy as np

from .errors import InputError
from .galerkin import basis_values
from .multiindex import AnovaSet, IndexCatalog
from .polyquad import QuadRule, gauss_legendre, legendre_table

__all__ = ["AnovaDecomposition", "anova_decompose", "reassemble"]


class AnovaDecomposition:
    """All ``2**N`` ANOVA components of a function sampled on a tensor grid.

    ``components[T]`` holds the values of ``u_T`` on the tensor grid of the
    variables in ``T`` (axes in increasing label order); ``components[()]`` is
    the mean as a 0-d array.
    """

    def __init__(self, N: int, rule: QuadRule, components: dict[AnovaSet, np.ndarray]):
        self.N = N
        self.rule = rule
        self.components = components

    def expand(self, T: AnovaSet) -> np.ndarray:
        """``u_T`` broadcast onto the full N-dimensional tensor grid."""
        comp = self.components[tuple(T)]
        shape = [1] * self.N
        for t in T:
            shape[t - 1] = len(self.rule)
        return np.broadcast_to(comp.reshape(shape), (len(self.rule),) * self.N)

    def variance(self, T: AnovaSet) -> float:
        if not T:
            raise InputError("the order-0 term carries no variance")
        w = self.rule.weights
        v = self.components[tuple(T)] ** 2
        for _ in T:
            v = np.tensordot(w, v, axes=(0, 0))
        return float(v)

    def project(self, T: AnovaSet, catalog: IndexCatalog) -> np.ndarray:
        """gPC coefficients ``<u_T, Phi_j>`` for every catalog entry.

        The integral runs over the full tensor grid, so coefficients outside
        the support of ``u_T`` come out as quadrature values, not by fiat.
        """
        if catalog.N != self.N:
            raise InputError(f"catalog dimension {catalog.N} differs from {self.N}")
        m = len(self.rule)
        deg = max(catalog.max_degree, 1)
        if deg >= m:
            raise InputError(f"{m}-point rule cannot resolve degree {deg} projections")
        table = legendre_table(deg, self.rule.nodes)  # (deg + 1, m)
        vals = self.expand(T)
        out = np.empty(len(catalog))
        for j, e in enumerate(catalog.entries):
            v = vals
            # contract the last axis each time, so walk dimensions backwards
            for t in range(self.N - 1, -1, -1):
                v = v @ (self.rule.weights * table[e[t]])
            out[j] = v
        return out


def anova_decompose(f: Callable, N: int, m: int) -> AnovaDecomposition:
    """Decompose ``f`` (vectorized over an ``(..., N)`` array) with an m-point rule per axis."""
    if N < 1:
        raise InputError(f"dimension must be >= 1, got {N}")
    rule = gauss_legendre(m)
    grids = np.meshgrid(*([rule.nodes] * N), indexing="ij")
    F = np.asarray(f(np.stack(grids, axis=-1)), dtype=float)
    if F.shape != (m,) * N:
        raise InputError(f"f returned shape {F.shape}, expected {(m,) * N}")
    w = rule.weights
    comps: dict[AnovaSet, np.ndarray] = {}
    for k in range(N + 1):
        for T in combinations(range(1, N + 1), k):
            # marginal: integrate every axis not in T, highest axis first
            marg = F
            for ax in range(N - 1, -1, -1):
                if ax + 1 not in T:
                    marg = np.tensordot(marg, w, axes=(ax, 0))
            for r in range(k):
                for S in combinations(T, r):
                    shape = [m if t in S else 1 for t in T]
                    marg = marg - comps[S].reshape(shape)
            comps[T] = np.asarray(marg)
    return AnovaDecomposition(N, rule, comps)


def reassemble(decomp: AnovaDecomposition, catalog: IndexCatalog, xi) -> np.ndarray:
    """Evaluate ``sum_T sum_j <u_T, Phi_j> Phi_j(xi)`` over all components."""
    coeffs = sum(decomp.project(T, catalog) for T in decomp.components)
    return basis_values(catalog, xi) @ coeffs

