"""Bilinear (Q1) finite elements on the unit square, homogeneous Dirichlet data.

Node numbering
--------------
All ``(n + 1)**2`` grid nodes are numbered row-major, ``iy * (n + 1) + ix``,
with x1 varying fastest. Interior unknowns use the same row-major order over
``1 <= ix, iy <= n - 1``: ``(iy - 1) * (n - 1) + (ix - 1)``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .errors import InputError
from .sparsela import SparseMatrix

__all__ = [
    "Grid2d",
    "StiffnessFamily",
    "assemble_stiffness",
    "assemble_family",
    "assemble_load",
    "l2_norm",
    "write_field_csv",
    "read_field_csv",
]

# unit-coefficient Q1 element stiffness, corners counter-clockwise from (0, 0);
# independent of h in two dimensions
_KLOC = np.array(
    [
        [4.0, -1.0, -2.0, -1.0],
        [-1.0, 4.0, -1.0, -2.0],
        [-2.0, -1.0, 4.0, -1.0],
        [-1.0, -2.0, -1.0, 4.0],
    ]
) / 6.0


@dataclass(frozen=True)
class Grid2d:
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise InputError(f"grid needs at least 2 cells per axis, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def n_phy(self) -> int:
        return (self.n - 1) ** 2

    @property
    def n_nodes(self) -> int:
        return (self.n + 1) ** 2

    @cached_property
    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinates of all nodes, boundary included."""
        g = np.arange(self.n + 1) * self.h
        X1, X2 = np.meshgrid(g, g, indexing="xy")
        return X1.ravel(), X2.ravel()

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        """All-node indices of the interior unknowns, in unknown order."""
        i = np.arange(1, self.n)
        IY, IX = np.meshgrid(i, i, indexing="ij")
        return (IY * (self.n + 1) + IX).ravel()

    @property
    def interior_coords(self) -> tuple[np.ndarray, np.ndarray]:
        x1, x2 = self.node_coords
        idx = self.interior_nodes
        return x1[idx], x2[idx]

    def node_index(self, ix: int, iy: int) -> int:
        return iy * (self.n + 1) + ix

    def interior_index(self, ix: int, iy: int) -> int:
        if not (1 <= ix <= self.n - 1 and 1 <= iy <= self.n - 1):
            raise InputError(f"node ({ix}, {iy}) is not interior")
        return (iy - 1) * (self.n - 1) + (ix - 1)

    @cached_property
    def _elements(self) -> np.ndarray:
        # (n^2, 4) all-node indices of element corners
        e = np.arange(self.n)
        EY, EX = np.meshgrid(e, e, indexing="ij")
        base = (EY * (self.n + 1) + EX).ravel()
        return np.stack([base, base + 1, base + self.n + 2, base + self.n + 1], axis=1)

    @cached_property
    def _pattern(self):
        """Shared CSR pattern and the slot of every (element, i, j) contribution."""
        to_int = np.full(self.n_nodes, -1, dtype=np.int64)
        to_int[self.interior_nodes] = np.arange(self.n_phy)
        corners = to_int[self._elements]
        rows = np.repeat(corners, 4, axis=1)
        cols = np.tile(corners, (1, 4))
        keep = (rows >= 0) & (cols >= 0)
        elem, loc = np.nonzero(keep)
        r = rows[keep]
        c = cols[keep]
        key = r * self.n_phy + c
        uniq, slot = np.unique(key, return_inverse=True)
        ur = uniq // self.n_phy
        indptr = np.zeros(self.n_phy + 1, dtype=np.int64)
        np.add.at(indptr, ur + 1, 1)
        return np.cumsum(indptr), uniq % self.n_phy, elem, _KLOC.ravel()[loc], slot


def _element_average(grid: Grid2d, coeff) -> np.ndarray:
    coeff = np.asarray(coeff, dtype=float)
    if coeff.shape[-1] != grid.n_nodes:
        raise InputError(f"coefficient must be given on all {grid.n_nodes} nodes, got {coeff.shape[-1]}")
    return coeff[..., grid._elements].mean(axis=-1)


@dataclass(frozen=True)
class StiffnessFamily:
    """Stiffness matrices of several coefficients on one common CSR pattern."""

    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray  # (K, nnz)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    def matrix(self, i: int) -> SparseMatrix:
        return SparseMatrix(self.indptr, self.indices, self.data[i], (self.n, self.n))

    def combine(self, weights) -> SparseMatrix:
        """``sum_i weights[i] * A_i`` on the shared pattern."""
        return SparseMatrix(self.indptr, self.indices, np.asarray(weights) @ self.data, (self.n, self.n))


def assemble_family(grid: Grid2d, coeffs) -> StiffnessFamily:
    """Assemble one stiffness matrix per row of ``coeffs`` (all-node values)."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=float))
    indptr, indices, elem, kval, slot = grid._pattern
    avg = _element_average(grid, coeffs)
    nnz = len(indices)
    data = np.empty((coeffs.shape[0], nnz))
    for i in range(coeffs.shape[0]):
        data[i] = np.bincount(slot, weights=avg[i, elem] * kval, minlength=nnz)
    return StiffnessFamily(indptr, indices, data)


def assemble_stiffness(grid: Grid2d, coeff) -> SparseMatrix:
    """Q1 stiffness for ``-div(a grad u)`` with the element-averaged coefficient."""
    fam = assemble_family(grid, coeff)
    A = fam.matrix(0)
    keep = A.data != 0.0
    if keep.all():
        return A
    rows = np.repeat(np.arange(A.shape[0]), np.diff(A.indptr))
    return SparseMatrix.from_coo(rows[keep], A.indices[keep], A.data[keep], A.shape)


_GAUSS2 = np.array([-1.0, 1.0]) / np.sqrt(3.0)


def assemble_load(grid: Grid2d, f: Callable | float) -> np.ndarray:
    """Consistent Q1 load vector ``(f, v_s)`` with 2x2 Gauss quadrature per element."""
    h = grid.h
    x1, x2 = grid.node_coords
    el = grid._elements
    ox, oy = x1[el[:, 0]], x2[el[:, 0]]
    out = np.zeros(grid.n_nodes)
    for gx in _GAUSS2:
        for gy in _GAUSS2:
            s, t = 0.5 * (gx + 1.0), 0.5 * (gy + 1.0)
            px, py = ox + s * h, oy + t * h
            fv = f(px, py) if callable(f) else np.full(px.shape, float(f))
            shape = np.array([(1 - s) * (1 - t), s * (1 - t), s * t, (1 - s) * t])
            # each Gauss point carries weight h^2 / 4
            np.add.at(out, el, (0.25 * h * h) * np.asarray(fv)[:, None] * shape[None, :])
    return out[grid.interior_nodes]


def l2_norm(grid: Grid2d, v) -> float:
    """Lumped-mass L2(D) norm ``sqrt(h^2 * sum v_s^2)`` over interior nodes."""
    v = np.asarray(v, dtype=float)
    return float(np.sqrt(grid.h * grid.h * np.dot(v, v)))


def write_field_csv(path, grid: Grid2d, values) -> None:
    """Write ``x1,x2,value`` rows for the interior nodes (17 significant digits)."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n_phy,):
        raise InputError(f"field of shape {values.shape} does not match {grid.n_phy} interior nodes")
    x1, x2 = grid.interior_coords
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "value"])
        for a, b, v in zip(x1, x2, values):
            w.writerow([f"{a:.17g}", f"{b:.17g}", f"{v:.17g}"])


def read_field_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data[:, 0], data[:, 1], data[:, 2]
