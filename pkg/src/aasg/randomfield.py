"""Truncated Karhunen-Loeve expansion of the separable exponential field.

The 1-D kernel ``exp(-|x - y| / c)`` on [0, 1] has closed-form eigenpairs.
Shifting to [-1/2, 1/2], the frequencies solve

    even:  omega * tan(omega / 2) = 1 / c
    odd:   omega + tan(omega / 2) / c = 0

with eigenvalues ``2c / (1 + c^2 omega^2)``. Mode ``n`` (1-based, even and
odd interleaved) has its frequency in ((n - 1) pi, n pi).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AasgError, DomainError, InputError

__all__ = [
    "Kl1dMode",
    "KlField",
    "kl_1d",
    "kl_2d",
    "field_eval",
    "positivity_report",
]

BISECTION_STEPS = 80


@dataclass(frozen=True)
class Kl1dMode:
    omega: float
    lam: float
    kind: str  # "even" | "odd"
    norm: float

    def __call__(self, x):
        s = np.asarray(x, dtype=float) - 0.5
        if self.kind == "even":
            return np.cos(self.omega * s) / self.norm
        return np.sin(self.omega * s) / self.norm


def _residual(kind: str, omega: float, c: float) -> float:
    # sine/cosine forms of the transcendental equations, bounded near poles
    half = 0.5 * omega
    if kind == "even":
        return omega * math.sin(half) - math.cos(half) / c
    return omega * math.cos(half) + math.sin(half) / c


def _bisect(kind: str, lo: float, hi: float, c: float) -> float:
    flo = _residual(kind, lo, c)
    fhi = _residual(kind, hi, c)
    if flo == 0.0:
        return lo
    if flo * fhi > 0.0:
        raise AasgError(f"bracket failure for {kind} root in ({lo}, {hi})")
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        fm = _residual(kind, mid, c)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (flo < 0.0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def kl_1d(c: float, n: int) -> list[Kl1dMode]:
    """The ``n`` largest eigenpairs of the unit-variance kernel on [0, 1]."""
    if c <= 0:
        raise DomainError(f"correlation length must be positive, got {c}")
    if n < 1:
        raise DomainError(f"mode count must be >= 1, got {n}")
    modes = []
    for k in range(1, n + 1):
        kind = "even" if k % 2 == 1 else "odd"
        omega = _bisect(kind, (k - 1) * math.pi, k * math.pi, c)
        lam = 2.0 * c / (1.0 + c * c * omega * omega)
        if kind == "even":
            norm = math.sqrt(0.5 + math.sin(omega) / (2.0 * omega))
        else:
            norm = math.sqrt(0.5 - math.sin(omega) / (2.0 * omega))
        modes.append(Kl1dMode(omega, lam, kind, norm))
    return modes


@dataclass(frozen=True)
class KlField:
    """Grid-sampled affine coefficient ``a0(x) + sum_m a_m(x) xi_m``.

    ``modes[m]`` holds ``a_{m+1}`` at every grid node; ``pairs[m]`` is the
    1-based (axis-1, axis-2) 1-D mode pair it was built from.
    """

    a0: np.ndarray
    modes: np.ndarray
    c: float
    sigma: float
    eigenvalues: np.ndarray
    pairs: list[tuple[int, int]]
    omegas: list[tuple[float, float]]
    axis_eigenvalues: list[tuple[float, float]] = field(default_factory=list)

    @property
    def N(self) -> int:
        return self.modes.shape[0]

    def values(self, xi) -> np.ndarray:
        """Coefficient at every node for one parameter point."""
        xi = np.asarray(xi, dtype=float)
        if xi.shape != (self.N,):
            raise InputError(f"expected {self.N} random variables, got shape {xi.shape}")
        return self.a0 + xi @ self.modes


def _select_pairs(lams: np.ndarray, N: int) -> list[tuple[int, int]]:
    M = len(lams)
    cand = [(-(lams[i] * lams[j]), i, j) for i in range(M) for j in range(M)]
    cand.sort()
    return [(i, j) for _, i, j in cand[:N]]


def kl_2d(c: float, sigma: float, N: int, x1, x2, a0: float = 1.0) -> KlField:
    """Select the N dominant 2-D products and sample them at nodes (x1, x2)."""
    if N < 1:
        raise DomainError(f"need at least one retained mode, got N={N}")
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    M = max(2 * N, 20)
    while True:
        pool = kl_1d(c, M + 1)
        lams = np.array([m.lam for m in pool[:M]])
        pairs = _select_pairs(lams, N)
        smallest = min(lams[i] * lams[j] for i, j in pairs)
        # any product involving a mode beyond the pool is at most lam_1 * lam_{M+1}
        if lams[0] * pool[M].lam < smallest:
            break
        M *= 2
    s2 = sigma * sigma
    modes = np.empty((N, x1.size))
    eig = np.empty(N)
    for m, (i, j) in enumerate(pairs):
        eig[m] = s2 * lams[i] * lams[j]
        modes[m] = math.sqrt(eig[m]) * pool[i](x1) * pool[j](x2)
    return KlField(
        a0=np.full(x1.size, float(a0)),
        modes=modes,
        c=c,
        sigma=sigma,
        eigenvalues=eig,
        pairs=[(i + 1, j + 1) for i, j in pairs],
        omegas=[(pool[i].omega, pool[j].omega) for i, j in pairs],
        axis_eigenvalues=[(pool[i].lam, pool[j].lam) for i, j in pairs],
    )


def field_eval(field: KlField, xi, node: int) -> float:
    """``a0(x) + sum_i a_i(x) xi_i`` at one grid node."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (field.N,):
        raise InputError(f"expected {field.N} random variables, got shape {xi.shape}")
    return float(field.a0[node] + np.dot(field.modes[:, node], xi))


def positivity_report(field: KlField) -> float:
    """Worst-case lower bound ``min_x a0(x) - sum_i |a_i(x)|`` over the nodes."""
    return float(np.min(field.a0 - np.abs(field.modes).sum(axis=0)))

