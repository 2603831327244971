"""Orthonormal Legendre polynomials and Gauss-Legendre quadrature.

All inner products use the uniform probability density 1/2 on [-1, 1], so
``phi_0 == 1`` and the Gram matrix of the basis is the identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError

__all__ = [
    "QuadRule",
    "legendre_eval",
    "legendre_table",
    "recurrence_beta",
    "gauss_legendre",
    "inner_product_oracle",
]


@dataclass(frozen=True)
class QuadRule:
    """Gauss rule under the probability density 1/2 (weights sum to one)."""

    nodes: np.ndarray
    weights: np.ndarray

    def integrate(self, f: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, f(self.nodes)))

    def __len__(self) -> int:
        return len(self.nodes)


def recurrence_beta(n: int) -> float:
    """Off-diagonal coefficient b_n of ``xi*phi_n = b_{n+1}phi_{n+1} + b_n phi_{n-1}``."""
    if n < 1:
        raise DomainError(f"recurrence coefficient needs n >= 1, got {n}")
    return n / math.sqrt(4.0 * n * n - 1.0)


def _check_domain(xi: np.ndarray) -> None:
    if np.any(np.abs(xi) > 1.0):
        raise DomainError("Legendre evaluation point outside [-1, 1]")


def legendre_table(nmax: int, xi) -> np.ndarray:
    """Values of phi_0..phi_nmax at ``xi``; shape ``(nmax + 1,) + xi.shape``."""
    xi = np.asarray(xi, dtype=float)
    _check_domain(xi)
    out = np.empty((nmax + 1,) + xi.shape)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = xi / recurrence_beta(1)
    for n in range(1, nmax):
        out[n + 1] = (xi * out[n] - recurrence_beta(n) * out[n - 1]) / recurrence_beta(n + 1)
    return out


def legendre_eval(n: int, xi):
    """Orthonormal Legendre polynomial phi_n at ``xi`` (scalar or array)."""
    if n < 0:
        raise DomainError(f"polynomial degree must be nonnegative, got {n}")
    val = legendre_table(n, xi)[n]
    return float(val) if np.ndim(val) == 0 else val


def _legendre_with_derivative(m: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # classical (unnormalized) P_m and P_m'
    p0 = np.ones_like(x)
    p1 = x.copy()
    for k in range(2, m + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if m == 0:
        return p0, np.zeros_like(x)
    dp = m * (x * p1 - p0) / (x * x - 1.0)
    return p1, dp


def gauss_legendre(m: int) -> QuadRule:
    """m-point Gauss-Legendre rule with probabilist weights (halved)."""
    if m < 1:
        raise DomainError(f"node count must be >= 1, got {m}")
    if m == 1:
        return QuadRule(np.array([0.0]), np.array([1.0]))
    i = np.arange(1, m + 1)
    x = np.cos(np.pi * (i - 0.25) / (m + 0.5))
    for _ in range(100):
        p, dp = _legendre_with_derivative(m, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    p, dp = _legendre_with_derivative(m, x)
    w = 1.0 / ((1.0 - x * x) * dp * dp)
    order = np.argsort(x)
    x, w = x[order], w[order]
    # exact symmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    if m % 2 == 1:
        x[m // 2] = 0.0
    return QuadRule(x, w)


def inner_product_oracle(f: Callable, g: Callable, m: int) -> float:
    """Gauss approximation of ``int (1/2) f g`` over [-1, 1]."""
    rule = gauss_legendre(m)
    return float(np.dot(rule.weights, np.asarray(f(rule.nodes)) * np.asarray(g(rule.nodes))))
