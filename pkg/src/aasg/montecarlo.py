"""Monte Carlo baseline with streaming (Welford) moments.

Sample ``i`` draws its parameter point from its own substream keyed by
``(seed, i)``, and samples are grouped in fixed-size chunks whose
accumulators are merged in chunk order. The result is therefore bitwise
independent of the number of worker threads.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import AasgError, InputError
from .galerkin import DiffusionProblem
from .sparsela import cg

log = logging.getLogger(__name__)

__all__ = ["McAccumulator", "McResult", "sample_point", "sample_solve", "run_mc"]

CHUNK = 64


class McAccumulator:
    """Running mean and sum of squared deviations of vector samples."""

    def __init__(self, n: int):
        self.count = 0
        self.mean = np.zeros(n)
        self.m2 = np.zeros(n)

    def update(self, x) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (x - self.mean)

    def merge(self, other: "McAccumulator") -> None:
        """Chan's pairwise combination."""
        if other.count == 0:
            return
        if self.count == 0:
            self.count, self.mean, self.m2 = other.count, other.mean.copy(), other.m2.copy()
            return
        n = self.count + other.count
        delta = other.mean - self.mean
        self.mean = self.mean + delta * (other.count / n)
        self.m2 = self.m2 + other.m2 + delta * delta * (self.count * other.count / n)
        self.count = n

    @property
    def variance(self) -> np.ndarray:
        if self.count < 2:
            return np.zeros_like(self.mean)
        return self.m2 / (self.count - 1)


def sample_point(seed: int, index: int, N: int) -> np.ndarray:
    """Uniform point on [-1, 1]^N from the substream of sample ``index``."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss)).uniform(-1.0, 1.0, N)


def sample_solve(problem: DiffusionProblem, xi, tol: float = 1e-8, maxit: int | None = None):
    """Deterministic solve at one parameter point; returns ``(u, SolveReport)``."""
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (problem.N,):
        raise InputError(f"expected {problem.N} random variables, got shape {xi.shape}")
    if np.any(np.abs(xi) > 1.0):
        raise InputError("sample point outside [-1, 1]^N")
    A = problem.family.combine(np.concatenate(([1.0], xi)))
    u, report = cg(A, problem.mean_factor, problem.f, tol=tol, maxit=maxit or 1000)
    if not report.converged:
        raise AasgError(f"sample solve failed at xi={xi.tolist()} (residual {report.residual:.3e})")
    return u, report


@dataclass
class McResult:
    mean: np.ndarray
    variance: np.ndarray
    samples: int
    seed: int
    seconds: float
    solve_seconds: float
    mean_iterations: float

    def report(self) -> dict:
        return {
            "M": self.samples,
            "seed": self.seed,
            "seconds": self.seconds,
            "solve_seconds": self.solve_seconds,
            "mean_iterations": self.mean_iterations,
        }


def _run_chunk(problem, seed, start, stop, tol):
    acc = McAccumulator(problem.grid.n_phy)
    iters = 0
    solve_t = 0.0
    for i in range(start, stop):
        xi = sample_point(seed, i, problem.N)
        try:
            u, rep = sample_solve(problem, xi, tol=tol)
        except AasgError as exc:
            raise AasgError(f"sample {i} failed: {exc}") from exc
        acc.update(u)
        iters += rep.iterations
        solve_t += rep.seconds
    return acc, iters, solve_t


def run_mc(problem: DiffusionProblem, M: int, seed: int = 0, tol: float = 1e-8, threads: int = 1) -> McResult:
    """Monte Carlo mean and unbiased variance fields from ``M`` samples."""
    if M < 2:
        raise InputError(f"Monte Carlo needs at least 2 samples, got {M}")
    t0 = time.perf_counter()
    problem.mean_factor  # factor once before any worker starts
    bounds = [(s, min(s + CHUNK, M)) for s in range(0, M, CHUNK)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda b: _run_chunk(problem, seed, b[0], b[1], tol), bounds))
    else:
        parts = [_run_chunk(problem, seed, a, b, tol) for a, b in bounds]
    total = McAccumulator(problem.grid.n_phy)
    iters = 0
    solve_t = 0.0
    for acc, it, st in parts:
        total.merge(acc)
        iters += it
        solve_t += st
    return McResult(
        mean=total.mean,
        variance=total.variance,
        samples=M,
        seed=seed,
        seconds=time.perf_counter() - t0,
        solve_seconds=solve_t,
        mean_iterations=iters / M,
    )
