"""Adaptive ANOVA stochastic Galerkin driver.

Each round solves the Galerkin system on the catalog spanned by the active
sets of orders 1..k, scores every active set by the L2 norm of its variance
field relative to the sum over all active sets, keeps the order-k sets whose
score reaches ``TOL`` and activates the order-(k+1) sets all of whose
order-k subsets were kept.
"""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DegenerateError, InputError
from .fem import Grid2d, l2_norm
from .galerkin import DiffusionProblem, GpcCoefficients, component_variance, solve_sgm
from .multiindex import AnovaSet, IndexCatalog, admissible_next, build_catalog, enumerate_anova_sets
from .randomfield import kl_2d
from .sparsela import SolveReport

log = logging.getLogger(__name__)

__all__ = [
    "AasgConfig",
    "AasgRound",
    "AasgResult",
    "relative_variances",
    "run_aasg",
    "compare_errors",
    "build_problem",
]


@dataclass
class AasgConfig:
    N: int
    p: int
    tol: float
    n: int = 32
    c: float = 0.25
    sigma: float = 0.25
    a0: float = 1.0
    solver_tol: float = 1e-8
    maxit: int | None = None
    max_order: int | None = None

    def __post_init__(self):
        if not self.tol > 0:
            raise InputError(f"TOL must be positive, got {self.tol}")
        if self.p < 1:
            raise InputError(f"gPC degree must be >= 1, got {self.p}")
        if self.N < 1:
            raise InputError(f"dimension must be >= 1, got {self.N}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class AasgRound:
    k: int
    active: list[AnovaSet]
    retained: list[AnovaSet]
    catalog_size: int
    report: SolveReport

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "J_size": len(self.active),
            "Jtilde_size": len(self.retained),
            "catalog": self.catalog_size,
            "cg_iters": self.report.iterations,
            "seconds": self.report.seconds,
        }


@dataclass
class AasgResult:
    rounds: list[AasgRound]
    gamma: dict[AnovaSet, float]
    coefficients: GpcCoefficients
    next_active: list[AnovaSet] = field(default_factory=list)

    @property
    def final_order(self) -> int:
        return self.rounds[-1].k if self.rounds else 0

    @property
    def catalog(self) -> IndexCatalog:
        return self.coefficients.catalog

    @property
    def mean(self) -> np.ndarray:
        return self.coefficients.mean

    @property
    def variance(self) -> np.ndarray:
        return self.coefficients.variance

    @property
    def solve_seconds(self) -> float:
        return sum(r.report.seconds for r in self.rounds)

    def table_row(self, max_order: int | None = None) -> dict:
        """Per-order |J_k| and |J~_k| counts, final k and catalog size."""
        row = {}
        orders = max_order or max((r.k for r in self.rounds), default=0)
        by_k = {r.k: r for r in self.rounds}
        for k in range(1, orders + 1):
            r = by_k.get(k)
            row[f"J{k}"] = len(r.active) if r else (len(self.next_active) if k == self.final_order + 1 else 0)
            row[f"Jt{k}"] = len(r.retained) if r else 0
        row["k"] = self.final_order
        row["catalog"] = len(self.catalog)
        return row


def relative_variances(
    coeffs: GpcCoefficients, active: list[list[AnovaSet]], grid: Grid2d
) -> dict[AnovaSet, float]:
    """Relative variance of every active set against the sum over all active sets."""
    norms = {}
    for group in active:
        for T in group:
            T = tuple(T)
            norms[T] = l2_norm(grid, component_variance(coeffs, T)) if coeffs.catalog.has_set(T) else 0.0
    total = sum(norms.values())
    if total == 0.0:
        raise DegenerateError("all component variances vanish")
    return {T: v / total for T, v in norms.items()}


def build_problem(cfg: AasgConfig, source=1.0) -> DiffusionProblem:
    grid = Grid2d(cfg.n)
    x1, x2 = grid.node_coords
    field = kl_2d(cfg.c, cfg.sigma, cfg.N, x1, x2, a0=cfg.a0)
    return DiffusionProblem(field, grid, source)


def run_aasg(cfg: AasgConfig, problem: DiffusionProblem | None = None) -> AasgResult:
    """Run the adaptive loop until no order is left to activate or k reaches N."""
    if problem is None:
        problem = build_problem(cfg)
    if problem.N != cfg.N:
        raise InputError(f"problem has {problem.N} random variables, config says {cfg.N}")
    N, p = cfg.N, cfg.p
    max_order = N if cfg.max_order is None else cfg.max_order
    active: list[list[AnovaSet]] = [enumerate_anova_sets(1, N)]
    rounds: list[AasgRound] = []
    gamma: dict[AnovaSet, float] = {}
    coeffs = None
    k = 1
    while True:
        catalog = build_catalog(active, p, N)
        t0 = time.perf_counter()
        coeffs, report = solve_sgm(catalog, problem, tol=cfg.solver_tol, maxit=cfg.maxit, warm=coeffs)
        log.info("round k=%d: catalog %d, %d CG iterations, %.2fs", k, len(catalog), report.iterations, time.perf_counter() - t0)
        try:
            gamma = relative_variances(coeffs, active, problem.grid)
        except DegenerateError:
            log.info("all variances vanish; returning the mean-only solution")
            rounds.append(AasgRound(k, list(active[-1]), [], len(catalog), report))
            return AasgResult(rounds, {}, coeffs, [])
        retained = [T for T in active[-1] if gamma[T] >= cfg.tol]
        # sets of order > p have no basis functions and are never activated
        nxt = admissible_next(retained, N) if k + 1 <= min(N, p) else []
        rounds.append(AasgRound(k, list(active[-1]), retained, len(catalog), report))
        k += 1
        if k >= N or k > max_order or not nxt:
            return AasgResult(rounds, gamma, coeffs, nxt)
        active.append(nxt)


def compare_errors(approx, reference, grid: Grid2d) -> tuple[float, float]:
    """Relative L2 errors ``(E_err, V_err)`` of mean and variance fields."""
    (am, av), (rm, rv) = approx, reference
    dm = l2_norm(grid, rm)
    dv = l2_norm(grid, rv)
    if dm == 0.0 or dv == 0.0:
        raise DegenerateError("reference mean or variance has zero norm")
    return l2_norm(grid, np.asarray(am) - rm) / dm, l2_norm(grid, np.asarray(av) - rv) / dv
