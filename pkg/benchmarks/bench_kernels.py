"""Time the compiled and pure-Python kernel backends on one Galerkin system.

Usage::

    python benchmarks/bench_kernels.py [--N 10] [--p 3] [--n 32] [--repeat 5]

Reports best-of-repeat wall time per operation and the Python/compiled ratio.
"""
import argparse
import time

import numpy as np

from aasg import kernels
from aasg.adaptive import AasgConfig, build_problem
from aasg.galerkin import galerkin_operator, solve_sgm
from aasg.multiindex import full_catalog
from aasg.sparsela import MeanPreconditioner, cholesky_factor, csr_matvec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run(N, p, n, repeat):
    problem = build_problem(AasgConfig(N=N, p=p, tol=1.0, n=n))
    catalog = full_catalog(N, p)
    op = galerkin_operator(catalog, problem)
    A0 = problem.matrices[0]
    rng = np.random.default_rng(0)
    v = rng.standard_normal(op.shape[0])
    x = rng.standard_normal(A0.shape[0])

    cases = {
        "csr_matvec": lambda: csr_matvec(A0, x),
        "kron_apply": lambda: op.matvec(v),
        "band_cholesky": lambda: cholesky_factor(A0),
        "mean_precond": lambda: MeanPreconditioner(problem.mean_factor, len(catalog)).solve(v),
        "solve_sgm": lambda: solve_sgm(catalog, problem),
    }
    results = {}
    for name in kernels.available():
        with kernels.use(name):
            results[name] = {case: best_of(fn, 1 if case == "solve_sgm" else repeat) for case, fn in cases.items()}

    print(f"N={N} p={p} n={n}: {len(catalog)} blocks x {A0.shape[0]} unknowns, {len(op.terms)} terms")
    names = list(results)
    print(f"{'operation':<15}" + "".join(f"{b:>12}" for b in names) + ("       ratio" if len(names) == 2 else ""))
    for case in cases:
        row = f"{case:<15}" + "".join(f"{results[b][case] * 1e3:>10.2f}ms" for b in names)
        if len(names) == 2:
            row += f"{results['python'][case] / results['cython'][case]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=10)
    ap.add_argument("--p", type=int, default=3)
    ap.add_argument("--n", type=int, default=32)
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    run(a.N, a.p, a.n, a.repeat)
