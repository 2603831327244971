"""``aasg-uq`` command-line front end.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 memory budget exceeded, 5 runs do not share grid/field parameters.
"""
from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .adaptive import AasgConfig, compare_errors, run_aasg
from .config import RunConfig, load_config
from .errors import (
    AasgError,
    BreakdownError,
    BudgetError,
    ConvergenceError,
    DegenerateError,
    InputError,
    MismatchError,
    NotSPDError,
)
from .fem import Grid2d, read_field_csv, write_field_csv
from .galerkin import DiffusionProblem, solve_sgm
from .io import RunManifest, read_json, save_coefficients, write_json
from .montecarlo import run_mc
from .multiindex import enumerate_anova_sets, full_catalog
from .randomfield import kl_2d

log = logging.getLogger("aasg")

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_BUDGET, EXIT_MISMATCH = 0, 2, 3, 4, 5

# work vectors held by CG next to the solution: b, r, z, p, Ap plus operator scratch
_CG_VECTORS = 8

_FIELD_KEYS = ("n", "N", "c", "sigma", "a0")


def _problem(cfg: RunConfig) -> DiffusionProblem:
    cfg.require("n", "N", "c", "sigma")
    grid = Grid2d(cfg.n)
    x1, x2 = grid.node_coords
    return DiffusionProblem(kl_2d(cfg.c, cfg.sigma, cfg.N, x1, x2, a0=cfg.a0), grid)


def _field_meta(cfg: RunConfig) -> dict:
    return {k: getattr(cfg, k) for k in _FIELD_KEYS}


def _write_fields(out: Path, grid: Grid2d, mean, variance, manifest: RunManifest) -> None:
    write_field_csv(out / "mean.csv", grid, mean)
    write_field_csv(out / "variance.csv", grid, variance)
    manifest.add(out / "mean.csv", out / "variance.csv")


def _summary(method: str, cfg: RunConfig, rounds: list[dict], final: dict, cost: dict) -> dict:
    return {"method": method, "config": cfg.to_dict(), "rounds": rounds, "final": final, "cost": cost}


def cmd_aasg(cfg: RunConfig, out: Path) -> int:
    cfg.require("p", "tol")
    problem = _problem(cfg)
    t0 = time.perf_counter()
    acfg = AasgConfig(
        N=cfg.N, p=cfg.p, tol=cfg.tol, n=cfg.n, c=cfg.c, sigma=cfg.sigma, a0=cfg.a0,
        solver_tol=cfg.solver_tol, maxit=cfg.maxit, max_order=cfg.max_order,
    )
    res = run_aasg(acfg, problem)
    manifest = RunManifest("aasg", cfg.to_dict(), out)
    _write_fields(out, problem.grid, res.mean, res.variance, manifest)
    manifest.add(*save_coefficients(out / "coefficients", res.coefficients, _field_meta(cfg)))
    summary = _summary(
        "aasg",
        cfg,
        [r.to_dict() for r in res.rounds],
        {"k": res.final_order, "catalog": len(res.catalog)},
        {"solve_seconds": res.solve_seconds, "seconds": time.perf_counter() - t0},
    )
    summary["table"] = res.table_row()
    summary["gamma"] = {",".join(map(str, T)): g for T, g in res.gamma.items()}
    write_json(out / "summary.json", summary)
    manifest.add(out / "summary.json")
    manifest.write()
    log.info("aasg: final k=%d, catalog %d", res.final_order, len(res.catalog))
    return EXIT_OK


def check_budget(N: int, p: int, n: int, budget_mb: float) -> int:
    """Full-space size ``C(N+p, N)``; raises ``BudgetError`` past the budget."""
    size = math.comb(N + p, N)
    need_mb = size * (n - 1) ** 2 * 8 * _CG_VECTORS / 2**20
    if need_mb > budget_mb:
        raise BudgetError(
            f"full space has C({N + p},{N}) = {size} basis functions, needing about "
            f"{need_mb:.0f} MB against a budget of {budget_mb:.0f} MB",
            size,
        )
    return size


def cmd_sgm(cfg: RunConfig, out: Path) -> int:
    cfg.require("n", "N", "p")
    check_budget(cfg.N, cfg.p, cfg.n, cfg.budget_mb)
    problem = _problem(cfg)
    t0 = time.perf_counter()
    catalog = full_catalog(cfg.N, cfg.p)
    coeffs, report = solve_sgm(catalog, problem, tol=cfg.solver_tol, maxit=cfg.maxit)
    manifest = RunManifest("sgm", cfg.to_dict(), out)
    _write_fields(out, problem.grid, coeffs.mean, coeffs.variance, manifest)
    manifest.add(*save_coefficients(out / "coefficients", coeffs, _field_meta(cfg)))
    k = min(cfg.N, cfg.p)
    n_sets = sum(len(enumerate_anova_sets(j, cfg.N)) for j in range(1, k + 1))
    rnd = {
        "k": k,
        "J_size": n_sets,
        "Jtilde_size": n_sets,
        "catalog": len(catalog),
        "cg_iters": report.iterations,
        "seconds": report.seconds,
    }
    summary = _summary(
        "sgm", cfg, [rnd], {"k": k, "catalog": len(catalog)},
        {"solve_seconds": report.seconds, "seconds": time.perf_counter() - t0},
    )
    write_json(out / "summary.json", summary)
    manifest.add(out / "summary.json")
    manifest.write()
    return EXIT_OK


def cmd_mc(cfg: RunConfig, out: Path) -> int:
    cfg.require("samples")
    problem = _problem(cfg)
    res = run_mc(problem, cfg.samples, seed=cfg.seed, tol=cfg.solver_tol, threads=cfg.threads)
    manifest = RunManifest("mc", cfg.to_dict(), out)
    _write_fields(out, problem.grid, res.mean, res.variance, manifest)
    write_json(out / "report.json", res.report())
    summary = _summary(
        "mc", cfg, [], {"k": None, "catalog": None, "samples": res.samples},
        {"solve_seconds": res.solve_seconds, "seconds": res.seconds},
    )
    write_json(out / "summary.json", summary)
    manifest.add(out / "report.json", out / "summary.json")
    manifest.write()
    return EXIT_OK


def _load_run(path: Path) -> tuple[dict, np.ndarray, np.ndarray, np.ndarray]:
    man = read_json(path / "manifest.json")
    summary = read_json(path / "summary.json")
    x1, x2, mean = read_field_csv(path / "mean.csv")
    _, _, var = read_field_csv(path / "variance.csv")
    return {"config": man["config"], "summary": summary}, np.stack([x1, x2]), mean, var


def _write_series(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["parameter", "cost_seconds", "E_err", "V_err"])
        for r in rows:
            w.writerow([r["parameter"], f"{r['cost_seconds']:.17g}", f"{r['E_err']:.17g}", f"{r['V_err']:.17g}"])


def compare_runs(approx_dir, reference_dir) -> dict:
    """Errors of a saved run against a saved reference run."""
    a, xa, am, av = _load_run(Path(approx_dir))
    b, xb, bm, bv = _load_run(Path(reference_dir))
    for key in _FIELD_KEYS:
        if a["config"].get(key) != b["config"].get(key):
            raise MismatchError(
                f"runs differ in {key}: {a['config'].get(key)!r} vs {b['config'].get(key)!r}"
            )
    if xa.shape != xb.shape or not np.array_equal(xa, xb):
        raise MismatchError("runs were written on different grids")
    grid = Grid2d(a["config"]["n"])
    e_err, v_err = compare_errors((am, av), (bm, bv), grid)
    return {
        "approx": str(approx_dir),
        "reference": str(reference_dir),
        "method": a["summary"]["method"],
        "parameter": _run_parameter(a),
        "cost_seconds": a["summary"]["cost"]["solve_seconds"],
        "E_err": e_err,
        "V_err": v_err,
    }


def _run_parameter(run: dict):
    cfg = run["config"]
    return {"aasg": cfg.get("tol"), "sgm": cfg.get("p"), "mc": cfg.get("samples")}.get(run["summary"]["method"])


def cmd_compare(cfg: RunConfig | None, out: Path, runs: list[str] | None) -> int:
    if runs:
        row = compare_runs(runs[0], runs[1])
        write_json(out / "errors.json", row)
        _write_series(out / "cost_error.csv", [row])
        manifest = RunManifest("compare", cfg.to_dict() if cfg else {"runs": runs}, out)
        manifest.add(out / "errors.json", out / "cost_error.csv")
        manifest.write()
        return EXIT_OK
    if cfg is None:
        raise InputError("compare needs either --config or two run directories")
    cfg.require("ref_p", "p")
    problem = _problem(cfg)
    check_budget(cfg.N, cfg.ref_p, cfg.n, cfg.budget_mb)
    ref, ref_report = solve_sgm(full_catalog(cfg.N, cfg.ref_p), problem, tol=cfg.solver_tol, maxit=cfg.maxit)
    reference = (ref.mean, ref.variance)
    tols = cfg.tol_list or ((cfg.tol,) if cfg.tol else (1e-1, 1e-2, 1e-3))
    sizes = cfg.samples_list or ((cfg.samples,) if cfg.samples else (100, 1000))
    aasg_rows, mc_rows = [], []
    for tol in tols:
        acfg = AasgConfig(
            N=cfg.N, p=cfg.p, tol=tol, n=cfg.n, c=cfg.c, sigma=cfg.sigma, a0=cfg.a0,
            solver_tol=cfg.solver_tol, maxit=cfg.maxit, max_order=cfg.max_order,
        )
        res = run_aasg(acfg, problem)
        e, v = compare_errors((res.mean, res.variance), reference, problem.grid)
        aasg_rows.append({
            "parameter": tol, "cost_seconds": res.solve_seconds, "E_err": e, "V_err": v,
            "k": res.final_order, "catalog": len(res.catalog),
        })
    for M in sizes:
        res = run_mc(problem, M, seed=cfg.seed, tol=cfg.solver_tol, threads=cfg.threads)
        e, v = compare_errors((res.mean, res.variance), reference, problem.grid)
        mc_rows.append({"parameter": M, "cost_seconds": res.solve_seconds, "E_err": e, "V_err": v})
    doc = {
        "reference": {"method": "sgm", "p": cfg.ref_p, "catalog": len(ref.catalog), "cg_iters": ref_report.iterations},
        "aasg": aasg_rows,
        "mc": mc_rows,
    }
    manifest = RunManifest("compare", cfg.to_dict(), out)
    write_json(out / "errors.json", doc)
    _write_series(out / "cost_error_aasg.csv", aasg_rows)
    _write_series(out / "cost_error_mc.csv", mc_rows)
    manifest.add(out / "errors.json", out / "cost_error_aasg.csv", out / "cost_error_mc.csv")
    manifest.write()
    return EXIT_OK


def cmd_kl_report(cfg: RunConfig, out: Path) -> int:
    """Eigenvalue table; ``lambda = sigma^2 * lam1 * lam2`` with unit-variance 1-D factors."""
    cfg.require("N", "c", "sigma")
    field = kl_2d(cfg.c, cfg.sigma, cfg.N, np.array([0.5]), np.array([0.5]))
    total = cfg.sigma**2
    path = out / "kl_report.csv"
    acc = 0.0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["mode", "i1", "i2", "omega1", "omega2", "lam1", "lam2", "lambda", "partial_variance"])
        for m in range(field.N):
            acc += field.eigenvalues[m]
            (i1, i2), (o1, o2), (l1, l2) = field.pairs[m], field.omegas[m], field.axis_eigenvalues[m]
            frac = acc / total if total > 0 else 0.0
            w.writerow([m + 1, i1, i2] + [f"{v:.17g}" for v in (o1, o2, l1, l2, field.eigenvalues[m], frac)])
    manifest = RunManifest("kl-report", cfg.to_dict(), out)
    manifest.add(path)
    manifest.write()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="aasg-uq", description=__doc__.splitlines()[0])
    ap.add_argument("command", choices=["aasg", "sgm", "mc", "compare", "kl-report"])
    ap.add_argument("runs", nargs="*", help="compare only: approx and reference run directories")
    ap.add_argument("--config", help="experiment config file")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, help="override mc.seed")
    ap.add_argument("--threads", type=int, help="override mc.threads")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.runs and (args.command != "compare" or len(args.runs) != 2):
            raise InputError("run directories are accepted only as 'compare <approx> <reference>'")
        cfg = None
        if args.config:
            cfg = load_config(args.config)
        elif args.command != "compare":
            raise InputError("--config is required")
        if cfg is not None:
            if args.seed is not None:
                if not 0 <= args.seed < 2**64:
                    raise InputError(f"--seed must fit in an unsigned 64-bit integer, got {args.seed}")
                cfg.seed = args.seed
            if args.threads is not None:
                if args.threads < 1:
                    raise InputError(f"--threads must be >= 1, got {args.threads}")
                cfg.threads = args.threads
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.command == "compare":
            return cmd_compare(cfg, out, args.runs)
        cmd = {"aasg": cmd_aasg, "sgm": cmd_sgm, "mc": cmd_mc, "kl-report": cmd_kl_report}[args.command]
        return cmd(cfg, out)
    except BudgetError as exc:
        print(f"aasg-uq: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except MismatchError as exc:
        print(f"aasg-uq: mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ConvergenceError, NotSPDError, BreakdownError, DegenerateError) as exc:
        print(f"aasg-uq: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, ValueError) as exc:
        print(f"aasg-uq: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AasgError as exc:
        print(f"aasg-uq: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
