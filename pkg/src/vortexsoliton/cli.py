"""Command-line front end: ``vortexsoliton {solve,sweep,bounds,crosscheck}``.

Exit status: 0 success, 2 configuration error, 3 solver did not converge,
4 bounds violation (only with ``--strict``).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .basis import default_basis
from .bounds import bounds_report, check_solution_against_bounds
from .errors import NoBracket, NotConverged, VortexError
from .model import Params, strong_residual
from .optimize import SolverSettings, minimize_nehari, minimize_sphere
from .oracle import flux_of_kappa, profile_for_kappa
from .records import (SWEEP_HEADER, ResultRecord, RunConfig, fmt, parse_values, profile_csv,
                      read_config, table_csv)

EXIT_OK, EXIT_CONFIG, EXIT_NOT_CONVERGED, EXIT_BOUNDS = 0, 2, 3, 4

log = logging.getLogger("vortexsoliton")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value file; flags override it")
    common.add_argument("--alpha", type=float)
    common.add_argument("--n", type=int, help="winding number")
    common.add_argument("--R", type=float, help="domain radius")
    common.add_argument("--Q0", type=float, help="prescribed energy flux")
    common.add_argument("--kappa", type=float, help="prescribed propagation constant")
    common.add_argument("--N", type=int, help="number of basis functions")
    common.add_argument("--basis", choices=("sine", "hat"))
    common.add_argument("--cells", type=int, help="quadrature cells (hat basis: N + 1)")
    common.add_argument("--jobs", type=int, help="worker processes for sweeps")
    common.add_argument("--seed", type=int)
    common.add_argument("--restarts", type=int, help="extra randomized starts")
    common.add_argument("--max-iters", dest="max_iters", type=int)
    common.add_argument("--grad-tol", dest="grad_tol", type=float)
    common.add_argument("--metric", choices=("hessian", "stiffness", "euclidean"))
    common.add_argument("--out", help="directory for output files")
    common.add_argument("--format", choices=("csv", "json"), help="stdout format")
    common.add_argument("--strict", action="store_const", const=True,
                        help="exit 4 when a result violates a bound")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="vortexsoliton",
                                     description="Ring-profiled vortex solitons in saturable media.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("solve", parents=[common], help="one solve at fixed Q0 or fixed kappa")
    sw = sub.add_parser("sweep", parents=[common], help="solve over a parameter grid")
    sw.add_argument("--grid-param", dest="grid_param", choices=("Q0", "n", "kappa", "alpha", "R"))
    sw.add_argument("--values", type=parse_values, help="comma-separated grid values")
    sub.add_parser("bounds", parents=[common], help="closed-form estimates for a parameter set")
    sub.add_parser("crosscheck", parents=[common], help="variational solve checked by shooting")
    return parser


def build_config(argv) -> RunConfig:
    args = _parser().parse_args(argv)
    merged = {}
    if args.config:
        merged.update(read_config(args.config))
    for key, value in vars(args).items():
        if key in ("config", "verbose") or value is None:
            continue
        merged[key] = value
    cfg = RunConfig(**merged)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    return cfg.validate()


def _settings(cfg: RunConfig) -> SolverSettings:
    return SolverSettings(max_iters=cfg.max_iters, grad_tol=cfg.grad_tol, restarts=cfg.restarts,
                          seed=cfg.seed, metric=cfg.metric)


def _basis(cfg: RunConfig):
    return default_basis(cfg.basis, cfg.N, cfg.R, cfg.cells)


def _record(cfg: RunConfig, res, Q0: float, t_start: float) -> ResultRecord:
    rep = bounds_report(res.params, Q0, res.kappa)
    viol = check_solution_against_bounds(res, rep)
    return ResultRecord(
        inputs=cfg.echo(), mode=res.mode, kappa=res.kappa, flux=res.flux, action=res.action,
        residual=res.residual, converged=res.converged, iterations=res.iterations,
        grad_norm=res.grad_norm, bounds=rep.as_dict(),
        violations=[dict(code=v.code, message=v.message, advisory=v.advisory) for v in viol],
        wall_time=time.perf_counter() - t_start, seed=cfg.seed,
        extras={k: float(v) for k, v in res.extras.items()},
    )


def solve(cfg: RunConfig):
    """Run one solve; returns ``(record, result)``. ``NotConverged`` carries the best iterate."""
    p = Params(cfg.alpha, cfg.n, cfg.R)
    basis = _basis(cfg)
    t0 = time.perf_counter()
    if cfg.Q0 is not None:
        res = minimize_sphere(cfg.Q0, p, basis, _settings(cfg))
        return _record(cfg, res, cfg.Q0, t0), res
    res = minimize_nehari(cfg.kappa, p, basis, _settings(cfg))
    return _record(cfg, res, res.flux, t0), res


def _write(out: str | None, name: str, text: str) -> None:
    if out is None:
        return
    d = Path(out)
    d.mkdir(parents=True, exist_ok=True)
    (d / name).write_text(text, encoding="utf-8")


def _profile_text(res) -> str:
    u = res.field
    return profile_csv(u.r, u.u, u.u_r)


def _strict_exit(cfg: RunConfig, records) -> int:
    if cfg.strict and any(not r.bounds_ok for r in records):
        return EXIT_BOUNDS
    return EXIT_OK


def run_solve(cfg: RunConfig) -> int:
    try:
        rec, res = solve(cfg)
    except NotConverged as exc:
        if exc.best is not None:
            Q0 = cfg.Q0 if cfg.Q0 is not None else exc.best.flux
            rec = _record(cfg, exc.best, Q0, time.perf_counter())
            _write(cfg.out, "result.json", rec.to_json())
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    _write(cfg.out, "profile.csv", _profile_text(res))
    _write(cfg.out, "result.json", rec.to_json())
    _write(cfg.out, "bounds.json", json.dumps(rec.bounds, indent=2, sort_keys=True))
    if cfg.format == "json":
        print(rec.to_json())
    else:
        print(table_csv(("kappa", "flux", "action", "residual", "converged"), [rec.to_dict()]), end="")
    for v in rec.violations:
        print(("advisory: " if v["advisory"] else "violation: ") + v["message"], file=sys.stderr)
    return _strict_exit(cfg, [rec])


def _with(cfg: RunConfig, param: str, value: float) -> RunConfig:
    d = cfg.echo()
    d["values"] = ()
    d["command"] = "solve"
    d[param] = int(round(value)) if param == "n" else value
    return RunConfig(**d)


def sweep_point(cfg: RunConfig, value: float) -> dict:
    """One row of a sweep; failures become a ``converged = false`` row."""
    row = dict(param=value, kappa=math.nan, flux=math.nan, residual=math.nan, converged=False)
    point = _with(cfg, cfg.grid_param, value)
    try:
        rec, _ = solve(point)
    except NotConverged as exc:
        if exc.best is not None:
            row.update(kappa=exc.best.kappa, flux=exc.best.flux, residual=exc.best.residual)
        return dict(row, record=None, error=str(exc))
    except VortexError as exc:
        return dict(row, record=None, error=str(exc))
    row.update(kappa=rec.kappa, flux=rec.flux, residual=rec.residual, converged=rec.converged)
    return dict(row, record=rec.to_dict(), error=None)


def _kappa_sweep(cfg: RunConfig) -> list[dict]:
    p = Params(cfg.alpha, cfg.n, cfg.R)
    basis = _basis(cfg)
    curve = flux_of_kappa(cfg.values, p)
    rows = []
    for k, q, ok, prof in zip(curve.kappa, curve.flux, curve.ok, curve.profiles):
        res = math.nan
        if ok:
            res = strong_residual(prof.project(basis), p, k, smooth=not basis.smooth)
        rows.append(dict(param=float(k), kappa=float(k), flux=float(q), residual=float(res),
                         converged=bool(ok), record=None, error=None if ok else "no bracket"))
    return rows


def run_sweep(cfg: RunConfig) -> int:
    if cfg.grid_param == "kappa":
        rows = _kappa_sweep(cfg)
    elif cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            rows = list(pool.map(sweep_point, [cfg] * len(cfg.values), cfg.values))
    else:
        rows = [sweep_point(cfg, v) for v in cfg.values]
    table = table_csv(SWEEP_HEADER, rows)
    y = "flux" if cfg.grid_param == "kappa" else "kappa"
    curve = table_csv(("param", y), rows).replace("param", cfg.grid_param, 1)
    _write(cfg.out, "sweep.csv", table)
    _write(cfg.out, f"curve_{cfg.grid_param}_{y}.csv", curve)
    _write(cfg.out, "sweep.json", json.dumps(
        {"schema": 1, "config": cfg.echo(), "rows": rows}, indent=2, sort_keys=True))
    if cfg.format == "json":
        print(json.dumps([{h: r[h] for h in SWEEP_HEADER} for r in rows], indent=2))
    else:
        print(table, end="")
    for r in rows:
        if r["error"]:
            print(f"point {fmt(r['param'])}: {r['error']}", file=sys.stderr)
    records = [ResultRecord.from_dict(r["record"]) for r in rows if r["record"] is not None]
    return _strict_exit(cfg, records)


def run_bounds(cfg: RunConfig) -> int:
    rep = bounds_report(Params(cfg.alpha, cfg.n, cfg.R), cfg.Q0, cfg.kappa)
    d = rep.as_dict()
    _write(cfg.out, "bounds.json", json.dumps(d, indent=2, sort_keys=True))
    if cfg.format == "json":
        print(json.dumps(d, indent=2, sort_keys=True))
    else:
        print("key,value")
        for k, v in d.items():
            print(f"{k},{fmt(v)}")
    return EXIT_OK


def crosscheck(cfg: RunConfig) -> dict:
    """Variational solve at ``Q0`` compared with the shooting profile at the recovered kappa."""
    rec, res = solve(cfg)
    prof = profile_for_kappa(res.kappa, res.params)
    u = res.field
    projected = prof.project(res.basis)
    return {
        "kappa": res.kappa, "Q0": cfg.Q0, "variational_flux": res.flux,
        "shooting_flux": prof.flux(), "flux_rel_error": abs(prof.flux() - cfg.Q0) / cfg.Q0,
        "variational_max_u": float(np.max(u.u)), "shooting_max_u": prof.max_u,
        "max_u_rel_error": abs(prof.max_u - float(np.max(u.u))) / float(np.max(u.u)),
        "shooting_core_slope": prof.c,
        "projected_residual": strong_residual(projected, res.params, res.kappa,
                                              smooth=not res.basis.smooth),
        "record": rec.to_dict(),
    }


def run_crosscheck(cfg: RunConfig) -> int:
    try:
        out = crosscheck(cfg)
    except NotConverged as exc:
        print(f"not converged: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except NoBracket as exc:
        print(f"shooting failed: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    _write(cfg.out, "crosscheck.json", json.dumps(out, indent=2, sort_keys=True))
    flat = {k: v for k, v in out.items() if k != "record"}
    if cfg.format == "json":
        print(json.dumps(flat, indent=2, sort_keys=True))
    else:
        print("key,value")
        for k, v in flat.items():
            print(f"{k},{fmt(v)}")
    return _strict_exit(cfg, [ResultRecord.from_dict(out["record"])])


COMMANDS = {"solve": run_solve, "sweep": run_sweep, "bounds": run_bounds, "crosscheck": run_crosscheck}


def main(argv=None) -> int:
    try:
        cfg = build_config(sys.argv[1:] if argv is None else argv)
        return COMMANDS[cfg.command](cfg)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except VortexError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
