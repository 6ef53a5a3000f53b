"""Command-line front end: ``affgaudin <subcommand> [--spec FILE] [flags]``.

Exit codes: 0 success with every verdict PASS, 2 some verdict FAIL, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from fractions import Fraction
from typing import List, Optional

import numpy as np

from . import __version__
from .bethe import SolveOptions, kdv_spec, solve
from .exceptions import AffGaudinError, SpecValidationError
from .monodromy import default_lambda_grid, default_threads, monodromy_matrix
from .pipelines import (blz_check, build_opers, check_monodromy, coset_check, dmt_commute, gaudin_spectrum,
                        rational_kdv_run)
from .serialize import dumps, jsonable, load_spec, read_spec_file, validate, write_csv, write_json

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2


def _complex(s: str) -> complex:
    return complex(s.strip().replace("i", "j"))


def parse_lambda_grid(s: Optional[str]):
    if s is None or s == "default":
        return None
    return [_complex(x) for x in s.split(",") if x.strip()]


def _rationals(s: str) -> List[Fraction]:
    return [Fraction(x) for x in s.split(",") if x.strip()]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", help="problem spec (JSON)")
    common.add_argument("--out", help="write the JSON report here (stdout otherwise)")
    common.add_argument("--csv", help="write the main table as CSV")
    common.add_argument("--seed", type=int, help="random seed (overrides the spec)")
    common.add_argument("--tol", type=float, help="solver / verdict tolerance")
    common.add_argument("--grade-cap", type=int, help="module grade cap")
    common.add_argument("--lambda-grid", help="comma-separated spectral values or 'default'")
    common.add_argument("--threads", type=int, help="worker threads (default from AFFGAUDIN_THREADS)")

    p = argparse.ArgumentParser(prog="affgaudin", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"affgaudin {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="schema and semantic checks of a spec")
    sub.add_parser("solve-bethe", parents=[common], help="multistart Bethe solve")
    sub.add_parser("build-oper", parents=[common], help="solve, build opers, tabulate residuals")
    sub.add_parser("check-monodromy", parents=[common], help="solve, build opers, numerical monodromy scan")
    q = sub.add_parser("map-blz", parents=[common], help="BLZ change of variables of KdV opers")
    q.add_argument("--ell", type=Fraction)
    q.add_argument("--k", type=Fraction)
    q.add_argument("--m", type=int, default=0, help="number of roots")
    sub.add_parser("gaudin-spectrum", parents=[common], help="spectra of the quadratic Gaudin Hamiltonians")
    q = sub.add_parser("rational-kdv", parents=[common], help="rational KdV / AMM configurations")
    q.add_argument("--m0", type=int, required=True)
    q = sub.add_parser("coset-check", parents=[common], help="GKO coset identity on two integrable modules")
    q.add_argument("--k1", type=Fraction, required=True)
    q.add_argument("--k2", type=Fraction, required=True)
    q.add_argument("--l1", default="0", help="Dynkin labels, comma separated")
    q.add_argument("--l2", default="0")
    q.add_argument("--grade", type=int, default=2)
    q.add_argument("--algebra", default="sl2_affine")
    q = sub.add_parser("dmt-commute", parents=[common], help="exact DMT commutator checks")
    q.add_argument("--algebra")
    q.add_argument("--hw", help="highest weight Dynkin labels, comma separated")
    q.add_argument("--level", type=Fraction)
    q.add_argument("--trials", type=int, default=3)
    q.add_argument("--depth-cap", type=int)
    return p


def _load(args):
    if not args.spec:
        raise AffGaudinError("--spec is required for this subcommand")
    doc = read_spec_file(args.spec)
    spec = load_spec(doc)
    s = spec.solver
    if args.seed is not None:
        s = replace(s, seed=args.seed)
    if args.tol is not None:
        s = replace(s, tol=args.tol)
    threads = args.threads if args.threads is not None else s.threads if s.threads > 1 else default_threads()
    spec.solver = replace(s, threads=threads)
    if args.grade_cap is not None:
        spec.grade_cap = args.grade_cap
    grid = parse_lambda_grid(args.lambda_grid)
    if grid is not None:
        spec.monodromy["lambda_grid"] = grid
    return doc, spec


def _solve(spec):
    return solve(spec.model, spec.counts, spec.solver)


def _mono_kwargs(spec, args):
    m = spec.monodromy
    return {"lam_grid": m.get("lambda_grid"), "tol": m.get("tol", 1e-6), "rtol": m.get("rtol", 1e-10),
            "radius": m.get("radius"), "threads": spec.solver.threads}


def cmd_validate(args):
    doc = read_spec_file(args.spec) if args.spec else None
    if doc is None:
        raise AffGaudinError("--spec is required")
    diags = validate(doc)
    return {"spec": doc, "diagnostics": diags}, [{"diagnostic": d} for d in diags], \
        (EXIT_ERROR if diags else EXIT_OK)


def cmd_solve(args):
    doc, spec = _load(args)
    rep = _solve(spec)
    rows = [{"solution": i, "w": w, "color": c, "residual_norm": rep.residual_norms[i]}
            for i, cfg in enumerate(rep.solutions) for w, c in cfg.roots]
    return {"spec": doc, "solve": rep}, rows, EXIT_OK


def cmd_build_oper(args):
    doc, spec = _load(args)
    rep = _solve(spec)
    res = build_opers(rep, args.tol or 1e-10)
    out = {"spec": doc, "solve": rep, "opers": res["opers"], "residuals": res["residuals"],
           "max_residual": res["max_residual"], "verdict": res["verdict"]}
    if spec.output.get("blz") and spec.model.model == "kdv":
        out["blz"] = [blz_check(op) for op in res["opers"]]
    return out, res["residuals"], EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL


def cmd_check_monodromy(args):
    doc, spec = _load(args)
    rep = _solve(spec)
    res = build_opers(rep)
    mono = check_monodromy(res["opers"], **_mono_kwargs(spec, args))
    rows = []
    for i, scan in enumerate(mono["scans"]):
        for p in scan.points:
            for lam, d, wr in zip(scan.lam_grid, p.deviations, p.wronskian):
                rows.append({"solution": i, "w": p.w, "radius": p.radius, "lambda": lam, "deviation": d,
                             "wronskian_deviation": wr})
    if spec.output.get("trajectories"):
        traj = []
        for i, scan in enumerate(mono["scans"]):
            for p in scan.points:
                r = monodromy_matrix(res["opers"][i], _contour(p), scan.lam_grid[0], keep_trajectory=True)
                traj.append({"solution": i, "w": p.w, "samples": r.trajectory})
        mono["trajectories"] = traj
    ok = mono["verdict"] == "PASS" and res["verdict"] == "PASS"
    out = {"spec": doc, "solve": rep, "opers": res["opers"], "residuals": res["residuals"],
           "algebraic_verdict": res["verdict"], "monodromy": mono, "verdict": "PASS" if ok else "FAIL"}
    return out, rows, EXIT_OK if ok else EXIT_FAIL


def _contour(p):
    from .monodromy import Contour

    return Contour(p.w, p.radius)


def cmd_map_blz(args):
    if args.spec:
        doc, spec = _load(args)
        if spec.model.model != "kdv":
            raise AffGaudinError("map-blz needs a kdv model spec")
        model, counts, opts = spec.model, spec.counts, spec.solver
    else:
        if args.ell is None or args.k is None:
            raise AffGaudinError("give --spec or both --ell and --k")
        model = kdv_spec(args.ell, args.k)
        counts = {0: args.m}
        opts = SolveOptions(seed=args.seed or SolveOptions.seed)
        doc = {"model": "kdv", "algebra": "sl2_affine", "levels": [str(args.k)], "weights": [[str(2 * args.ell)]],
               "sites": [0], "counts": {"0": args.m}}
    rep = solve(model, counts, opts)
    res = build_opers(rep)
    checks = [blz_check(op) for op in res["opers"]]
    ok = all(c["verdict"] == "PASS" for c in checks) and res["verdict"] == "PASS"
    rows = [{"solution": i, "alpha": c["params"].alpha, "p": c["params"].p, "ell_tilde": c["params"].ell_tilde,
             "max_error": c["max_error"], "relation_error": c["relation_error"]} for i, c in enumerate(checks)]
    return {"spec": doc, "solve": rep, "opers": res["opers"], "blz": checks,
            "verdict": "PASS" if ok else "FAIL"}, rows, EXIT_OK if ok else EXIT_FAIL


def cmd_gaudin_spectrum(args):
    doc, spec = _load(args)
    res = gaudin_spectrum(spec.model, spec.grade_cap, spec.module_kind)
    rows = [{"operator": name, "eigenvalue": e} for name, vals in res["spectra"].items() for e in vals]
    out = {"spec": doc, "dim": res["dim"], "grade_dims": res["grade_dims"], "sum_zero": res["sum_zero"],
           "commute": res["commute"], "spectra": res["spectra"], "verdict": res["verdict"]}
    if spec.counts:
        from .bethe import bethe_vector, eigentest

        rep = _solve(spec)
        tests = []
        for cfg in rep.solutions:
            vec = bethe_vector(cfg, res["module"])
            tests.append(eigentest(vec, res["operators"]) if vec else {"status": "zero_vector"})
        out["solve"] = rep
        out["eigentests"] = tests
    return out, rows, EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL


def cmd_rational_kdv(args):
    opts = SolveOptions()
    if args.seed is not None:
        opts = replace(opts, seed=args.seed)
    opts = replace(opts, threads=args.threads or default_threads())
    res = rational_kdv_run(args.m0, opts, parse_lambda_grid(args.lambda_grid), args.tol or 1e-12)
    rows = [{"class": i, "shape": c["shape"], "amm_residual": c["amm_residual"],
             "positions": c["positions"]} for i, c in enumerate(res.get("classes", []))]
    res = dict(res)
    res["spec"] = {"model": "rational_kdv", "algebra": "sl2_affine", "counts": {"0": args.m0},
                   "solver": {"seed": opts.seed}}
    return res, rows, EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL


def cmd_coset_check(args):
    grade = args.grade_cap if args.grade_cap is not None else args.grade
    res = coset_check(args.k1, args.k2, _rationals(args.l1), _rationals(args.l2), grade, args.algebra,
                      args.tol or 1e-10)
    rows = [{"eigenvalue": e} for e in res["spectrum"]]
    res["spec"] = {"k1": str(args.k1), "k2": str(args.k2), "l1": args.l1, "l2": args.l2, "grade": grade,
                   "algebra": args.algebra}
    return res, rows, EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL


def cmd_dmt_commute(args):
    if args.spec:
        doc, spec = _load(args)
        m = spec.model
        alg_name, hw = m.algebra.name, m.weights[0].coords
        level = m.weights[0].level if m.algebra.is_affine else None
        shift = m.shift.coords if m.shift is not None else None
        gammas = spec.gammas or None
        cap = spec.grade_cap
        seed = spec.solver.seed
    else:
        if not args.algebra or not args.hw:
            raise AffGaudinError("give --spec or --algebra and --hw")
        alg_name, hw, level, shift, gammas = args.algebra, _rationals(args.hw), args.level, None, None
        cap = args.grade_cap if args.grade_cap is not None else 3
        seed = args.seed if args.seed is not None else 20240611
        doc = {"algebra": alg_name, "hw": args.hw, "level": None if level is None else str(level), "grade_cap": cap}
    if args.seed is not None:
        seed = args.seed
    res = dmt_commute(alg_name, hw, cap, shift, gammas, args.trials, seed, level, args.depth_cap)
    t = res.pop("seconds")
    res["spec"] = doc
    res["_seconds"] = t
    rows = [{k: v for k, v in r.items()} for r in res["checks"]]
    return res, rows, EXIT_OK if res["verdict"] == "PASS" else EXIT_FAIL


COMMANDS = {
    "validate": cmd_validate,
    "solve-bethe": cmd_solve,
    "build-oper": cmd_build_oper,
    "check-monodromy": cmd_check_monodromy,
    "map-blz": cmd_map_blz,
    "gaudin-spectrum": cmd_gaudin_spectrum,
    "rational-kdv": cmd_rational_kdv,
    "coset-check": cmd_coset_check,
    "dmt-commute": cmd_dmt_commute,
}


def run(argv: Optional[List[str]] = None) -> int:
    args = _parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        result, rows, code = COMMANDS[args.command](args)
    except SpecValidationError as exc:
        report = {"tool": "affgaudin", "version": __version__, "subcommand": args.command,
                  "error": "spec validation failed", "diagnostics": exc.diagnostics}
        _emit(args, report, [{"diagnostic": d} for d in exc.diagnostics])
        return EXIT_ERROR
    except (AffGaudinError, OSError, ValueError, json.JSONDecodeError) as exc:
        report = {"tool": "affgaudin", "version": __version__, "subcommand": args.command,
                  "error": f"{type(exc).__name__}: {exc}"}
        _emit(args, report, [])
        return EXIT_ERROR
    extra = result.pop("_seconds", None) if isinstance(result, dict) else None
    report = {"tool": "affgaudin", "version": __version__, "subcommand": args.command,
              "timings": {"seconds": time.perf_counter() - t0, **({"core": extra} if extra else {})}}
    report.update(result)
    report.setdefault("verdict", "PASS" if code == EXIT_OK else "FAIL")
    _emit(args, report, rows)
    return code


def _emit(args, report, rows):
    if args.out:
        write_json(args.out, report)
    else:
        sys.stdout.write(dumps(report) + "\n")
    if getattr(args, "csv", None):
        write_csv(args.csv, rows)
    verdict = report.get("verdict") or ("ERROR" if "error" in report else "")
    msg = report.get("error", "")
    print(f"affgaudin {args.command}: {verdict} {msg}".rstrip(), file=sys.stderr)


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
