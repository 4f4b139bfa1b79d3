"""Command-line entry point.

    stochorder <subcommand> PROBLEM.json [--out report.json] [--csv surface.csv] ...
    stochorder verify <suite> [--fixtures DIR]

Exit codes: 0 success, 1 verify failure, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import pathlib
import sys

import numpy as np

from . import problems as pb
from .errors import InvariantViolation, NumericalFailure, StochOrderError, ValidationError
from .measure import as_float

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_NUMERIC = 0, 1, 2, 3
FIXTURE_DIR = pathlib.Path(__file__).resolve().parent / "fixtures"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(as_float(obj).tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if obj is None or isinstance(obj, (str, int)):
        return obj
    try:
        return float(obj)
    except (TypeError, ValueError):
        return str(obj)


def _surface(grid, **cols):
    rows = []
    for i, p in enumerate(grid.points):
        row = {f"x{k}": float(v) for k, v in enumerate(p)}
        for name, vals in cols.items():
            row[name] = float(vals[i])
        rows.append(row)
    return rows


# ---------------------------------------------------------------- handlers
# each returns (report dict, csv rows or None)


def run_envelope(p, args):
    from .envelope import c_envelope

    grid = pb.parse_grid(p["grid"], args.grid_resolution)
    f = pb.parse_function(p["f"], grid)
    cone = pb.parse_cone(p.get("cone", "concave"))
    res = c_envelope(f, grid, cone, exact=args.exact)
    report = {"fbar": res.fbar, "contact_set": res.contact_set, "method": res.method}
    return report, _surface(grid, f=f, fbar=res.fbar)


def run_solve(p, args):
    from .optimize import solve_primal

    pb.require(p, "grid", "f", "mu")
    grid = pb.parse_grid(p["grid"], args.grid_resolution)
    f = pb.parse_function(p["f"], grid)
    mu = pb.parse_measure(p["mu"], grid, args.exact)
    cone = pb.parse_cone(p.get("cone", "concave"))
    rep = solve_primal(f, mu, cone, exact=args.exact, seed=args.seed)
    return rep.to_json(), _surface(grid, f=f, optimizer=rep.optimizer.weights)


def run_couple(p, args):
    from .coupling import strassen_coupling

    pb.require(p, "grid", "mu", "nu")
    grid = pb.parse_grid(p["grid"], args.grid_resolution)
    mu = pb.parse_measure(p["mu"], grid, args.exact)
    nu = pb.parse_measure(p["nu"], grid, args.exact)
    res = strassen_coupling(mu, nu, pb.parse_cone(p.get("cone", "concave")), exact=args.exact)
    report = {"status": res.status, "margin": res.margin,
              "kernel": res.kernel.to_json() if res.kernel is not None else None,
              "farkas": res.farkas}
    return report, None


def run_expose(p, args):
    from .coupling import lsd_exposed_construct, mps_exposed_construct

    pb.require(p, "grid", "f")
    grid = pb.parse_grid(p["grid"], args.grid_resolution)
    f = pb.parse_function(p["f"], grid)
    mu = pb.parse_measure(p.get("mu", "uniform"), grid)
    kind = p.get("construction", "mps")
    if kind not in ("mps", "lsd"):
        raise ValidationError(f"unknown construction {kind!r}")
    c = (mps_exposed_construct if kind == "mps" else lsd_exposed_construct)(f, mu)
    report = c.to_json()
    report["extreme"] = None if c.extreme is None else {
        "is_extreme": c.extreme.is_extreme, "method": c.extreme.method}
    region_of = np.full(len(grid), -1)
    for k, r in enumerate(c.regions):
        region_of[list(r.points)] = k
    return report, _surface(grid, f=f, fbar=c.fbar, region=region_of, nu=c.nu.weights)


def run_blackwell(p, args):
    from .blackwell import consistency_check

    pb.require(p, "grid", "cone", "family")
    grid = pb.parse_grid(p["grid"], args.grid_resolution)
    rep = consistency_check(pb.parse_cone(p["cone"]), pb.parse_family(p["family"], grid, args.exact),
                            seed=args.seed, exact=args.exact)
    w = rep.max_closed.witness
    report = {"consistent": rep.consistent, "residuals": rep.residuals,
              "closure": rep.max_closed.label,
              "closure_witness": None if w is None else {"g1": w[0], "g2": w[1], "op": w[2]},
              "composition_closed": rep.composition_closed[0]}
    return report, None


def run_design(p, args):
    from .blackwell import constrained_design
    from .envelope import concavification

    pb.require(p, "grid", "f", "family", "prior")
    grid = pb.parse_grid(p["grid"], args.grid_resolution)
    f = pb.parse_function(p["f"], grid)
    fam = pb.parse_family(p["family"], grid, args.exact)
    prior = pb.parse_measure({"dirac_at": p["prior"]}, grid)
    x0 = int(prior.support()[0])
    rep = constrained_design(f, x0, fam, exact=args.exact)
    cav = concavification(f, grid)
    report = {"value": rep.value, "nu": rep.nu.to_json(), "iterations": rep.iterations,
              "converged": rep.converged, "composition_closed": rep.composition_closed,
              "certificate": rep.certificate, "unconstrained_value": cav[x0]}
    return report, _surface(grid, f=f, constrained_envelope=rep.fhat, concavification=cav)


def run_updating(p, args):
    from .updating import UpdateRule, divisibility_check, gap_search, interior_binary_grid

    pb.require(p, "rule")
    rule = UpdateRule.from_json(p["rule"])
    res = args.grid_resolution if args.grid_resolution is not None else int(p.get("resolution", 12))
    grid = interior_binary_grid(res, float(p.get("eps", 1e-3)))
    x_b = np.asarray(p.get("x_b", [0.5, 0.5]), dtype=float)
    x_d = np.asarray(p.get("x_d", [0.6, 0.4]), dtype=float)
    div = divisibility_check(rule, grid, tol=args.tol)
    gap, idx, params = gap_search(rule, grid, x_b, x_d)
    report = {"rule": rule.to_json(), "divisible": div.divisible, "max_residual": div.max_residual,
              "witness_triple": div.witness, "max_gap": gap, "gap_payoff_index": idx,
              "gap_payoff_params": params, "identity_residual": rule.identity_residual(grid)}
    return report, None


def run_stackelberg(p, args):
    from .stackelberg import StackelbergProblem, option_to_own_problem, solve_stackelberg

    if p.get("instance") == "option_to_own":
        prob = option_to_own_problem(p)
    else:
        pb.require(p, "grid", "follower_cone", "follower_objective")
        prob = StackelbergProblem.from_json(p)
    rep = solve_stackelberg(prob, exact=args.exact)
    return rep.to_json(), _surface(prob.grid, mu_star=rep.mu_star.weights, nu_star=rep.nu_star.weights,
                                   w_b_star=rep.w_b_star)


HANDLERS = {
    "envelope": run_envelope,
    "solve": run_solve,
    "couple": run_couple,
    "expose": run_expose,
    "blackwell": run_blackwell,
    "design": run_design,
    "updating": run_updating,
    "stackelberg": run_stackelberg,
}


# ---------------------------------------------------------------- plumbing


def _fail(code, exc):
    print(json.dumps({"error": type(exc).__name__, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def _write_csv(path, rows):
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        w.writeheader()
        w.writerows(rows)


def load_problem(path) -> dict:
    try:
        doc = json.loads(pathlib.Path(path).read_text())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not JSON: {exc}") from exc
    return pb.parse_envelope(doc)


def run(command: str, path, args) -> int:
    try:
        doc = load_problem(path)
        if doc["problem_kind"] != command:
            raise ValidationError(f"file holds a {doc['problem_kind']!r} problem, not {command!r}")
        report, rows = HANDLERS[command](doc["payload"], args)
    except (InvariantViolation, NumericalFailure, AssertionError, FloatingPointError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except (StochOrderError, KeyError, TypeError, ValueError) as exc:
        return _fail(EXIT_INVALID, exc)
    out = json.dumps({"problem_kind": command, "report": _jsonable(report)}, indent=2, sort_keys=True)
    if args.out:
        pathlib.Path(args.out).write_text(out + "\n")
    else:
        print(out)
    if args.csv and rows:
        _write_csv(args.csv, rows)
    return EXIT_OK


def verify(suite: str, fixtures, args) -> int:
    from .suites import SUITES, load_fixtures, run_suite

    names = list(SUITES) if suite == "all" else [suite]
    try:
        fx = load_fixtures(fixtures)
    except ValidationError as exc:
        return _fail(EXIT_INVALID, exc)
    ok = True
    for name in names:
        for line in run_suite(name, fx, seed=args.seed):
            print(line.render())
            ok = ok and line.passed
    print("verify:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="stochorder", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="write the plottable surface (one row per grid point) here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--exact", action="store_true", help="rational arithmetic")
    common.add_argument("--tol", type=float, default=1e-10)
    common.add_argument("--grid-resolution", type=int, default=None,
                        help="override the resolution of generated grids")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        sp = sub.add_parser(name, parents=[common])
        sp.add_argument("problem", help="problem JSON file")
    vp = sub.add_parser("verify", parents=[common])
    vp.add_argument("suite", choices=["theorem1", "blackwell", "exposed", "updating", "stackelberg", "all"])
    vp.add_argument("--fixtures", default=str(FIXTURE_DIR))
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "verify":
        return verify(args.suite, args.fixtures, args)
    return run(args.command, args.problem, args)


if __name__ == "__main__":
    sys.exit(main())
