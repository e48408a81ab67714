"""Command line front end: ``seqtest {solve,sweep,simulate,validate}``.

Exit codes: 0 success, 1 usage or parameter error, 2 degenerate regime
(``solve`` only), 3 failed validation.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import os
import secrets
import sys

import numpy as np

from . import __version__
from .analysis import ProblemParams
from .envelope import boundaries_from_envelope, convex_envelope
from .errors import DegenerateRegime, MultipleContinuationRegions
from .montecarlo import SimConfig, combined_se, default_t_max, estimate_risk
from .penalty import parse_penalty, validate_assumptions
from .sensitivity import sweep
from .solver import ValueFunction, solve_penalty, tangent_residuals, value_at

EXIT_OK, EXIT_USAGE, EXIT_DEGENERATE, EXIT_INVALID = 0, 1, 2, 3

SWEEP_HEADER = ["K", "A", "B", "pi_lo", "pi_hi", "dA_dK", "dB_dK", "degenerate"]
SOLVE_FIELDS = ["K", "A", "B", "pi_lo", "pi_hi", "pi_under", "pi_over",
                "slope", "intercept", "degenerate", "method"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.12g}"
    return str(x)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return None if math.isnan(x) else float(f"{x:.12g}")
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def _timestamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc))
    return when.replace(microsecond=0).isoformat()


def manifest(command, penalty, params, seed=None) -> dict:
    return {
        "command": command,
        "penalty": penalty,
        "params": {"alpha": params.alpha, "sigma": params.sigma,
                   "cost": params.cost, "K": params.K},
        "tool_version": __version__,
        "seed": seed,
        "timestamp": _timestamp(),
    }


def _params(args) -> ProblemParams:
    explicit = [args.alpha, args.sigma, args.cost]
    if args.K is not None:
        if any(v is not None for v in explicit):
            raise UsageError("give either --K or --alpha/--sigma/--cost, not both")
        return ProblemParams.from_K(args.K)
    if args.alpha is None:
        raise UsageError("--K or --alpha is required")
    return ProblemParams(args.alpha, args.sigma if args.sigma is not None else 1.0,
                         args.cost if args.cost is not None else 1.0)


def _add_params(sp):
    sp.add_argument("--K", type=float, help="information ratio alpha^2/(c sigma^2)")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--sigma", type=float)
    sp.add_argument("--cost", type=float)


def cmd_solve(args, out) -> int:
    pen = parse_penalty(args.penalty)
    params = _params(args)
    sol = solve_penalty(pen, params, args.tol, args.n_grid)
    d = sol.as_dict()
    row = {k: d[k] for k in SOLVE_FIELDS}
    if args.json:
        json.dump(_jsonable({"manifest": manifest("solve", args.penalty, params), **row,
                             "fallback": sol.fallback}), out, indent=2)
        out.write("\n")
    elif args.csv:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(SOLVE_FIELDS)
        w.writerow([fmt(row[k]) for k in SOLVE_FIELDS])
    else:
        for k in SOLVE_FIELDS:
            out.write(f"{k:>10s}  {fmt(row[k])}\n")
    return EXIT_DEGENERATE if sol.degenerate else EXIT_OK


def _k_grid(args):
    if args.points < 1:
        raise UsageError("--points must be at least 1")
    if args.points == 1:
        return [args.K_min]
    if args.K_max is None or not args.K_min < args.K_max:
        raise UsageError("need --K-min < --K-max")
    if args.log:
        return np.geomspace(args.K_min, args.K_max, args.points).tolist()
    return np.linspace(args.K_min, args.K_max, args.points).tolist()


def write_sweep_csv(rows, out):
    w = csv.writer(out, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for r in rows:
        w.writerow([fmt(r.K), fmt(r.a_star), fmt(r.b_star), fmt(r.pi_star_lo),
                    fmt(r.pi_star_hi), fmt(r.dA_dK), fmt(r.dB_dK),
                    "" if r.failed else fmt(r.degenerate)])


def cmd_sweep(args, out) -> int:
    pen = parse_penalty(args.penalty)
    grid = _k_grid(args)
    if grid[0] <= 0:
        raise UsageError("K must be positive")
    rows = sweep(pen, grid, args.tol, args.n_grid)
    if args.out is None:
        write_sweep_csv(rows, out)
        return EXIT_OK
    try:
        with open(args.out, "w", newline="") as fh:
            write_sweep_csv(rows, fh)
        man = manifest("sweep", args.penalty, ProblemParams.from_K(grid[0]))
        man["K_grid"] = {"min": args.K_min, "max": args.K_max, "points": args.points, "log": args.log}
        with open(args.out + ".manifest.json", "w") as fh:
            json.dump(_jsonable(man), fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        print(f"seqtest sweep: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


def discretization_allowance(est, pen, A, B) -> float:
    """First-order bound on the terminal-penalty error from detecting exits at grid times."""
    slope = max(abs(float(pen.g1(A))), abs(float(pen.g1(B))))
    return est.mean_overshoot * slope


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("SEQTEST_SEED")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"SEQTEST_SEED must be an integer, got {env!r}") from None
    return secrets.randbits(32)


def cmd_simulate(args, out) -> int:
    pen = parse_penalty(args.penalty)
    params = _params(args)
    seed = _seed(args)
    t_max = args.t_max if args.t_max is not None else default_t_max(params)
    cfg = SimConfig(args.prior, args.paths, args.dt, t_max, seed)
    sol = solve_penalty(pen, params, args.tol, args.n_grid)
    report = {"manifest": manifest("simulate", args.penalty, params, seed),
              "prior": args.prior, "degenerate": sol.degenerate,
              "config": {"paths": cfg.n_paths, "dt": cfg.dt, "t_max": cfg.t_max}}
    if sol.degenerate:
        report["value_at_prior"] = float(pen.g(args.prior))
        report["note"] = "degenerate regime: stopping at once is optimal, risk = g(prior); nothing simulated"
    else:
        A, B = sol.a_star, sol.b_star
        est = estimate_risk(params, pen, A, B, cfg)
        report["value_at_prior"] = float(value_at(ValueFunction(sol, pen, params), args.prior))
        report["boundaries"] = {"A": A, "B": B, "method": sol.method}
        report["optimal"] = est.as_dict()
        report["dt_allowance"] = discretization_allowance(est, pen, A, B)
        if args.perturb is not None:
            d = args.perturb
            pert = []
            for label, a, b in [("A-d", A - d, B), ("A+d", A + d, B),
                                ("B-d", A, B - d), ("B+d", A, B + d)]:
                a, b = min(max(a, 1e-9), 1 - 1e-9), min(max(b, 1e-9), 1 - 1e-9)
                if a > b:
                    a = b
                e = estimate_risk(params, pen, a, b, cfg)
                pert.append({"label": label, "A": a, "B": b, "estimate": e.as_dict(),
                             "combined_se": combined_se(est, e)})
            report["perturbations"] = pert
    json.dump(_jsonable(report), out, indent=2)
    out.write("\n")
    return EXIT_OK


def cmd_validate(args, out) -> int:
    pen = parse_penalty(args.penalty)
    params = _params(args)
    checks = []  # (name, passed, detail)
    if pen.smooth:
        rep = validate_assumptions(pen, args.grid)
        checks.append(("assumptions", rep.passed, "" if rep.passed else f"{rep.first_violation}"))
    else:
        checks.append(("assumptions", True, "skipped: kinked penalty"))
    try:
        sol = solve_penalty(pen, params, args.tol, args.n_grid)
        checks.append(("solve", True, f"{sol.kind.value} via {sol.method}"))
    except Exception as exc:
        checks.append(("solve", False, str(exc)))
        sol = None
    if sol is not None and not sol.degenerate and pen.smooth:
        tr, sr = tangent_residuals(pen, params, sol)
        checks.append(("residuals", max(tr, sr) <= 1e-9, f"tangent={tr:.3g} secant={sr:.3g}"))
    env = convex_envelope(pen, params, args.n_grid)
    try:
        contacts = boundaries_from_envelope(env)
        checks.append(("envelope", True, f"A={fmt(contacts[0])} B={fmt(contacts[1])}"))
    except DegenerateRegime:
        contacts = None
        checks.append(("envelope", True, "no affine segment (degenerate)"))
    except MultipleContinuationRegions as exc:
        contacts = False
        checks.append(("envelope", False, str(exc)))
    if sol is not None and contacts is not False:
        bound = 5.0 / args.n_grid
        if contacts is None or sol.degenerate:
            ok = contacts is None and sol.degenerate
            checks.append(("agreement", ok, "both degenerate" if ok else "regime mismatch"))
        else:
            gap = max(abs(sol.a_star - contacts[0]), abs(sol.b_star - contacts[1]))
            checks.append(("agreement", gap <= bound, f"max gap {gap:.3g} (bound {bound:.3g})"))
    for name, ok, detail in checks:
        out.write(f"{name:<12s} {'PASS' if ok else 'FAIL'}  {detail}\n")
    failed = [name for name, ok, _ in checks if not ok]
    if failed:
        out.write(f"first failing check: {failed[0]}\n")
        return EXIT_INVALID
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="seqtest", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", help="optimal stopping boundaries for one K")
    sp.add_argument("penalty")
    _add_params(sp)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--n-grid", type=int, default=100_000, help="envelope grid for kinked penalties")
    fmt_group = sp.add_mutually_exclusive_group()
    fmt_group.add_argument("--json", action="store_true")
    fmt_group.add_argument("--csv", action="store_true")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("sweep", help="boundaries over a grid of K (CSV)")
    sp.add_argument("penalty")
    sp.add_argument("--K-min", type=float, required=True)
    sp.add_argument("--K-max", type=float)
    sp.add_argument("--points", type=int, default=50)
    sp.add_argument("--log", action="store_true", help="geometric spacing")
    sp.add_argument("--out", help="CSV path; a .manifest.json is written alongside")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--n-grid", type=int, default=100_000)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("simulate", help="Monte Carlo risk of the optimal rule (JSON)")
    sp.add_argument("penalty")
    _add_params(sp)
    sp.add_argument("--prior", type=float, required=True)
    sp.add_argument("--paths", type=int, default=100_000)
    sp.add_argument("--dt", type=float, default=1e-4)
    sp.add_argument("--t-max", type=float)
    sp.add_argument("--seed", type=int, help="defaults to $SEQTEST_SEED, else random")
    sp.add_argument("--perturb", type=float, metavar="DELTA")
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--n-grid", type=int, default=100_000)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("validate", help="assumption checks and solver/envelope cross-validation")
    sp.add_argument("penalty")
    _add_params(sp)
    sp.add_argument("--grid", type=int, default=1000)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.add_argument("--n-grid", type=int, default=100_000)
    sp.set_defaults(func=cmd_validate)
    return parser


def main(argv=None, out=None) -> int:
    out = out if out is not None else sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (UsageError, ValueError) as exc:
        print(f"seqtest {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
