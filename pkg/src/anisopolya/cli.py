"""Command line front end.

Four commands: verify (randomized battery suites), rearrange (exact
monotone rearrangement of a function file), energy (inequality reports
for one function), and eigen (quotient minimization from a problem
file).  Every run prints a JSON run report whose only non-reproducible
field is the timestamp.

Exit codes: 0 success, 1 a guaranteed relation failed or the problem is
infeasible, 2 malformed input or bad arguments.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import kernels
from .batteries import CSV_HEADER, SUITES, run_battery
from .errors import (BandBoundaryError, DomainError, InfeasibleError,
                     PreconditionError, VerificationFailure)
from .oracle import OracleConfig, sampled_rearrangement, step_sup_distance
from .polya import min_inequality, polya_inequality, refined_bound
from .pwa import AnisotropicNorm, PiecewiseAffine, p_derivative_norm
from .rayleigh import QuotientProblem, minimize_quotient
from .rearrange import decreasing_rearrangement, increasing_rearrangement

USAGE_ERROR = 2
FAILURE = 1


def _load_json(path: str):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SystemExit(_usage(f"cannot read {path}: {exc.strerror}"))
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SystemExit(_usage(
            f"malformed JSON in {path}: {exc.msg} at line {exc.lineno} "
            f"column {exc.colno}"))


def _usage(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE_ERROR


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return FAILURE


def _emit(report: dict) -> None:
    report["timestamp"] = datetime.now(timezone.utc).isoformat()
    print(json.dumps(report, sort_keys=True, indent=2))


def cmd_verify(args) -> int:
    suites = sorted(SUITES) if args.suite == "all" else [args.suite]
    out_dir = Path(args.out) if args.out else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
    artifacts = []
    violations = 0
    worst = 0.0
    summaries = {}
    for suite in suites:
        rep = run_battery(suite, args.trials, args.seed)
        violations += rep.violations
        worst = min(worst, rep.worst_gap)
        summaries[suite] = rep.to_dict()
        if out_dir is not None:
            rows_path = out_dir / f"{suite}_rows.csv"
            with rows_path.open("w") as fh:
                fh.write(",".join(CSV_HEADER) + "\n")
                for row in rep.rows:
                    fh.write(row.csv() + "\n")
            artifacts.append(str(rows_path))
    report = {
        "command": "verify",
        "seed": args.seed,
        "trials": args.trials,
        "violations": violations,
        "worst_gap": worst,
        "suites": summaries,
        "artifacts": sorted(artifacts),
    }
    if out_dir is not None:
        payload = dict(report)
        (out_dir / "run_report.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n")
        report["artifacts"].append(str(out_dir / "run_report.json"))
        report["artifacts"].sort()
    _emit(report)
    return 0 if violations == 0 else FAILURE


def cmd_rearrange(args) -> int:
    data = _load_json(args.input)
    f = PiecewiseAffine.from_dict(data, allow_jumps=True)
    g = decreasing_rearrangement(f) if args.direction == "down" \
        else increasing_rearrangement(f)
    cfg = OracleConfig(samples=args.samples)
    sampled = sampled_rearrangement(f, cfg, decreasing=args.direction == "down")
    residual = step_sup_distance(sampled, g)
    if args.out:
        Path(args.out).write_text(json.dumps(g.to_dict(), indent=2) + "\n")
    report = {
        "command": "rearrange",
        "direction": args.direction,
        "residual": residual,
        "knots": len(g.breakpoints),
        "artifacts": [args.out] if args.out else [],
    }
    if not args.out:
        report["result"] = g.to_dict()
    _emit(report)
    return 0


def cmd_energy(args) -> int:
    data = _load_json(args.input)
    f = PiecewiseAffine.from_dict(data)
    norm = AnisotropicNorm(args.a, args.b, args.p)
    refined = refined_bound(f, norm)
    plain = polya_inequality(f, norm)
    floor = min_inequality(f, norm)
    g = decreasing_rearrangement(f)
    report = {
        "command": "energy",
        "norm": norm.to_dict(),
        "energy": refined.lhs,
        "rearranged_slope_integral": p_derivative_norm(g, norm.p),
        "refined": refined.to_dict(),
        "plain": plain.to_dict(),
        "floor": floor.to_dict(),
        "artifacts": [],
    }
    _emit(report)
    return 0


def cmd_eigen(args) -> int:
    data = _load_json(args.input)
    if args.grid is not None:
        data["grid_size"] = args.grid
    if args.kappa is not None:
        data["kappa"] = args.kappa
    prob = QuotientProblem.from_dict(data)
    rep = minimize_quotient(prob, seed=args.seed)
    artifacts = []
    if args.csv:
        with Path(args.csv).open("w") as fh:
            fh.write("x,phi\n")
            for x, v in zip(rep.phi.breakpoints, rep.phi.values):
                fh.write(f"{float(x)!r},{float(v)!r}\n")
        artifacts.append(args.csv)
    report = {
        "command": "eigen",
        "seed": args.seed,
        "backend": kernels.BACKEND,
        "minimizer": rep.to_dict(),
        "artifacts": artifacts,
    }
    _emit(report)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aniso",
        description="Exact rearrangements, two-rate slope-cost inequalities, "
                    "and quotient minimization for piecewise-affine functions.")
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run randomized verification suites")
    v.add_argument("--suite", default="all",
                   choices=sorted(SUITES) + ["all"])
    v.add_argument("--trials", type=int, default=1000)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out", help="directory for row CSVs and the run report")
    v.set_defaults(fn=cmd_verify)

    r = sub.add_parser("rearrange", help="monotone rearrangement of a "
                                         "function file")
    r.add_argument("--input", required=True,
                   help="JSON file with breakpoints and values")
    r.add_argument("--direction", default="down", choices=["down", "up"])
    r.add_argument("--samples", type=int, default=100000,
                   help="midpoint samples for the residual check")
    r.add_argument("--out", help="file for the rearranged function JSON")
    r.set_defaults(fn=cmd_rearrange)

    e = sub.add_parser("energy", help="inequality reports for one function")
    e.add_argument("--input", required=True)
    e.add_argument("--a", type=float, required=True, help="rise rate")
    e.add_argument("--b", type=float, required=True, help="fall rate")
    e.add_argument("--p", type=float, required=True, help="exponent, > 1")
    e.set_defaults(fn=cmd_energy)

    g = sub.add_parser("eigen", help="minimize the weighted quotient")
    g.add_argument("--input", required=True,
                   help="JSON file with norm, weight, kappa, grid_size")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--grid", type=int, help="override grid_size")
    g.add_argument("--kappa", type=float, help="override kappa")
    g.add_argument("--csv", help="file for the minimizer node samples")
    g.set_defaults(fn=cmd_eigen)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.fn(args)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else USAGE_ERROR
    except (PreconditionError, DomainError, BandBoundaryError) as exc:
        return _usage(str(exc))
    except (InfeasibleError, VerificationFailure) as exc:
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
