"""Command-line front end.

Subcommands: solve, stability, certify, lstar, verify-simons, scan.
Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 invariant or
consistency violation.  CONESTAB_SEED overrides --seed where applicable.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .boundary import case_identity_check, lstar_optimize
from .cones import solve_cross_section
from .errors import (
    ConestabError,
    IdentityViolated,
    MarginTooSmall,
    NoConvergence,
    NoZeroFound,
    StableCone,
    UsageError,
)
from .harmonic import random_harmonic_poly
from .report import scan, to_csv, to_json_str
from .simons import verify_general_inequality
from .stability import instability_certificate, stability_verdict
from .weights import WeightSpec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_INVARIANT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="conestab", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a cone cross-section profile")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--out", default=None, help="output .cone.json path")

    s = sub.add_parser("stability", help="full stability report for one cone")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--weight", default="frobenius")
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--out", default=None)

    s = sub.add_parser("certify", help="instability certificate for one cone")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--h", type=int, required=True)
    s.add_argument("--quad", type=int, default=64)
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--out", default=None)

    s = sub.add_parser("lstar", help="supremum of the slice functional")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--radius-max", type=float, default=2.0**20)

    s = sub.add_parser("verify-simons", help="randomized inequality suite")
    s.add_argument("--n", type=int, default=4)
    s.add_argument("--degree", type=int, default=4)
    s.add_argument("--polys", type=int, default=32)
    s.add_argument("--points", type=int, default=64)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--weight", default="frobenius")

    s = sub.add_parser("scan", help="stability table over all (k,h) with k+h=n")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--out", default=None)
    s.add_argument("--weight", default="frobenius")
    s.add_argument("--grid", type=int, default=4096)
    s.add_argument("--tol", type=float, default=1e-7)
    s.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    s.add_argument("--seed", type=int, default=0)

    s = sub.add_parser("case-identities", help="exact boundary-case algebra record")
    return p


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_solve(args) -> int:
    cone = solve_cross_section(args.k, args.h, tol=args.tol, grid=args.grid)
    from .stability import mean_curvature

    print(f"theta_star = {cone.theta_star!r}")
    print(f"H = {mean_curvature(cone)!r}")
    if args.out:
        cone.write(args.out)
        print(f"wrote {args.out}")
    return EXIT_OK


def _cmd_stability(args) -> int:
    spec = WeightSpec.parse(args.weight)
    # the max weight has no boundary functional; windows exist for signed a
    extra = (spec.a,) if spec.kind == "signed" else ()
    cone = solve_cross_section(args.k, args.h)
    report = stability_verdict(
        cone, tol=args.tol, grid_n=args.grid, signed_weights=(1, 4) + extra
    )
    _emit(json.dumps(report.to_json(), sort_keys=True, indent=2) + "\n", args.out)
    if not report.consistent:
        return EXIT_INVARIANT
    return EXIT_OK


def _cmd_certify(args) -> int:
    cone = solve_cross_section(args.k, args.h)
    cert = instability_certificate(cone, quad_n=args.quad, grid_n=args.grid)
    _emit(json.dumps(cert.to_json(), sort_keys=True, indent=2) + "\n", args.out)
    return EXIT_OK


def _cmd_lstar(args) -> int:
    res = lstar_optimize(args.n, radius_max=args.radius_max)
    print(json.dumps(res.to_json()))
    return EXIT_OK


def _cmd_verify_simons(args) -> int:
    seed = int(os.environ.get("CONESTAB_SEED", args.seed))
    spec = WeightSpec.parse(args.weight)
    worst = math.inf
    guarded = tested = disagreements = 0
    tol_fd = 0.0
    worst_report = None
    for i in range(args.polys):
        poly = random_harmonic_poly(args.n, args.degree, seed + i)
        rep = verify_general_inequality(poly, spec, args.points, seed + 10_000 + i)
        tested += rep.samples_tested
        guarded += rep.samples_guarded
        disagreements += rep.fd_disagreements
        tol_fd = max(tol_fd, rep.tol_fd)
        if rep.worst_margin < worst:
            worst = rep.worst_margin
            worst_report = rep
    passed = worst >= -tol_fd and disagreements == 0
    print(
        f"{'PASS' if passed else 'FAIL'} weight={spec.label} polys={args.polys} "
        f"points tested={tested} guarded={guarded} worst_margin={worst:.3e} "
        f"fd_disagreements={disagreements} seed={seed}"
    )
    if worst_report is not None:
        print(json.dumps(worst_report.to_json(), sort_keys=True))
    return EXIT_OK if passed else EXIT_INVARIANT


def _cmd_scan(args) -> int:
    seed = int(os.environ.get("CONESTAB_SEED", args.seed))
    WeightSpec.parse(args.weight)
    table = scan(
        args.n, grid_n=args.grid, tol=args.tol, jobs=max(1, args.jobs),
        weight=args.weight, seed=seed,
    )
    if any(not r.consistent for r in table.rows):
        text = to_json_str(table)
        _emit(text, args.out)
        return EXIT_INVARIANT
    if args.format == "csv":
        _emit(to_csv(table, weight=args.weight), args.out)
    else:
        _emit(to_json_str(table), args.out)
    return EXIT_OK


def _cmd_case_identities(args) -> int:
    rec = case_identity_check()
    print(json.dumps(rec.to_json(), sort_keys=True, indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {
            "solve": _cmd_solve,
            "stability": _cmd_stability,
            "certify": _cmd_certify,
            "lstar": _cmd_lstar,
            "verify-simons": _cmd_verify_simons,
            "scan": _cmd_scan,
            "case-identities": _cmd_case_identities,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StableCone, MarginTooSmall, IdentityViolated) as exc:
        print(f"invariant: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NoZeroFound, NoConvergence) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ConestabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    raise SystemExit(main())
