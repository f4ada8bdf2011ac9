"""Command-line front end.

Subcommands: analyze, perron, dichotomy, triangular, dualize, gallery,
random.  Exit code 0 means the command ran (verdicts live in the report);
nonzero signals an operational error such as an unreadable or malformed
spec.  Envelope CSVs use the header m,n,norm,bound.
"""

from __future__ import annotations

import argparse
import json
import sys as _sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import DichoseqError
from .corpus import seeded_random_system
from .reports import analyze, sanitize
from .systems import (
    CoefficientSequence,
    LinearSystem,
    TimeDomain,
    system_from_json,
    system_to_json,
)
from .dichotomy import DEFAULT_GAP_TOL, DEFAULT_HORIZON, state_window

__all__ = ["main", "build_parser"]


def _common_flags(p, system=True):
    if system:
        p.add_argument("--system", required=True,
                       help="path to a JSON system spec")
    p.add_argument("--domain", choices=["Z", "Z+", "Z-"], default=None,
                   help="override the spec's time domain")
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--gap-tol", type=float, default=DEFAULT_GAP_TOL,
                   dest="gap_tol")
    p.add_argument("--exact", action="store_true",
                   help="require the exact rational path where available")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit", default=None,
                   help="output path (directory for analyze, file otherwise)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="dichoseq",
        description="exponential dichotomies for nonautonomous linear "
                    "difference systems",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    for name, hlp in (
        ("analyze", "run a configurable test pipeline"),
        ("perron", "admissibility verdict"),
        ("dichotomy", "fit and verify a dichotomy projection family"),
        ("triangular", "block-triangular vs diagonal comparison"),
        ("dualize", "emit the adjoint time-reversed system"),
    ):
        p = sub.add_parser(name, help=hlp)
        _common_flags(p)
        if name == "analyze":
            p.add_argument("--tests", default="perron,dichotomy",
                           help="comma-separated: perron, dichotomy, "
                                "triangular, duality")

    pg = sub.add_parser("gallery", help="exact shift-operator instance")
    pg.add_argument("instance", choices=["shift"])
    pg.add_argument("--lambda", dest="lam", default="3/2",
                    help="rational expansion factor > 1, e.g. 3/2")
    pg.add_argument("--depth", type=int, default=64)
    _common_flags(pg, system=False)

    pr = sub.add_parser("random", help="deterministic corpus system")
    pr.add_argument("--dim", type=int, required=True)
    pr.add_argument("--kind", default="hyperbolic_conjugated",
                    choices=["hyperbolic_conjugated", "switching",
                             "near_critical"])
    _common_flags(pr, system=False)
    return ap


def _emit_or_print(payload: dict, emit):
    text = json.dumps(sanitize(payload), indent=2, sort_keys=True)
    if emit:
        Path(emit).write_text(text + "\n")
    else:
        print(text)


def _cmd_analyze(args, tests=None):
    config = {
        "tests": tests or [t.strip() for t in args.tests.split(",") if
                           t.strip()],
        "domain": args.domain,
        "horizon": args.horizon,
        "gap_tol": args.gap_tol,
        "seed": args.seed,
    }
    if tests is None:
        config["emit"] = args.emit
        report = analyze(args.system, config)
        if not args.emit:
            print(json.dumps(report.to_json(), indent=2, sort_keys=True))
        return 0
    report = analyze(args.system, config)
    _emit_or_print(report.to_json(), args.emit)
    return 0


def _cmd_dualize(args):
    text = Path(args.system).read_text()
    spec = json.loads(text)
    if args.domain:
        spec = dict(spec, domain=args.domain)
    sys = system_from_json(spec)
    from .systems import BlockTriangularSystem
    if isinstance(sys, BlockTriangularSystem):
        sys = sys.assembled
    seq = sys.coefficients
    if not hasattr(seq, "table"):
        raise DichoseqError("derived coefficient rules are not serializable")
    dual_table = {-n - 1: op.adjoint() for n, op in seq.table.items()}
    dual = LinearSystem(sys.domain.reflected(),
                        CoefficientSequence(dual_table, seq.extension),
                        sys.dim)
    _emit_or_print(system_to_json(dual), args.emit)
    return 0


def _cmd_gallery(args):
    from .gallery import (bounded_complete_orbit_obstruction,
                          exact_perron, shift_counterexample,
                          verify_unitary_growth)
    from .triangular import tconv1_test
    inst = shift_counterexample(Fraction(args.lam))
    growth = verify_unitary_growth(inst, n_max=min(args.horizon, 40))
    obstruction = bounded_complete_orbit_obstruction(inst, depth=args.depth)
    report = {
        "lambda": str(inst.lam),
        "growth": growth,
        "obstruction": {k: v for k, v in obstruction.items()
                        if k not in ("orbit", "uniqueness_failure_orbit")},
        "admissibility": {
            "coupled": exact_perron(inst.system.assembled),
            "block1": exact_perron(inst.system.blocks11),
            "block2": exact_perron(inst.system.blocks22),
        },
        "tconv1": {k: v for k, v in
                   tconv1_test(inst.system, horizon=args.horizon).items()
                   if k != "obstruction_orbit"},
    }
    _emit_or_print(report, args.emit)
    return 0


def _cmd_random(args):
    domain = TimeDomain(args.domain or "Z")
    sys = seeded_random_system(args.seed, args.dim, args.kind, domain)
    n0, n1 = state_window(domain, args.horizon)
    lo = n0 - args.horizon if domain.kind != "Z+" else 0
    hi = n1 + args.horizon if domain.kind != "Z-" else n1
    from .operators import Dense
    table = {n: Dense(np.asarray(sys.matrix(n)))
             for n in range(lo, hi) if domain.in_evolution_set(n)}
    dense = LinearSystem.from_table(domain, table, extension="constant")
    _emit_or_print(system_to_json(dense), args.emit)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args)
        if args.command == "perron":
            return _cmd_analyze(args, tests=["perron"])
        if args.command == "dichotomy":
            return _cmd_analyze(args, tests=["dichotomy"])
        if args.command == "triangular":
            return _cmd_analyze(args, tests=["triangular"])
        if args.command == "dualize":
            return _cmd_dualize(args)
        if args.command == "gallery":
            return _cmd_gallery(args)
        if args.command == "random":
            return _cmd_random(args)
        raise DichoseqError(f"unknown command {args.command!r}")
    except (DichoseqError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"dichoseq: error: {exc}", file=_sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
