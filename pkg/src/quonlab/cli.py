"""Command-line driver: ``quonlab run|check|gram|coeffs|cg``."""

from __future__ import annotations

import argparse
import sys

from . import linalg
from .algebra import format_mode
from .expr import ExpressionSyntaxError, evaluate_identity, parse_expression
from .fock import FockSpace, TruncationError, check_positivity, matrix_to_csv, matrix_to_json
from .linalg import IllPosedError
from .number_ops import solve_series_coefficients
from .report import Report
from .scalars import FLOAT_TOLERANCE, ConfigurationError, DeformationParameter, EndpointError, format_scalar
from .su2 import cg_table
from .suites import RunConfig, run_suite, write_outputs

EXIT_USAGE = 2


def _twice(text: str) -> int:
    """``--j`` takes twice j as an integer; ``p/2`` is accepted too."""
    try:
        if "/" in text:
            num, den = text.split("/")
            if int(den) != 2:
                raise ValueError
            return int(num)
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected twice_j as an integer, got {text!r}") from None


def _q(text: str) -> DeformationParameter:
    try:
        return DeformationParameter.coerce(text)
    except ConfigurationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _cmd_run(args) -> int:
    cfg = RunConfig.load(args.config)
    if args.tolerance is not None:
        cfg.tolerance = args.tolerance
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.json:
        cfg.output_json = args.json
    if args.summary:
        cfg.output_summary = args.summary
    report = run_suite(cfg)
    write_outputs(report, cfg)
    sys.stdout.write(report.to_text())
    return report.exit_code


def _cmd_check(args) -> int:
    space = FockSpace(args.j, args.q, args.nmax)
    try:
        expr = parse_expression(args.expression, space.twice_j)
    except ExpressionSyntaxError as exc:
        print(f"syntax error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = Report({"twice_j": space.twice_j, "q": str(space.q), "n_max": space.n_max})
    report.extend([evaluate_identity(expr, space, args.expression)])
    if args.json:
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_text())
    return report.exit_code


def _cmd_gram(args) -> int:
    space = FockSpace(args.j, args.q, args.n)
    g = space.gram(args.n)
    if args.format == "json":
        sys.stdout.write(matrix_to_json(space, args.n, g))
    elif args.format == "csv":
        sys.stdout.write(matrix_to_csv(space, args.n, g))
    else:
        words = space.sector(args.n).words
        labels = ["(" + ",".join(format_mode(m) for m in w) + ")" for w in words]
        width = max([len(x) for x in labels] + [len(format_scalar(x)) for x in g.reshape(-1)] + [1])
        print(" " * width + " " + " ".join(x.rjust(width) for x in labels))
        for label, row in zip(labels, g):
            print(label.rjust(width) + " " + " ".join(format_scalar(x).rjust(width) for x in row))
        rep = check_positivity(space, args.n)
        print(f"dim {rep.dim}, rank {rep.rank}, min eigenvalue {rep.min_eigenvalue:.6g}, "
              f"positive definite: {rep.positive_definite} ({rep.method})")
    return 0


def _cmd_coeffs(args) -> int:
    coeffs = solve_series_coefficients(args.order, args.q)
    sys.stdout.write(coeffs.to_json())
    return 0


def _cmd_cg(args) -> int:
    sys.stdout.write(cg_table(args.j1, args.j2).to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="quonlab", description="Quon algebra verification toolkit.")
    parser.add_argument("--tolerance", type=float,
                        help=f"relative residual accepted in the float backend (default {FLOAT_TOLERANCE:g})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the verification suites from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--jobs", type=int, help="worker processes (0 = all cores)")
    p.add_argument("--json", help="write the JSON report here")
    p.add_argument("--summary", help="write the text summary here")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("check", help="check one operator identity sector by sector")
    p.add_argument("--j", type=_twice, required=True, help="twice j")
    p.add_argument("--q", type=_q, required=True, help="decimal (float) or p/r (exact)")
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--json", action="store_true", help="print the JSON record")
    p.add_argument("expression")
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("gram", help="print the Gram matrix of one sector")
    p.add_argument("--j", type=_twice, required=True, help="twice j")
    p.add_argument("--q", type=_q, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.set_defaults(func=_cmd_gram)

    p = sub.add_parser("coeffs", help="solve the number-operator series coefficients")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--q", type=_q, required=True)
    p.set_defaults(func=_cmd_coeffs)

    p = sub.add_parser("cg", help="Clebsch-Gordan table as JSON")
    p.add_argument("--j1", type=_twice, required=True, help="twice j1")
    p.add_argument("--j2", type=_twice, required=True, help="twice j2")
    p.set_defaults(func=_cmd_cg)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        linalg.set_float_tolerance(args.tolerance or FLOAT_TOLERANCE)
        return args.func(args)
    except (ConfigurationError, EndpointError, TruncationError, IllPosedError, ValueError, OSError) as exc:
        print(f"quonlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
