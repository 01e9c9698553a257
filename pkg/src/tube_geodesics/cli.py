"""Command-line interface: ``tube-geodesics {validate,trace,verify,solve,reinhardt}``.

Exit codes: 0 ok, 1 I/O or malformed document, 2 invalid input,
3 verification failed, 4 verification inconclusive, 5 solver budget exhausted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from ._parallel import thread_count
from .documents import (
    DocumentError,
    boundary_to_csv,
    domain_from_doc,
    dumps,
    loads,
    problem_from_doc,
    read_text,
    report_to_doc,
    sample_trace,
    serialize,
    spec_from_doc,
    trace_to_csv,
    trace_to_doc,
    write_atomic,
)
from .domain import DomainError, ReinhardtFactor, StaircaseDomain, from_reinhardt
from .geodesic import CaseOneIndicator, InadmissibleSpec, geodesic_map
from .solver import SolverError, solve_two_point
from .verify import FAIL, PASS, verify_map

EXIT_OK = 0
EXIT_IO = 1
EXIT_INVALID = 2
EXIT_VERIFY_FAIL = 3
EXIT_INCONCLUSIVE = 4
EXIT_BUDGET = 5

log = logging.getLogger("tube_geodesics")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _load(path: str, kind: str) -> dict:
    try:
        text = read_text(path)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {path}: {exc.strerror or exc}") from exc
    if not text.strip():
        raise CliError(EXIT_IO, f"{path} is empty")
    try:
        return loads(text, kind)
    except DocumentError as exc:
        raise CliError(EXIT_IO, f"{path}: {exc}") from exc


def _domain(path: str):
    doc = _load(path, "domain")
    try:
        return domain_from_doc(doc)
    except DomainError as exc:
        raise CliError(EXIT_INVALID, f"{path}: {exc}") from exc


def _check_staircase(domain) -> None:
    if isinstance(domain, StaircaseDomain):
        bad = domain.validate()
        if bad:
            raise CliError(EXIT_INVALID, "invalid staircase: " + "; ".join(map(str, bad)))


def _map(spec_path: str, domain_path: str):
    domain = _domain(domain_path)
    _check_staircase(domain)
    try:
        spec = spec_from_doc(_load(spec_path, "geodesic_spec"))
    except DocumentError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from exc
    try:
        return geodesic_map(spec, domain), domain
    except InadmissibleSpec as exc:
        raise CliError(EXIT_INVALID, "inadmissible spec: " + "; ".join(exc.problems)) from exc
    except CaseOneIndicator as exc:
        raise CliError(EXIT_INVALID, f"certificate describes a facet (case i) geodesic: {exc}") from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        write_atomic(out, text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {out}: {exc.strerror or exc}") from exc


# --- commands ---------------------------------------------------------------------

def cmd_validate(args) -> int:
    domain = _domain(args.domain)
    if isinstance(domain, StaircaseDomain):
        bad = domain.validate()
        for v in bad:
            print(f"violation {v}")
        if bad:
            return EXIT_INVALID
        print(f"ok: staircase with m = {domain.m} facets")
    else:
        print(f"ok: {domain.kind} domain")
    return EXIT_OK


def cmd_trace(args) -> int:
    if args.samples < 1:
        raise CliError(EXIT_INVALID, "--samples must be a positive integer")
    if not 0.0 <= args.radius < 1.0:
        raise CliError(EXIT_INVALID, "--radius must lie in [0, 1)")
    phi, domain = _map(args.spec, args.domain)
    boundary = domain.boundary_polyline(args.extent) if isinstance(domain, StaircaseDomain) else None
    trace = sample_trace(phi, args.radius, args.samples, boundary)
    if args.out is not None and args.out.endswith(".json"):
        _emit(dumps(trace_to_doc(trace)), args.out)
        return EXIT_OK
    _emit(trace_to_csv(trace), args.out)
    if boundary is not None:
        target = args.boundary_out
        if target is None and args.out is not None:
            target = str(Path(args.out).with_suffix("")) + ".boundary.csv"
        if target is not None:
            _emit(boundary_to_csv(boundary), target)
    return EXIT_OK


def cmd_verify(args) -> int:
    phi, domain = _map(args.spec, args.domain)
    report = verify_map(phi, domain, args.level)
    _emit(dumps(report_to_doc(report)), args.out)
    for c in report.conditions:
        log.info("%s: %s (value %s)", c.name, c.status, c.value)
    if report.status == PASS:
        return EXIT_OK
    return EXIT_VERIFY_FAIL if report.status == FAIL else EXIT_INCONCLUSIVE


def cmd_solve(args) -> int:
    doc = _load(args.problem, "solve_problem")
    try:
        problem = problem_from_doc(doc)
    except (DomainError, TypeError) as exc:
        raise CliError(EXIT_INVALID, str(exc)) from exc
    _check_staircase(problem.domain)
    problems = problem.problems()
    if problems:
        raise CliError(EXIT_INVALID, "; ".join(problems))
    report_path = args.report
    if report_path is None and args.out is not None:
        report_path = str(Path(args.out).with_suffix("")) + ".report.json"
    try:
        sol = solve_two_point(problem)
    except SolverError as exc:
        log.error("%s: %s", exc, exc.diagnostics)
        if report_path is not None:
            _emit(dumps({"kind": "report", "status": FAIL, "conditions": [],
                         "metadata": {"solver": "budget exhausted", **exc.diagnostics}}), report_path)
        return EXIT_BUDGET
    report = sol.report
    report.metadata.update({"sigma": sol.sigma, "residual": sol.residual, "case": sol.case,
                            "best_residual_per_case": sol.attempts})
    _emit(serialize(sol.spec), args.out)
    if report_path is not None:
        _emit(dumps(report_to_doc(report)), report_path)
    log.info("case %s, sigma %.17g, residual %.3g", sol.case, sol.sigma, sol.residual)
    return EXIT_OK


def cmd_reinhardt(args) -> int:
    p, q, a = args.p or [], args.q or [], args.alpha or []
    if not (len(p) == len(q) == len(a)) or not p:
        raise CliError(EXIT_INVALID, "give --p, --q and --alpha the same positive number of times")
    try:
        domain = from_reinhardt([ReinhardtFactor(*t) for t in zip(p, q, a)])
    except DomainError as exc:
        raise CliError(EXIT_INVALID, str(exc)) from exc
    _emit(serialize(domain), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tube-geodesics",
                                 description="Complex geodesics of convex tube domains.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a domain document")
    s.add_argument("domain")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("trace", help="sample phi along a circle |lam| = r as CSV")
    s.add_argument("spec")
    s.add_argument("domain")
    s.add_argument("--samples", type=int, default=360)
    s.add_argument("--radius", type=float, default=0.999)
    s.add_argument("--out", help="CSV file (a .json name writes a trace document)")
    s.add_argument("--boundary-out", help="CSV file for the base-boundary polyline")
    s.add_argument("--extent", type=float, default=1.0, help="length of the cut half-lines")
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("verify", help="run the geodesy checks")
    s.add_argument("spec")
    s.add_argument("domain")
    s.add_argument("--level", choices=["measure", "radial", "inverse", "all"], default="all")
    s.add_argument("--out", help="report document (stdout if omitted)")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("solve", help="two-point geodesic interpolation")
    s.add_argument("problem")
    s.add_argument("--out", help="spec document (stdout if omitted)")
    s.add_argument("--report", help="report document (default: next to --out)")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("reinhardt", help="staircase base of a Reinhardt intersection")
    s.add_argument("--p", type=float, action="append")
    s.add_argument("--q", type=float, action="append")
    s.add_argument("--alpha", type=float, action="append")
    s.add_argument("--out", help="domain document (stdout if omitted)")
    s.set_defaults(func=cmd_reinhardt)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        thread_count()
        return args.func(args)
    except ValueError as exc:
        if "TUBE_GEODESICS_THREADS" not in str(exc):
            raise
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
