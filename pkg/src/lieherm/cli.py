"""Command-line entry point.

Usage::

    lieherm validate  (PATH | --builtin NAME) [--tol T] [--output PATH]
    lieherm analyze   (PATH | --builtin NAME) [--tol T] [--output PATH]
    lieherm certify   (PATH | --builtin NAME) [--assume-salamon] [--tol T] [--output PATH]
    lieherm search    (PATH | --builtin NAME) [--seed S] [--restarts R] [--max-iters M]
    lieherm catalog

Exit codes:
    0: ran, verdict positive (validation passed, constant H, flat certificate, search converged)
    1: ran, verdict negative
    2: input or structural error (error object on stderr)
    3: numerical-domain error, or an inconclusive certificate
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .catalog_io import (
    ReportDocument,
    builtin,
    builtin_names,
    canonical_json,
    emit_report,
    load_document,
    to_algebra,
    to_cd,
)
from .chern_geometry import chern_curvature, classify, constant_h_fit, symmetrize, torsion
from .errors import NumericalDomainError, StructuralError
from .lie_structure import (
    DEFAULT_TOL,
    build_unitary_frame,
    extract_structure_constants,
    nilpotency_class,
    realify,
    validate_cd,
    validate_real_algebra,
)
from .metric_search import SearchConfig, search
from .theorem_checker import (
    FLAT_COMPLEX_GROUP,
    INCONCLUSIVE,
    certify_flatness,
    construct_salamon_frame,
    salamon_form,
    verify_salamon_frame,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class Outcome:
    report: Optional[object]      # ReportDocument, or a plain dict for `catalog`
    code: int
    error: Optional[str] = None


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


def _load(args):
    if (args.path is None) == (args.builtin is None):
        raise StructuralError("give exactly one input: a document path or --builtin NAME")
    if args.builtin is not None:
        return builtin(args.builtin)
    try:
        return load_document(args.path)
    except OSError as exc:
        raise StructuralError(f"cannot read {args.path}: {exc.strerror}") from None


def _validate(doc, tol):
    if doc.mode == "real":
        alg = to_algebra(doc)
        return alg, validate_real_algebra(alg, tol)
    return None, validate_cd(to_cd(doc), tol)


def _require_valid(validation):
    if not validation.overall:
        raise StructuralError(f"validation failed: {', '.join(validation.failed())}")


def _real_form(doc, alg):
    return alg if alg is not None else realify(to_cd(doc), doc.name)


def _analysis(doc, alg, tol, cd=None):
    if cd is None:
        cd = to_cd(doc) if alg is None else extract_structure_constants(alg, build_unitary_frame(alg, tol))
    R = chern_curvature(cd)
    extra = {
        "nilpotency_class": nilpotency_class(_real_form(doc, alg), tol),
        "magnitudes": {
            "max_abs_C": _maxabs(cd.C), "max_abs_D": _maxabs(cd.D),
            "max_abs_T": _maxabs(torsion(cd)), "max_abs_R": _maxabs(R),
        },
    }
    return cd, classify(cd, tol), constant_h_fit(symmetrize(R), tol), extra


def run(args) -> Outcome:
    tol = args.tol
    if args.command == "catalog":
        return Outcome({"builtins": builtin_names()}, EXIT_OK)

    doc = _load(args)
    alg, validation = _validate(doc, tol)
    if args.command == "validate":
        report = ReportDocument(doc.name, validation=validation)
        if validation.overall:
            return Outcome(report, EXIT_OK)
        return Outcome(report, EXIT_INPUT, f"validation failed: {', '.join(validation.failed())}")

    _require_valid(validation)

    if args.command == "analyze":
        _, flags, fit, extra = _analysis(doc, alg, tol)
        report = ReportDocument(doc.name, validation=validation, flags=flags, constant_h=fit, extra=extra)
        return Outcome(report, EXIT_OK if fit.is_constant else EXIT_NEGATIVE)

    if args.command == "certify":
        if alg is not None:
            frame = construct_salamon_frame(alg, tol)
            cd = extract_structure_constants(alg, frame)
        elif args.assume_salamon:
            cd = to_cd(doc)
        else:
            if nilpotency_class(realify(to_cd(doc), doc.name), tol) is None:
                raise StructuralError("certify needs a nilpotent algebra (or --assume-salamon)")
            cd = salamon_form(to_cd(doc), tol)
        salamon = verify_salamon_frame(cd, tol)
        if not salamon.satisfied:
            raise StructuralError(
                f"structure constants are not in Salamon form ({len(salamon.violations)} violations)"
            )
        _, flags, fit, extra = _analysis(doc, alg, tol, cd)
        cert = certify_flatness(cd, tol)
        report = ReportDocument(doc.name, validation=validation, flags=flags, constant_h=fit,
                                salamon=salamon, certificate=cert, extra=extra)
        if cert.conclusion == FLAT_COMPLEX_GROUP:
            return Outcome(report, EXIT_OK)
        if cert.conclusion == INCONCLUSIVE:
            return Outcome(report, EXIT_NUMERIC, "certificate inconclusive: a proof step failed "
                                                 "although its premises hold")
        return Outcome(report, EXIT_NEGATIVE)

    if args.command == "search":
        _, flags, fit, extra = _analysis(doc, alg, tol)
        config = SearchConfig(restarts=args.restarts, max_iters=args.max_iters, seed=args.seed, tol=tol)
        result = search(_real_form(doc, alg), config)
        report = ReportDocument(doc.name, validation=validation, flags=flags, constant_h=fit,
                                search=result, search_config=config, extra=extra)
        return Outcome(report, EXIT_OK if result.converged else EXIT_NEGATIVE)

    raise StructuralError(f"unknown command {args.command!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lieherm",
        description="Chern geometry of left-invariant Hermitian structures on Lie algebras",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("validate", "check the structural identities of a document"),
        ("analyze", "validation, structure constants, geometry flags and the constant-H fit"),
        ("certify", "analyze plus Salamon frame and flatness certificate"),
        ("search", "analyze plus a numerical search over compatible metrics"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("path", nargs="?", help="algebra document (.lha.json)")
        p.add_argument("--builtin", metavar="NAME", help="use a built-in catalog entry")
        p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="tolerance (default: %(default)g)")
        p.add_argument("--output", metavar="PATH", help="write the report here instead of stdout")
        if name == "certify":
            p.add_argument("--assume-salamon", action="store_true",
                           help="treat complex-mode input as already in Salamon form")
        if name == "search":
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--restarts", type=int, default=8)
            p.add_argument("--max-iters", type=int, default=500)
    p = sub.add_parser("catalog", help="list built-in catalog entries")
    p.add_argument("--output", metavar="PATH")
    p.set_defaults(tol=DEFAULT_TOL)
    return parser


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message}}, sort_keys=True) + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        outcome = run(args)
    except StructuralError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_INPUT
    except (NumericalDomainError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_NUMERIC
    except ValueError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_INPUT

    if outcome.report is not None:
        payload = outcome.report
        data = emit_report(payload) if isinstance(payload, ReportDocument) else canonical_json(payload)
        if args.output:
            with open(args.output, "wb") as fh:
                fh.write(data)
        else:
            sys.stdout.buffer.write(data)
            sys.stdout.flush()
    if outcome.error:
        _error("VerdictError" if outcome.code == EXIT_NUMERIC else "ValidationError", outcome.error)
    return outcome.code


if __name__ == "__main__":
    sys.exit(main())
