"""Command-line front end: ``ktc el|check|search|bf``.

Exit status is 0 when no check fails (inconclusive checks only add a warning
on stderr), 1 when a check fails and 2 for usage or model errors.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .bf import MAX_DIM, verify_bf
from .dsl import ModelError, build_complex, load_model
from .koszul_tate import KTError, check_nilpotency, complex_text, noether_search
from .report import FAIL, INCONCLUSIVE, PASS, CheckEntry, Report, digest

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def nonnegative(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {value}")
    return value


def dimension(text: str) -> int:
    value = nonnegative(text)
    if not 2 <= value <= MAX_DIM:
        raise argparse.ArgumentTypeError(f"--dim must lie in 2..{MAX_DIM}, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ktc", description="Koszul-Tate complexes of graded Lagrangian systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--json", metavar="PATH",
                        help="also write the report as JSON to PATH ('-' for stdout instead of text)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("el", help="print the Euler-Lagrange components of a model")
    p.add_argument("model", help="model file")

    p = sub.add_parser("check", help="check that the declared stages square to zero")
    p.add_argument("model", help="model file")

    p = sub.add_parser("search", help="search for Noether identities within bounds")
    p.add_argument("model", help="model file")
    p.add_argument("--jet-order", type=nonnegative, default=1, help="maximal jet order (default 1)")
    p.add_argument("--degree", type=nonnegative, default=0,
                   help="maximal coefficient degree (default 0)")

    p = sub.add_parser("bf", help="build and verify the BF tower in dimension N")
    p.add_argument("--dim", type=dimension, required=True, help=f"base dimension, 2..{MAX_DIM}")
    p.add_argument("--jet-order", type=nonnegative, default=1, help="maximal jet order (default 1)")
    p.add_argument("--degree", type=nonnegative, default=0,
                   help="maximal coefficient degree (default 0)")
    p.add_argument("--trials", type=nonnegative, default=4,
                   help="random cycles per regularity probe (default 4)")
    p.add_argument("--seed", type=int, default=0, help="seed for the regularity probes")
    return parser


def _load(path: str):
    model = load_model(path)
    return model, build_complex(model, validate=False)


def run_el(args) -> Report:
    model, cx = _load(args.model)
    report = Report("el", digest(complex_text(cx)))
    for a, e in cx.el.items():
        report.values[f"E[{a.text()}]"] = e.to_text(model.coordinate_names)
    return report


def run_check(args) -> Report:
    model, cx = _load(args.model)
    report = Report("check", digest(complex_text(cx)))
    for entry in check_nilpotency(cx).entries:
        name = f"nilpotency[{entry.generator.text()}]"
        detail = "Noether identity" if entry.stage < 0 else f"stage {entry.stage}"
        if entry.passed:
            report.add(CheckEntry(name, PASS, detail=detail))
        else:
            report.add(CheckEntry(name, FAIL, entry.residual.to_text(model.coordinate_names),
                                  detail=detail))
    return report


def run_search(args) -> Report:
    model, cx = _load(args.model)
    report = Report("search", digest(complex_text(cx)))
    res = noether_search(cx, args.jet_order, args.degree)
    basis = [b.to_text(model.coordinate_names) for b in res.basis]
    report.values.update({
        "jet_order": args.jet_order, "degree": args.degree,
        "basis_dimension": len(basis), "basis": basis,
    })
    detail = (f"basis dimension {len(basis)}; cycles {res.cycle_dim}, trivial {res.trivial_dim}, "
              f"ansatz size {res.ansatz_size}")
    report.add(CheckEntry("noether_search", PASS, witness="; ".join(basis) or None, detail=detail))
    return report


def run_bf(args) -> Report:
    return verify_bf(args.dim, args.jet_order, args.degree, args.trials, args.seed)


COMMANDS = {"el": run_el, "check": run_check, "search": run_search, "bf": run_bf}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        report = COMMANDS[args.command](args)
    except ModelError as err:
        print(err.format(args.model), file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"ktc: error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (KTError, ValueError) as err:
        print(f"ktc: error: {err}", file=sys.stderr)
        return EXIT_USAGE

    if args.json == "-":
        sys.stdout.write(report.to_json())
    else:
        sys.stdout.write(report.to_text())
        if args.json:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(report.to_json())
    warnings = report.count(INCONCLUSIVE)
    if warnings:
        print(f"ktc: warning: {warnings} check(s) inconclusive within bounds", file=sys.stderr)
    return EXIT_FAIL if report.count(FAIL) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
