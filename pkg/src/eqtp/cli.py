"""Command-line front end: ``eqtp <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 a verification check failed.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import logging
import sys
from typing import Sequence

import numpy as np

from . import bench, verify
from .expressivity import expressivity_count, expressivity_rank, interactable
from .irreps import IrrepVector, single_copies
from .tpo import KINDS, apply_tpo, check_kind
from .wigner import cg_real, gaunt_real

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_range(text: str) -> list[int]:
    """``"4..16"`` -> [4, ..., 16]; ``"4,8,16"`` and ``"8"`` also accepted."""
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        return [int(t) for t in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid L range {text!r}; use a..b, a,b,c or a") from None


def _non_negative(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        v = -1
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text!r}")
    return v


def _positive(text: str) -> int:
    v = _non_negative(text)
    if v == 0:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _csv_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--seed", type=int, help="random seed (default 0)")
    common.add_argument("--out", help="write CSV here instead of stdout")
    common.add_argument("--precision-digits", type=_positive, help="significant digits of floats (default 17)")

    parser = _Parser(prog="eqtp", description="SO(3)-equivariant tensor products: tables, evaluation, "
                     "expressivity, benchmarks and verification.")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--out", default=None, help="write CSV here instead of stdout")
    parser.add_argument("--precision-digits", type=_positive, default=17,
                        help="significant digits of floats (default 17)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("cg-table", parents=[common], help="print real CG (or Gaunt) coefficients as CSV m1,m2,m3,value")
    p.add_argument("--l1", type=_non_negative, required=True)
    p.add_argument("--l2", type=_non_negative, required=True)
    p.add_argument("--l3", type=_non_negative, required=True)
    p.add_argument("--gaunt", action="store_true", help="Gaunt coefficients instead of CG")

    p = sub.add_parser("tp", help="evaluate a tensor product")
    parser.set_defaults(tp_parser=p)
    tp_sub = p.add_subparsers(dest="tp_command", parser_class=_Parser, metavar="ACTION")
    run = tp_sub.add_parser("run", parents=[common], help="run one TPO on random single-copy inputs, CSV "
                            "vector,entry,l,m,value")
    run.add_argument("--kind", choices=sorted(KINDS), required=True)
    run.add_argument("--impl", default=None, help="naive|sparse (cgtp, mtp), grid|fourier (gtp)")
    run.add_argument("--L", type=_non_negative, required=True, help="input degrees 0..L")
    run.add_argument("--L3", type=_non_negative, default=None, help="output degrees 0..L3 (default 2L)")

    p = sub.add_parser("expressivity", parents=[common], help="expressivity count, rank and interactability table")
    p.add_argument("--kind", choices=sorted(KINDS), required=True)
    p.add_argument("--L", type=_non_negative, required=True)
    p.add_argument("--trials", type=_positive, default=3)

    p = sub.add_parser("bench", parents=[common], help="benchmark sweep, CSV "
                       + ",".join(bench.CSV_HEADER))
    p.add_argument("--kinds", type=_csv_list, default=["cgtp", "gtp", "mtp"])
    p.add_argument("--impls", default="all", help="comma list or 'all'")
    p.add_argument("--mode", choices=bench.MODES, default="mimo")
    p.add_argument("--L", type=parse_range, default=list(range(4, 17)), help="a..b inclusive (default 4..16)")
    p.add_argument("--batch", type=_positive, default=16)
    p.add_argument("--warmup", type=_positive, default=1)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--backend", choices=("numba", "numpy"), default=None, help="kernel backend for this run")

    p = sub.add_parser("verify", parents=[common], help="run invariant suites, lines "
                       "suite,check,L,max_err,threshold,PASS|FAIL")
    p.add_argument("--suite", choices=sorted(verify.SUITES) + ["all"], required=True)
    p.add_argument("--L", type=_non_negative, default=4)
    return parser


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", encoding="utf-8", newline="")
    except OSError as exc:
        raise UsageError(f"cannot open {path}: {exc}") from exc
    with fh:
        yield fh


def _fmt(v: float, digits: int) -> str:
    return f"{v:.{digits}g}"


def cmd_cg_table(args, fh) -> int:
    table = (gaunt_real if args.gaunt else cg_real)(args.l1, args.l2, args.l3)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["m1", "m2", "m3", "value"])
    for m1, m2, m3, v in table:
        w.writerow([m1, m2, m3, _fmt(v, args.precision_digits)])
    return EXIT_OK


def cmd_tp_run(args, fh) -> int:
    try:
        impl = check_kind(args.kind, args.impl)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    L3 = 2 * args.L if args.L3 is None else args.L3
    if L3 > 2 * args.L:
        raise UsageError(f"--L3 must be at most 2L = {2 * args.L}")
    rng = np.random.default_rng(args.seed)
    x = IrrepVector.random(single_copies(args.L), rng)
    y = IrrepVector.random(single_copies(args.L), rng)
    out = apply_tpo(args.kind, impl, x, y, L3)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["vector", "entry", "l", "m", "value"])
    for name, vec in (("x", x), ("y", y), ("out", out)):
        for entry, _, l, sl in vec.irreps.copies():
            for m, v in zip(range(-l, l + 1), vec.data[sl]):
                w.writerow([name, entry, l, m, _fmt(v, args.precision_digits)])
    return EXIT_OK


def cmd_expressivity(args, fh) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["kind", "L", "count", "rank"])
    w.writerow([args.kind, args.L, expressivity_count(args.kind, args.L),
                expressivity_rank(args.kind, args.L, args.trials, args.seed)])
    fh.write("\n")
    w.writerow(["l1", "l2", "l3", "interactable"])
    for l1 in range(args.L + 1):
        for l2 in range(args.L + 1):
            for l3 in range(2 * args.L + 1):
                w.writerow([l1, l2, l3, str(interactable(args.kind, l1, l2, l3)).lower()])
    return EXIT_OK


def cmd_bench(args, fh) -> int:
    impls = None if args.impls == "all" else tuple(_csv_list(args.impls))
    try:
        for kind in args.kinds:
            check_kind(kind)
        config = bench.SweepConfig(kinds=tuple(args.kinds), impls=impls, mode=args.mode, Ls=tuple(args.L),
                                   batch=args.batch, seed=args.seed, warmup=args.warmup, repeats=args.repeats)
        for kind, impl in config.pairs():
            check_kind(kind, impl)
        if args.repeats < 5:
            raise ValueError("--repeats must be at least 5")
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    from . import kernels

    ctx = kernels.use_backend(args.backend) if args.backend else contextlib.nullcontext()
    with ctx:
        records = bench.sweep(config)
    bench.write_csv(records, fh, args.precision_digits)
    return EXIT_OK


def cmd_verify(args, fh) -> int:
    names = sorted(verify.SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        for check in verify.run_suite(name, args.L, args.seed):
            fh.write(check.row(args.precision_digits) + "\n")
            ok &= check.passed
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {
    "cg-table": cmd_cg_table,
    "expressivity": cmd_expressivity,
    "bench": cmd_bench,
    "verify": cmd_verify,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    if args.command == "tp":
        if args.tp_command is None:
            args.tp_parser.print_usage(sys.stderr)
            return EXIT_USAGE
        handler = cmd_tp_run
    else:
        handler = COMMANDS[args.command]
    try:
        with _output(args.out) as fh:
            return handler(args, fh)
    except UsageError as exc:
        print(f"eqtp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
