"""Command-line front end: translate, decide, check-lemma.

Exit codes: 0 success (SAT, all checks pass), 1 UNSAT or a failed
check, 2 bad input or usage, 3 a resource cap was hit.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .decide import DEFAULT_SPLIT_CAP, SplitCapExceeded, decide
from .linear import DEFAULT_C, DEFAULT_ROW_CAP, FmBlowup
from .reduction import ReductionError, build_S_mv, build_S_pab, default_params
from .suites import SUITES, run_suite
from .syntax import (
    LukSyntaxError, format_formula_file, parse_formula_file, write_atomically,
)
from .terms import Signature
from .transform import DEFAULT_DNF_CAP, DnfBlowup

EXIT_OK, EXIT_NO, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load(path: str, lang: str | None):
    """Parse a formula file; `lang` supplies or must match the #lang header."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror}") from None
    first = text.lstrip().splitlines()[0] if text.strip() else ""
    if not first.startswith("#lang"):
        if lang is None:
            raise UsageError(f"{path}:1:1: missing '#lang' header and no --lang given")
        text = f"#lang {lang}\n{text}"
    try:
        ff = parse_formula_file(text)
    except LukSyntaxError as exc:
        raise UsageError(f"{path}:{exc}") from None
    if lang is not None and ff.signature.value != lang:
        raise UsageError(f"{path}: header says {ff.signature.value}, --lang says {lang}")
    return ff


def _render(rows: list[tuple[str, str]], fmt: str) -> str:
    if fmt == "structured":
        return "".join(f"{k}={v}\n" for k, v in rows)
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {v}\n" for k, v in rows)


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        write_atomically(out, text)


# -- translate ----------------------------------------------------------------

def cmd_translate(args) -> int:
    if args.to is None and not args.self_:
        raise UsageError("translate needs --to mv or --self")
    if args.to is not None and args.self_:
        raise UsageError("--to and --self are exclusive")
    ff = _load(args.input, args.lang)
    if args.self_:
        if not ff.signature is Signature.MV:
            raise UsageError(f"--self expects an mv file, got {ff.signature.value}")
        build, kind = build_S_mv, "self"
    else:
        if not ff.signature.is_group:
            raise UsageError(f"--to mv expects an ab or pab file, got {ff.signature.value}")
        build, kind = build_S_pab, "pab-to-mv"
    outputs, report = [], []
    for n, (F, line) in enumerate(zip(ff.formulas, ff.lines), start=1):
        p = default_params(F, args.c, args.M)
        T = build(F, p)
        outputs.append(T.formula)
        report.append(("formula", str(n)))
        report.append(("line", str(line)))
        report += T.report(kind=kind, timings=args.timings)
    report.append(("verdict", "OK"))
    text = format_formula_file(Signature.MV, outputs)
    if args.out is None:
        sys.stdout.write(text)
        sys.stderr.write(_render(report, args.format))
    else:
        write_atomically(args.out, text)
        sys.stdout.write(_render(report, args.format))
    return EXIT_OK


# -- decide -------------------------------------------------------------------

def cmd_decide(args) -> int:
    ff = _load(args.input, args.lang)
    kw = dict(dnf_cap=args.dnf_cap, split_cap=args.split_cap, row_cap=args.fm_cap,
              seed=args.seed)
    rows: list[tuple[str, str]] = []
    text: list[str] = []
    all_sat = True
    for n, (F, line) in enumerate(zip(ff.formulas, ff.lines), start=1):
        sig = ff.signature
        if sig is Signature.AB:
            sig = Signature.PAB
        v = decide(F, sig, **kw)
        all_sat &= v.sat
        rows += [("formula", str(n)), ("line", str(line)), ("status", v.status)]
        head = v.status if len(ff.formulas) == 1 else f"formula {n} (line {line}): {v.status}"
        text.append(head + "\n")
        if v.sat:
            for x in sorted(v.witness):
                rows.append((f"witness.{x}", str(v.witness[x])))
                text.append(f"  {x} = {v.witness[x]}\n")
        if args.timings:
            rows.append(("elapsed", f"{v.stats.get('elapsed', 0.0):.6f}"))
            rows.append(("branches", str(v.stats.get("branches", 0))))
            text.append(f"  elapsed {v.stats.get('elapsed', 0.0):.6f}s\n")
    verdict = "SAT" if all_sat else "UNSAT"
    rows.append(("verdict", verdict))
    body = _render(rows, "structured") if args.format == "structured" else "".join(text)
    _emit(body, args.out)
    return EXIT_OK if all_sat else EXIT_NO


# -- check-lemma --------------------------------------------------------------

def cmd_check_lemma(args) -> int:
    names = list(SUITES) if args.name == "all" else [args.name]
    if args.name != "all" and args.name not in SUITES:
        raise UsageError(f"unknown lemma suite {args.name!r}; choose from: all, "
                         + ", ".join(SUITES))
    opts = {"max_chain": args.max_chain, "c": args.c}
    rows: list[tuple[str, str]] = []
    text: list[str] = []
    ok = True
    for name in names:
        res = run_suite(name, count=args.count, seed=args.seed, **opts)
        ok &= res.ok
        rows += res.report(timings=args.timings)
        status = "pass" if res.ok else "FAIL"
        line = f"{name:<12} {res.passed:>4}/{res.count:<4} {status}"
        if args.timings:
            line += f"  {res.elapsed:.2f}s"
        text.append(line + "\n")
        text += [f"    #{i}: {detail}\n" for i, detail in res.failures]
    rows.append(("verdict", "PASS" if ok else "FAIL"))
    body = _render(rows, "structured") if args.format == "structured" else "".join(text)
    _emit(body, args.out)
    return EXIT_OK if ok else EXIT_NO


# -- argument parsing ---------------------------------------------------------

def _natural(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("expected a natural number")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="luk", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "structured"), default="text")
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--timings", action="store_true",
                        help="include wall-clock timings (reports are no longer reproducible)")
    common.add_argument("--seed", type=_natural, default=0)
    common.add_argument("--c", type=_positive, default=DEFAULT_C,
                        help="constant of the witness-box bound")
    sub = parser.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("translate", parents=[common], help="build the S formula")
    tr.add_argument("input")
    tr.add_argument("--lang", choices=[s.value for s in Signature])
    tr.add_argument("--to", choices=("mv",))
    tr.add_argument("--self", dest="self_", action="store_true")
    tr.add_argument("--M", type=_natural, help="override M (needs --unsafe-M)")
    tr.add_argument("--unsafe-M", dest="unsafe_M", action="store_true",
                    help="accept an M override below the witness-box bound")
    tr.set_defaults(run=cmd_translate)

    de = sub.add_parser("decide", parents=[common], help="decide satisfiability")
    de.add_argument("input")
    de.add_argument("--lang", choices=[s.value for s in Signature])
    de.add_argument("--dnf-cap", type=_positive, default=DEFAULT_DNF_CAP)
    de.add_argument("--split-cap", type=_positive, default=DEFAULT_SPLIT_CAP)
    de.add_argument("--fm-cap", type=_positive, default=DEFAULT_ROW_CAP)
    de.set_defaults(run=cmd_decide)

    ch = sub.add_parser("check-lemma", parents=[common], help="run a randomized suite")
    ch.add_argument("name", help="suite name, or 'all': " + ", ".join(SUITES))
    ch.add_argument("--count", type=_positive)
    ch.add_argument("--max-chain", type=_positive, default=8)
    ch.set_defaults(run=cmd_check_lemma)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if getattr(args, "M", None) is not None and not args.unsafe_M:
        print("luk: --M needs --unsafe-M", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"luk: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (DnfBlowup, FmBlowup, SplitCapExceeded, ReductionError) as exc:
        print(f"luk: {exc}", file=sys.stderr)
        return EXIT_CAP
