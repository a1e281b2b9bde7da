"""Command line front end.

Exit codes: 0 success, 2 bad input or structure failure, 3 verification
failure, 4 unreadable certificate.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction

import mpmath

from delsarte import __version__
from delsarte import certify as C
from delsarte import lp_estimator as LP
from delsarte import tables
from delsarte.errors import CertificateParseError, DelsarteError, VerificationError
from delsarte.numeric import DEFAULT_PRECISION_BITS
from delsarte.pipeline import default_degree_cap, parse_s, solve

EXIT_OK, EXIT_STRUCTURE, EXIT_VERIFY, EXIT_PARSE = 0, 2, 3, 4


def _default_bits() -> int:
    env = os.environ.get("DELSARTE_PRECISION_BITS")
    if env:
        try:
            return int(env)
        except ValueError:
            pass
    return DEFAULT_PRECISION_BITS


def _bits(text: str) -> int:
    n = int(text)
    if n < 64:
        raise argparse.ArgumentTypeError("precision must be at least 64 bits")
    return n


def parse_range(text: str) -> range:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"range must look like A..B, got {text!r}") from None
    if lo > hi:
        raise argparse.ArgumentTypeError("empty range")
    return range(lo, hi + 1)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delsarte", description="Certified Delsarte LP bounds for antipodal spherical codes")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--s", default="1/2", help="inner-product bound as an exact rational (default 1/2)")
        sp.add_argument("--precision-bits", type=_bits, default=_default_bits())

    sp = sub.add_parser("solve", help="construct, certify and write a certificate")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--form", type=int, choices=(1, 2, 3, 4))
    sp.add_argument("--k", type=int, dest="K")
    sp.add_argument("--out", help="certificate path (default certificate-m<M>.json)")
    common(sp)

    sp = sub.add_parser("verify", help="re-check a certificate file")
    sp.add_argument("certificate")

    sp = sub.add_parser("table", help="bounds over a range of dimensions with registry diffs")
    sp.add_argument("--range", type=parse_range, required=True, dest="mrange")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--out")
    common(sp)

    sp = sub.add_parser("estimate", help="discretized LP estimate and structure guess")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--degree", type=int)
    sp.add_argument("--grid", type=int, default=LP.DEFAULT_GRID)
    common(sp)
    return p


def cmd_solve(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    bits = args.precision_bits
    res = solve(args.m, args.s, args.form, args.K, bits)
    path = args.out or f"certificate-m{args.m}.json"
    with open(path, "w", encoding="ascii") as fh:
        fh.write(res.certificate)
    print(res.summary(), file=out)
    for note in res.notes:
        print(f"note: {note}", file=err)
    return EXIT_OK


def cmd_verify(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    result = C.verify_certificate(args.certificate)
    width = max(len(c.name) for c in result.checks)
    for c in result.checks:
        status = "pass" if c.passed else ("warn" if c.warning else "FAIL")
        print(f"{c.name:<{width}}  {status}  {c.detail}", file=out)
    if result.embedded_match is False:
        print("embedded report differs from the recomputed one", file=err)
    if not result.passed:
        print("failed: " + ", ".join(result.failures), file=err)
        return EXIT_VERIFY
    return EXIT_OK


TABLE_FIELDS = ("m", "w", "registry_w", "rel_diff", "status", "form", "K", "degree", "note")


def table_row(m: int, s: str, bits: int) -> dict:
    entry = tables.known_bound(m) if parse_s(s) == Fraction(1, 2) else None
    row = dict.fromkeys(TABLE_FIELDS, "")
    row["m"] = m
    if entry is None:
        row["status"] = "no-registry"
        return row
    row["registry_w"] = str(entry.w)
    try:
        res = solve(m, s, precision=bits)
    except DelsarteError as exc:
        row["status"] = f"error:{type(exc).__name__}"
        row["note"] = str(exc)[:200]
        return row
    cmp = tables.compare(m, res.bound)
    b = res.bound
    row["w"] = str(b.w_exact) if b.w_exact is not None else C.to_decimal(b.w, bits)
    with mpmath.workprec(64):
        row["rel_diff"] = mpmath.nstr(cmp.rel_diff, 3)
    row["status"] = cmp.status
    row.update(form=res.formspec.form, K=res.formspec.K, degree=res.formspec.degree, note="; ".join(res.notes))
    return row


def _table_row_star(a):
    return table_row(*a)


def cmd_table(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    work = [(m, args.s, args.precision_bits) for m in args.mrange]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_table_row_star, work))
    else:
        rows = [table_row(*a) for a in work]
    if args.format == "json":
        text = json.dumps(rows, indent=2) + "\n"
    else:
        buf = io.StringIO()
        wr = csv.DictWriter(buf, fieldnames=TABLE_FIELDS, lineterminator="\n")
        wr.writeheader()
        wr.writerows(rows)
        text = buf.getvalue()
    if args.out:
        with open(args.out, "w", encoding="ascii") as fh:
            fh.write(text)
    else:
        out.write(text)
    return EXIT_OK


def cmd_estimate(args, out=None, err=None) -> int:
    out, err = out or sys.stdout, err or sys.stderr
    s = parse_s(args.s)
    cap = args.degree if args.degree is not None else default_degree_cap(args.m)
    lp = LP.build_lp({"m": args.m, "s": s}, cap, args.grid, precision=min(args.precision_bits, LP.DEFAULT_LP_BITS))
    res = LP.solve_lp(lp)
    guesses = LP.guess_structure(res, lp)
    with mpmath.workprec(lp.precision):
        print(f"m={args.m} degree_cap={cap} grid={args.grid} w_estimate={mpmath.nstr(res.w_estimate, 15)}", file=out)
    best = guesses[0]
    print(f"guess form={best.form} K={best.K} degree={best.degree} ({'; '.join(best.notes)})", file=out)
    for g in guesses[1:4]:
        print(f"alternative form={g.form} K={g.K} degree={g.degree}", file=out)
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "table": cmd_table, "estimate": cmd_estimate}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except CertificateParseError as exc:
        print(f"error [parse]: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except VerificationError as exc:
        print(f"error [verification] {exc.check}: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except DelsarteError as exc:
        print(f"error [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_STRUCTURE


if __name__ == "__main__":
    sys.exit(main())
