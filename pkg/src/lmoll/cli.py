"""Batch command-line surface with machine-readable output.

Every command is deterministic: no seeds, no environment configuration,
thread count never changes a result.  Payloads are canonical JSON (sorted
keys); census and moments also offer CSV.  With --out the payload is
written atomically (temp file in the target directory, then rename) and a
one-line summary goes to stdout; without --out the payload itself is
printed.  Exit codes: 0 success, 2 tolerance failure, 1 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile

from . import __version__
from .arith import RealCharacter
from .characters import (
    build_group,
    enumerate_even_primitive,
    epsilon_product_direct,
    epsilon_product_factored,
    even_family_pair_sum,
    phi_plus,
)
from .lvalues import afe_central, oracle_product
from .moments import census, restricted_divisor_product_check, mollified_moments
from .offdiag import (
    H_kernel,
    H_kernel_product_form,
    ShiftedConvParams,
    brute_shifted_conv,
    main_term,
)
from .reduction import ordered_map
from .special import SmoothBump
from .voronoi import factor_character, voronoi_lhs, voronoi_rhs

# the flag surface and payload field names; bumped only when they change
INTERFACE_VERSION = "1.0"

EPSILON_TOL = 1e-10
RESTRICTED_DIVISOR_TOL = 1e-12
H_KERNEL_TOL = 1e-10

_IDENTITY_QS = (7, 11, 13, 29)
_IDENTITY_DS = (5, 13, 17)
_SHIFT_GRID = (-0.2, 0.0, 0.3)
_H_POINTS = (
    (0.1, 0.2),
    (0.35, -0.05),
    (-0.2, 0.45),
    (0.3 + 0.2j, 0.1 - 0.05j),
    (0.05 + 0.6j, 0.05 - 0.6j),
)


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad flags; the contract reserves 2 for tolerance
    failures, so usage problems are remapped to exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"usage error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _usage_error(flag: str, exc: Exception) -> int:
    print(f"usage error: {flag}: {exc}", file=sys.stderr)
    return 1


def _write_atomic(path: str, text: str) -> None:
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".lmoll-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(payload: str, summary: str, out: str | None) -> None:
    if out is None:
        print(summary)
        print(payload, end="" if payload.endswith("\n") else "\n")
    else:
        _write_atomic(out, payload if payload.endswith("\n") else payload + "\n")
        print(summary)


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _csv_table(fields: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow(row)
    return buf.getvalue()


# ------------------------------------------------------------------ commands


def _cmd_census(args) -> int:
    try:
        psi = RealCharacter(args.D)
    except ValueError as e:
        return _usage_error("--D", e)
    try:
        nonzero_product, nonzero_plain = census(args.q, psi, args.threshold)
    except ValueError as e:
        return _usage_error("--q/--D/--threshold", e)
    fam = phi_plus(args.q)
    record = {
        "D": args.D,
        "nonzero_plain": nonzero_plain,
        "nonzero_product": nonzero_product,
        "phi_plus": fam,
        "q": args.q,
        "threshold": args.threshold,
    }
    if args.format == "csv":
        fields = ["q", "D", "threshold", "phi_plus", "nonzero_product",
                  "nonzero_plain"]
        payload = _csv_table(fields, [[record[f] for f in fields]])
    else:
        payload = _canonical_json(record)
    _emit(payload,
          f"census q={args.q} D={args.D}: product {nonzero_product}/{fam}, "
          f"plain {nonzero_plain}/{fam}",
          args.out)
    return 0


def _cmd_moments(args) -> int:
    try:
        psi = RealCharacter(args.D)
    except ValueError as e:
        return _usage_error("--D", e)
    try:
        report = mollified_moments(args.q, psi, args.X,
                                   threshold=args.threshold,
                                   threads=args.threads)
    except ValueError as e:
        return _usage_error("--q/--X", e)
    if args.format == "csv":
        rec = json.loads(report.to_json())
        fields = ["q", "D", "X", "s1_re", "s1_im", "s2", "ratio",
                  "census_nonzero", "phi_plus"]
        payload = _csv_table(fields, [[rec[f] for f in fields]])
    else:
        payload = report.to_json()
    _emit(payload,
          f"moments q={args.q} D={args.D} X={args.X}: ratio={report.ratio:.6f} "
          f"census={report.census_nonzero}/{phi_plus(args.q)}",
          args.out)
    return 0


def _cmd_afe_check(args) -> int:
    try:
        psi = RealCharacter(args.D)
    except ValueError as e:
        return _usage_error("--D", e)
    try:
        group = build_group(args.q)
        family = enumerate_even_primitive(group)

        def residual(chi) -> float:
            return abs(afe_central(chi, psi).L_central - oracle_product(chi, psi))

        residuals = ordered_map(residual, family, threads=args.threads)
    except ValueError as e:
        return _usage_error("--q/--D", e)
    worst = max(residuals, default=0.0)
    ok = worst < args.tol
    payload = _canonical_json({
        "D": args.D,
        "count": len(residuals),
        "max_residual": worst,
        "pass": ok,
        "q": args.q,
        "tol": args.tol,
    })
    _emit(payload,
          f"afe-check q={args.q} D={args.D}: {len(residuals)} characters, "
          f"max residual {worst:.3e} ({'ok' if ok else 'FAIL'})",
          args.out)
    return 0 if ok else 2


def _suite_orthogonality(max_q: int) -> dict:
    cases = 0
    for q in _IDENTITY_QS:
        if q > max_q:
            continue
        group = build_group(q)
        for m in range(1, q):
            for n in range(1, q):
                even_family_pair_sum(group, m, n)
                cases += 1
    return {"cases": cases, "pass": True}


def _suite_epsilon(max_q: int, max_D: int) -> dict:
    worst, cases = 0.0, 0
    for q in _IDENTITY_QS:
        if q > max_q:
            continue
        group = build_group(q)
        family = enumerate_even_primitive(group)
        for D in _IDENTITY_DS:
            if D > max_D or D == q:
                continue
            psi = RealCharacter(D)
            for chi in family:
                worst = max(worst, abs(epsilon_product_direct(chi, psi)
                                       - epsilon_product_factored(chi, psi)))
                cases += 1
    return {"cases": cases, "max_residual": worst, "pass": worst < EPSILON_TOL}


def _suite_restricted_divisor(max_D: int) -> dict:
    worst, cases = 0.0, 0
    for D in range(5, max_D + 1, 4):
        try:
            restricted_divisor_product_check(D, 0.0, 0.0)
        except ValueError:
            continue        # not squarefree
        for u in _SHIFT_GRID:
            for v in _SHIFT_GRID:
                worst = max(worst, restricted_divisor_product_check(D, u, v))
                cases += 1
    return {"cases": cases, "max_residual": worst, "pass": worst < RESTRICTED_DIVISOR_TOL}


def _suite_h_kernel() -> dict:
    worst = 0.0
    for u, v in _H_POINTS:
        h = H_kernel(u, v)
        worst = max(worst, abs(h - H_kernel_product_form(u, v))
                    / max(1.0, abs(h)))
    for v in (0.1, 0.2):
        worst = max(worst, abs(H_kernel(1.0 - v, v)))
    return {"cases": len(_H_POINTS) + 2, "max_residual": worst,
            "pass": worst < H_KERNEL_TOL}


def _cmd_identity_suite(args) -> int:
    try:
        suites = {
            "epsilon": _suite_epsilon(args.max_q, args.max_D),
            "h_kernel": _suite_h_kernel(),
            "restricted_divisor": _suite_restricted_divisor(args.max_D),
            "orthogonality": _suite_orthogonality(args.max_q),
        }
    except ArithmeticError as e:
        print(f"identity-suite: {e}", file=sys.stderr)
        return 2
    ok = all(s["pass"] for s in suites.values())
    suites["pass"] = ok
    payload = _canonical_json(suites)
    parts = ", ".join(f"{name} {s['cases']}" for name, s in sorted(suites.items())
                      if isinstance(s, dict))
    _emit(payload,
          f"identity-suite ({'ok' if ok else 'FAIL'}): {parts}",
          args.out)
    return 0 if ok else 2


def _cmd_shifted_conv(args) -> int:
    try:
        psi = RealCharacter(args.D)
    except ValueError as e:
        return _usage_error("--D", e)
    try:
        scales = [float(s) for s in args.scales.split(",") if s]
        if not scales:
            raise ValueError("at least one scale required")
    except ValueError as e:
        return _usage_error("--scales", e)
    rows = []
    for scale in scales:
        try:
            params = ShiftedConvParams(a=args.a, b=args.b, q=args.q,
                                       M=scale, N=scale, psi=psi,
                                       sign=args.sign)
        except ValueError as e:
            return _usage_error("--a/--b/--q/--scales/--sign", e)
        brute = brute_shifted_conv(params, threads=args.threads)
        main, tail = main_term(params, args.L_max)
        rel = abs(brute - main) / abs(brute) if brute != 0.0 else None
        rows.append({"M": scale, "N": scale, "brute": brute, "main": main,
                     "rel_deviation": rel, "tail": tail})
    payload = _canonical_json({
        "D": args.D, "a": args.a, "b": args.b, "q": args.q,
        "scales": rows, "sign": args.sign,
    })
    devs = " ".join("-" if r["rel_deviation"] is None
                    else f"{r['rel_deviation']:.4f}" for r in rows)
    _emit(payload,
          f"shifted-conv a={args.a} b={args.b} q={args.q} D={args.D}: "
          f"deviations {devs}",
          args.out)
    return 0


def _cmd_voronoi_check(args) -> int:
    try:
        psi = RealCharacter(args.D)
    except ValueError as e:
        return _usage_error("--D", e)
    try:
        case = factor_character(psi, args.c, args.a)
    except ValueError as e:
        return _usage_error("--c/--a", e)
    try:
        g = SmoothBump(args.bump_lo, args.bump_hi)
    except ValueError as e:
        return _usage_error("--bump-lo/--bump-hi", e)
    try:
        lhs = voronoi_lhs(case, g)
        rhs = voronoi_rhs(case, g, m_max=args.m_max, threads=args.threads)
    except ValueError as e:
        return _usage_error("--bump-hi/--m-max", e)
    residual = abs(lhs - rhs.value)
    ok = residual < args.tol
    payload = _canonical_json({
        "insufficient": rhs.insufficient,
        "lhs": [lhs.real, lhs.imag],
        "residual": residual,
        "rhs": [rhs.value.real, rhs.value.imag],
        "tail_bound": rhs.tail_bound,
    })
    _emit(payload,
          f"voronoi-check D={args.D} c={args.c} a={args.a}: "
          f"residual {residual:.3e} ({'ok' if ok else 'FAIL'})",
          args.out)
    return 0 if ok else 2


# ------------------------------------------------------------------ parser


def _add_common(p: argparse.ArgumentParser, formats: bool = False) -> None:
    p.add_argument("--out", default=None, help="output file (atomic write)")
    p.add_argument("--threads", type=int, default=1)
    if formats:
        p.add_argument("--format", choices=("json", "csv"), default="json")
    else:
        p.set_defaults(format="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lmoll")
    parser.add_argument(
        "--version", action="version",
        version=f"%(prog)s {__version__} (interface {INTERFACE_VERSION})")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("census", help="nonvanishing counts for one family")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--threshold", type=float, default=1e-8)
    _add_common(p, formats=True)
    p.set_defaults(run=_cmd_census)

    p = sub.add_parser("moments", help="mollified first and second moments")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--X", type=int, required=True)
    p.add_argument("--threshold", type=float, default=1e-8)
    _add_common(p, formats=True)
    p.set_defaults(run=_cmd_moments)

    p = sub.add_parser("afe-check",
                       help="central values against the zeta-sum oracle")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(run=_cmd_afe_check)

    p = sub.add_parser("identity-suite",
                       help="orthogonality, sign factorization, restricted "
                            "divisor identity, and kernel identity batteries")
    p.add_argument("--max-q", type=int, default=29)
    p.add_argument("--max-D", type=int, default=100)
    _add_common(p)
    p.set_defaults(run=_cmd_identity_suite)

    p = sub.add_parser("shifted-conv",
                       help="congruence lattice sum against its prediction")
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--scales", required=True,
                   help="comma-separated list of M=N values")
    p.add_argument("--sign", choices=("+", "-", "both"), default="both")
    p.add_argument("--L-max", type=int, default=100000)
    _add_common(p)
    p.set_defaults(run=_cmd_shifted_conv)

    p = sub.add_parser("voronoi-check",
                       help="twisted sum against its dual expansion")
    p.add_argument("--D", type=int, required=True)
    p.add_argument("--c", type=int, required=True)
    p.add_argument("--a", type=int, required=True)
    p.add_argument("--bump-lo", type=float, required=True)
    p.add_argument("--bump-hi", type=float, required=True)
    p.add_argument("--m-max", type=int, default=100000)
    p.add_argument("--tol", type=float, default=1e-6)
    _add_common(p)
    p.set_defaults(run=_cmd_voronoi_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        return _usage_error("--threads", ValueError("must be at least 1"))
    return args.run(args)


if __name__ == "__main__":
    raise SystemExit(main())
