"""Command-line front end.

Subcommands::

    gls norm    --f "x^(-1/2)" --domain unit --p 1            # Lebesgue norm
    gls norm    --f "x^(-1/2)" --domain unit --psi natural    # Grand norm
    gls odot    --psi "(2/(2-p))^(1/p)" --psi-supp 1 2 \
                --theta "1" --theta-supp 1 inf --p-grid 1:2:0.1
    gls verify  --f "x^(-1/4)" --xi "x^2" --p-grid 1:1.8:0.1
    gls compact --nu-from odot.json --gamma "1/(2-p)" --gamma-supp 1 2
    gls example 3

Reports are CSV or JSON (``--format``), written to ``--out`` or stdout.
Exit codes: 0 success, 1 a certification failed, 2 invalid configuration,
3 a divergence verdict (divergent norm or infinite Grand norm).
Identical configuration and seed produce byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .compactness import CompactnessOptions, check_compactness
from .composition import pushforward_density, verify_bound
from .errors import GlsError
from .gls import GlsOptions, gls_norm
from .odot import odot_tabulate
from .psi import natural_psi, psi_from_expr, psi_from_json, psi_to_json
from .quadrature import Box, MeasureSpace, RealLine, UnitInterval, fn, lp_norm
from .scenarios import run_example

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_CONFIG = 2
EXIT_DIVERGENT = 3


def _parse_supp(tokens):
    lo = float(tokens[0])
    hi = math.inf if str(tokens[1]).lower() in ("inf", "infinity") else float(tokens[1])
    return lo, hi


def _parse_p_grid(spec: str):
    parts = spec.split(":")
    if len(parts) != 3:
        raise ValueError("p-grid must be lo:hi:step")
    lo, hi, step = (float(v) for v in parts)
    if step <= 0 or hi < lo:
        raise ValueError("p-grid must satisfy lo <= hi, step > 0")
    n = int(round((hi - lo) / step))
    grid = [round(lo + k * step, 12) for k in range(n + 1)]
    return [p for p in grid if p <= hi + 1e-12]


def _measure(args) -> MeasureSpace:
    density = fn(args.density) if getattr(args, "density", None) else None
    if args.domain == "unit":
        return MeasureSpace(UnitInterval(), density)
    if args.domain == "line":
        return MeasureSpace(RealLine(), density)
    if args.domain.startswith("box:"):
        toks = args.domain.split(":")[1:]
        if len(toks) % 2:
            raise ValueError("box domain needs an even number of bounds")
        pairs = tuple((float(a), float(b)) for a, b in zip(toks[::2], toks[1::2]))
        return MeasureSpace(Box(pairs), density)
    raise ValueError(f"unknown domain {args.domain!r}")


def _emit(payload, fmt: str, out_path):
    if fmt == "json":
        text = json.dumps(payload if isinstance(payload, dict) else payload.to_json(),
                          indent=2, sort_keys=True) + "\n"
    else:
        rows = payload.csv_rows() if hasattr(payload, "csv_rows") else payload
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in rows:
            writer.writerow(row)
        text = buf.getvalue()
    if out_path:
        with open(out_path, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def _psi_from_args(args, prefix: str, measure, tol):
    """Build a generating function from --<prefix>/--<prefix>-supp or the
    natural pick of --<prefix>-from-f."""
    expr = getattr(args, prefix, None)
    supp = getattr(args, f"{prefix}_supp", None)
    from_f = getattr(args, f"{prefix}_from_f", None)
    if expr and expr != "natural":
        if supp is None:
            raise ValueError(f"--{prefix}-supp is required with --{prefix}")
        return psi_from_expr(expr, _parse_supp(supp))
    if from_f:
        return natural_psi(fn(from_f), measure, tol=tol)
    return None


def cmd_norm(args) -> int:
    m = _measure(args)
    f = fn(args.f)
    if args.p is not None:
        r = lp_norm(f, args.p, m, tol=args.tol)
        payload = {"f": args.f, "p": args.p, **r.to_json()}
        if args.format == "csv":
            _emit([("value", "err", "subdivisions"),
                   ("divergent" if r.divergent else repr(r.value),
                    repr(r.abs_error_estimate), r.subdivisions)],
                  "csv", args.out)
        else:
            _emit(payload, "json", args.out)
        return EXIT_DIVERGENT if r.divergent else EXIT_OK
    if args.psi == "natural":
        psi = natural_psi(f, m, tol=args.tol)
    else:
        psi = _psi_from_args(args, "psi", m, args.tol)
        if psi is None:
            raise ValueError("norm needs either --p or a psi specification")
    rep = gls_norm(f, psi, m, GlsOptions(tol=args.tol))
    if args.format == "csv":
        rows = [("p", "ratio")] + [(repr(p), repr(r)) for p, r in rep.grid]
        _emit(rows, "csv", args.out)
    else:
        _emit({"f": args.f, "psi": psi_to_json(psi), **rep.to_json()},
              "json", args.out)
    return EXIT_DIVERGENT if rep.is_infinite else EXIT_OK


def cmd_odot(args) -> int:
    m = _measure(args)
    psi = _psi_from_args(args, "psi", m, args.tol)
    theta = _psi_from_args(args, "theta", m, args.tol)
    if psi is None or theta is None:
        raise ValueError("odot needs psi and theta (expressions or --*-from-f)")
    grid = _parse_p_grid(args.p_grid)
    res = odot_tabulate(psi, theta, args.h_norm, grid)
    _emit(res, args.format, args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    m = _measure(args)
    f = fn(args.f)
    xi = fn(args.xi)
    user_h = fn(args.h) if args.h else None
    cmap = pushforward_density(xi, m, user_density=user_h)
    psi = _psi_from_args(args, "psi", m, args.tol) or natural_psi(f, m, tol=args.tol)
    theta = _psi_from_args(args, "theta", m, args.tol) or natural_psi(
        cmap.density, m, tol=args.tol)
    grid = _parse_p_grid(args.p_grid)
    rep = verify_bound(f, psi, cmap, theta, m, grid,
                       tol_slack=args.tol_slack, tol=args.tol)
    _emit(rep, args.format, args.out)
    return EXIT_OK if rep.passed or rep.overall == "empty_nu_support" else EXIT_FAILED_CHECK


def cmd_compact(args) -> int:
    if args.nu_from:
        with open(args.nu_from) as handle:
            doc = json.load(handle)
        nu_doc = doc.get("nu_psi", doc)
        if nu_doc is None:
            raise ValueError(f"{args.nu_from} carries no tabulated convolution")
        nu = psi_from_json(nu_doc)
    elif args.nu:
        if args.nu_supp is None:
            raise ValueError("--nu-supp is required with --nu")
        nu = psi_from_expr(args.nu, _parse_supp(args.nu_supp))
    else:
        raise ValueError("compact needs --nu or --nu-from")
    if args.gamma_supp is None:
        raise ValueError("--gamma-supp is required")
    gamma = psi_from_expr(args.gamma, _parse_supp(args.gamma_supp))
    rep = check_compactness(nu, gamma, CompactnessOptions(limit_tol=args.limit_tol))
    _emit(rep, args.format, args.out)
    return EXIT_OK


def cmd_example(args) -> int:
    rep = run_example(args.number, tol=args.tol, seed=args.seed)
    _emit(rep, args.format, args.out)
    if args.out:  # keep a human-readable line on stdout
        sys.stdout.write(
            f"example {rep.number} ({rep.name}): "
            f"{'pass' if rep.passed else 'FAIL'}\n")
    return EXIT_OK if rep.passed else EXIT_FAILED_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="gls",
        description="Grand Lebesgue Space norms, substitution-operator "
                    "bound certificates, and compactness checks.")
    ap.add_argument("--version", action="version", version=f"gls {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--out", default=None, help="output path (default stdout)")
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--seed", type=int, default=20260810)
        p.add_argument("--domain", default="unit",
                       help="unit | line | box:a:b[:a2:b2[:a3:b3]]")
        p.add_argument("--density", default=None,
                       help="density expression w(x) against Lebesgue measure")

    p_norm = sub.add_parser("norm", help="Lebesgue or Grand Lebesgue norm")
    common(p_norm)
    p_norm.add_argument("--f", required=True)
    p_norm.add_argument("--p", type=float, default=None)
    p_norm.add_argument("--psi", default=None,
                        help="expression in p, or 'natural'")
    p_norm.add_argument("--psi-supp", nargs=2, default=None, metavar=("A", "B"))
    p_norm.add_argument("--psi-from-f", default=None,
                        help="natural generating function of this expression")
    p_norm.set_defaults(func=cmd_norm)

    p_odot = sub.add_parser("odot", help="convolution of two generating functions")
    common(p_odot)
    p_odot.add_argument("--psi", default=None)
    p_odot.add_argument("--psi-supp", nargs=2, default=None, metavar=("A", "B"))
    p_odot.add_argument("--psi-from-f", default=None)
    p_odot.add_argument("--theta", default=None)
    p_odot.add_argument("--theta-supp", nargs=2, default=None, metavar=("A", "B"))
    p_odot.add_argument("--theta-from-f", default=None)
    p_odot.add_argument("--h-norm", type=float, default=1.0)
    p_odot.add_argument("--p-grid", required=True, help="lo:hi:step")
    p_odot.set_defaults(func=cmd_odot)

    p_ver = sub.add_parser("verify", help="certify the composition bound")
    common(p_ver)
    p_ver.add_argument("--f", required=True)
    p_ver.add_argument("--xi", required=True)
    p_ver.add_argument("--h", default=None, help="user-supplied density")
    p_ver.add_argument("--psi", default=None, help="expression in p, or 'natural'")
    p_ver.add_argument("--psi-supp", nargs=2, default=None, metavar=("A", "B"))
    p_ver.add_argument("--psi-from-f", default=None)
    p_ver.add_argument("--theta", default=None)
    p_ver.add_argument("--theta-supp", nargs=2, default=None, metavar=("A", "B"))
    p_ver.add_argument("--theta-from-f", default=None)
    p_ver.add_argument("--p-grid", required=True, help="lo:hi:step")
    p_ver.add_argument("--tol-slack", type=float, default=1e-6)
    p_ver.set_defaults(func=cmd_verify)

    p_cmp = sub.add_parser("compact", help="compactness criterion")
    common(p_cmp)
    p_cmp.add_argument("--nu", default=None)
    p_cmp.add_argument("--nu-supp", nargs=2, default=None, metavar=("A", "B"))
    p_cmp.add_argument("--nu-from", default=None,
                       help="JSON file from `gls odot --format json`")
    p_cmp.add_argument("--gamma", required=True)
    p_cmp.add_argument("--gamma-supp", nargs=2, default=None, metavar=("A", "B"))
    p_cmp.add_argument("--limit-tol", type=float, default=1e-3)
    p_cmp.set_defaults(func=cmd_compact)

    p_ex = sub.add_parser("example", help="run a built-in end-to-end example")
    common(p_ex)
    p_ex.add_argument("number", type=int, choices=(1, 2, 3, 4))
    p_ex.set_defaults(func=cmd_example)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit code 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (GlsError, ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
