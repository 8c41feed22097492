"""Command-line entry point ``fedosov``.

Every subcommand loads a YAML config (``--config``, a path or one of the
shipped fixture names) and writes a deterministic plain-text report to
stdout.  The exit status is 0 exactly when every requested check passes;
configuration errors exit with 2.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence, TextIO

from .config import Config, ConfigError, load_config
from .euler import characteristic_form
from .fedosov import (
    FedosovState,
    build_state,
    extract_Ck,
    load_state,
    save_state,
    star_multiply,
    validate_chart,
)
from .scalar_poly import ParseError, parse_series
from .suites import SUITES, run_suite
from .symmetry import (
    operator_exp,
    parse_operator,
    random_moyal_derivation,
    symmetrize_equivalence,
)
from .weyl import format_weyl

__all__ = ["main", "build_parser", "solve_with_cache"]

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-c", "--config", default="flat2d",
                        help="YAML config path or fixture name (flat2d, curved2d); default flat2d")
    common.add_argument("--cache", default=None,
                        help="cache file for the solved state (read if fresh, written otherwise)")
    common.add_argument("--seed", type=int, default=None, help="override the config seed")

    p = argparse.ArgumentParser(prog="fedosov", description="Exact Fedosov star products on a chart.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    sub.add_parser("validate", parents=[common], help="validate the chart and potentials")
    sp = sub.add_parser("solve", parents=[common], help="solve for r and optionally cache it")
    sp.add_argument("--show", action="store_true", help="print r in full")
    sp = sub.add_parser("star", parents=[common], help="star product f * g")
    sp.add_argument("-f", required=True)
    sp.add_argument("-g", required=True)
    sp = sub.add_parser("ck", parents=[common], help="bidifferential coefficient C_k(f, g)")
    sp.add_argument("-k", type=int, required=True)
    sp.add_argument("-f", default="x1")
    sp.add_argument("-g", default="x2")
    sp = sub.add_parser("verify", parents=[common], help="run an identity suite")
    sp.add_argument("suite", choices=sorted(SUITES) + ["all"])
    sub.add_parser("class", parents=[common], help="characteristic form representative")
    sp = sub.add_parser("symmetrize", parents=[common],
                        help="symmetrise an equivalence of the configured star product with itself")
    sp.add_argument("-T", required=True,
                    help="operator file, or 'seeded' for exp(nu D) with a seeded Moyal derivation D")
    sp.add_argument("--mode", choices=("P", "C", "Weyl"), required=True)
    sp.add_argument("--order", type=int, default=3, help="nu-order K of the operators (default 3)")
    return p


def solve_with_cache(cfg: Config, cache: Optional[str], out: TextIO) -> FedosovState:
    """Load ``r`` from ``cache`` when fresh, otherwise solve and write it."""
    if cache:
        st, notice = load_state(cfg.chart, cache)
        if st is not None:
            print(f"cache: loaded {cache}", file=out)
            return st
        if notice != "no cache file":
            print(f"cache: {notice}", file=out)
    st = build_state(cfg.chart)
    if cache:
        Path(cache).parent.mkdir(parents=True, exist_ok=True)
        save_state(st, cache)
        print(f"cache: wrote {cache}", file=out)
    return st


def _emit(lines: Sequence[str], out: TextIO) -> None:
    for line in lines:
        print(line, file=out)


def _cmd_validate(cfg: Config, args, out: TextIO) -> int:
    rep = validate_chart(cfg.chart)
    _emit(rep.lines(), out)
    return EXIT_OK if rep.ok else EXIT_FAIL


def _cmd_solve(cfg: Config, args, out: TextIO) -> int:
    st = solve_with_cache(cfg, args.cache, out)
    res = st.r_equation_residual()
    norm = st.normalisation_residual()
    print(f"r: {len(st.r)} terms, cap N = {st.cap}", file=out)
    if args.show:
        print(f"r = {format_weyl(st.r)}", file=out)
    print(f"{'PASS' if not res else 'FAIL'} r equation through Deg {st.cap - 1}", file=out)
    print(f"{'PASS' if not norm else 'FAIL'} delta^-1 r = s", file=out)
    return EXIT_OK if not res and not norm else EXIT_FAIL


def _cmd_star(cfg: Config, args, out: TextIO) -> int:
    st = solve_with_cache(cfg, args.cache, sys.stderr)
    f, g = parse_series(args.f, cfg.dim), parse_series(args.g, cfg.dim)
    print(star_multiply(st, f, g), file=out)
    return EXIT_OK


def _cmd_ck(cfg: Config, args, out: TextIO) -> int:
    if args.k < 0:
        print("error: k must be non-negative", file=out)
        return EXIT_FAIL
    if 2 * args.k > cfg.cap:
        print(f"error: C_{args.k} is not certified at cap N = {cfg.cap}: the star product is exact "
              f"only through nu^{cfg.cap // 2} (need 2k <= N)", file=out)
        return EXIT_FAIL
    st = solve_with_cache(cfg, args.cache, sys.stderr)
    f, g = parse_series(args.f, cfg.dim), parse_series(args.g, cfg.dim)
    print(extract_Ck(st, args.k, f, g), file=out)
    return EXIT_OK


def _cmd_verify(cfg: Config, args, out: TextIO) -> int:
    names = sorted(SUITES) if args.suite == "all" else [args.suite]
    st = None
    if any(n != "hodge" for n in names):
        st = solve_with_cache(cfg, args.cache, sys.stderr)
    ok = True
    for name in names:
        print(f"== {name} ({cfg.name}, N = {cfg.cap}, seed {cfg.seed})", file=out)
        rep = run_suite(name, cfg, st)
        _emit(rep.lines(), out)
        ok = ok and rep.ok
    print("RESULT " + ("PASS" if ok else "FAIL"), file=out)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_class(cfg: Config, args, out: TextIO) -> int:
    st = solve_with_cache(cfg, args.cache, sys.stderr)
    cf = characteristic_form(st)
    print("(1/nu)(omega + Omega) =", file=out)
    _emit(cf.lines(), out)
    return EXIT_OK if cf.certified else EXIT_FAIL


def _cmd_symmetrize(cfg: Config, args, out: TextIO) -> int:
    st = solve_with_cache(cfg, args.cache, sys.stderr)
    K = args.order
    if args.T == "seeded":
        D = random_moyal_derivation(st.pd, K, seed=cfg.seed)
        T = operator_exp(D.shift_nu(1))
    else:
        T = parse_operator(Path(args.T).read_text(encoding="utf-8"), cfg.dim, K)
    try:
        S, rep = symmetrize_equivalence(T, st, st, args.mode)
    except ValueError as exc:
        print(f"FAIL precondition: {exc}", file=out)
        return EXIT_FAIL
    _emit(rep.lines(), out)
    print("S =", file=out)
    print(S, file=out)
    return EXIT_OK if rep.ok else EXIT_FAIL


COMMANDS = {
    "validate": _cmd_validate,
    "solve": _cmd_solve,
    "star": _cmd_star,
    "ck": _cmd_ck,
    "verify": _cmd_verify,
    "class": _cmd_class,
    "symmetrize": _cmd_symmetrize,
}


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, validate=args.command != "validate")
    except ConfigError as exc:
        print(f"config error: {exc}", file=out)
        if exc.report is not None:
            _emit(exc.report.lines(), out)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.seed = args.seed
    try:
        return COMMANDS[args.command](cfg, args, out)
    except (ParseError, ValueError) as exc:
        print(f"error: {exc}", file=out)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
