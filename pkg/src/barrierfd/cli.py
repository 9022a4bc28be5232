"""Command-line interface: ``price``, ``converge``, ``table`` and ``compare``.

Exit codes: 0 ok, 1 usage, 2 validation, 3 numerical failure, 4 table failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from .boundary import CutoffConfig
from .contracts import contract_from_mapping, parse_config
from .engine import default_time_steps
from .errors import DomainError, GeometryError, NumericalError, ValidationError
from .harness import (_POLICIES, SCHEMES, TABLE_IDS, closed_form_reference, heat_kernel_ladder,
                      observed_order, price_with_scheme, richardson_order, rows_csv, run_table,
                      table_csv)
from .schemes import SMax, error_profile

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_TABLE = 0, 1, 2, 3, 4

EXPLICIT = ("obes", "mefd")
LADDER_HEADER = ("mesh", "value", "abs_error", "wall_time")
COMPARE_HEADER = ("scheme", "value", "abs_error", "max_error", "wall_time")

# flag name -> configuration key
_CONTRACT_FLAGS = {
    "s0": "s0", "k": "strike", "t": "expiry", "sigma": "sigma", "r": "r", "q": "q",
    "rebate": "rebate", "b": "barrier", "bl": "barrier_low", "bu": "barrier_high",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_mesh(text: str) -> tuple:
    """``MxL`` or ``M`` (L then follows the default rule)."""
    parts = text.lower().split("x")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed mesh {text!r}; expected MxL") from None
    if len(nums) not in (1, 2) or min(nums) < 1:
        raise argparse.ArgumentTypeError(f"malformed mesh {text!r}; expected MxL")
    return nums[0], (nums[1] if len(nums) == 2 else None)


def _global_flags(p: argparse.ArgumentParser, default) -> None:
    p.add_argument("--delta", type=float, default=default)
    p.add_argument("--mesh", type=parse_mesh, default=default, help="mesh as MxL")
    p.add_argument("--scheme", choices=SCHEMES, default=default)
    p.add_argument("--monitoring", default=default, help="continuous|daily|weekly|count:N")
    p.add_argument("--rho", type=int, default=default, help="time steps per monitoring interval")
    p.add_argument("--config", default=default, help="contract file of key = value lines")
    p.add_argument("--out", default=default, help="write CSV output to this file")


def _contract_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("contract")
    for flag in _CONTRACT_FLAGS:
        g.add_argument(f"--{flag}", type=float)
    g.add_argument("--kind", choices=("down", "up", "double"),
                   help="barrier type; inferred from --b/--bl/--bu when omitted")
    g.add_argument("--s-max", default="2S0+200",
                   help="far edge for habis/mefd: 2S0+200, 2S0, S0+100 or a number")
    g.add_argument("--lam", type=float, default=math.sqrt(3.0), help="explicit dy / (sigma sqrt(dt))")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="barrierfd", description="High-order finite difference barrier option pricer")
    _global_flags(parser, None)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("price", help="price one contract")
    _global_flags(p, argparse.SUPPRESS)
    _contract_flags(p)

    c = sub.add_parser("converge", help="doubling-ladder convergence table")
    _global_flags(c, argparse.SUPPRESS)
    _contract_flags(c)
    c.add_argument("--levels", type=int, default=4)
    c.add_argument("--meshes", help="explicit comma-separated mesh list, e.g. 50,100,200 or 25x25,50x50")
    c.add_argument("--reference", type=float, help="reference value (default: closed form)")
    c.add_argument("--problem", choices=("contract", "heat-kernel"), default="contract")
    c.add_argument("--mode", choices=("space", "time"), default="space", help="heat-kernel ladder mode")

    t = sub.add_parser("table", help="reproduce a table or figure data set")
    _global_flags(t, argparse.SUPPRESS)
    t.add_argument("table_ids", nargs="+", metavar="ID", help=f"{', '.join(TABLE_IDS)} or all")
    t.add_argument("--workers", type=int, default=1)
    t.add_argument("--no-timings", action="store_true", help="leave the wall_time column empty")

    m = sub.add_parser("compare", help="compare schemes on one contract and mesh")
    _global_flags(m, argparse.SUPPRESS)
    _contract_flags(m)
    m.add_argument("--schemes", required=True, help="comma-separated scheme list (at least two)")
    return parser


# -- argument resolution ----------------------------------------------------------------

def _contract(args):
    values = {}
    if args.config:
        try:
            values.update(parse_config(Path(args.config).read_text()))
        except OSError as exc:
            raise UsageError(f"cannot read config: {exc}") from None
    for flag, key in _CONTRACT_FLAGS.items():
        v = getattr(args, flag)
        if v is not None:
            values[key] = repr(v)
    if args.kind:
        values["barrier_type"] = args.kind
    elif "barrier_type" not in values:
        if "barrier_low" in values or "barrier_high" in values:
            values["barrier_type"] = "double"
        elif "barrier" in values and "s0" in values:
            values["barrier_type"] = "up" if float(values["barrier"]) > float(values["s0"]) else "down"
    if args.monitoring:
        values["monitoring"] = args.monitoring
    delta = args.delta if args.delta is not None else values.pop("delta", None)
    values.pop("delta", None)
    cfg = CutoffConfig() if delta is None else CutoffConfig(float(delta))
    try:
        contract, market = contract_from_mapping(values)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise UsageError(str(exc)) from None
    return contract, market, cfg


def _scheme(args) -> str:
    return args.scheme or "hobis"


def _default_M(scheme: str, contract) -> int:
    if scheme in EXPLICIT:
        return 1000
    return 800 if contract.monitoring.is_discrete else 200


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _g(value, spec=".6g"):
    return "" if value is None else format(value, spec)


# -- commands ----------------------------------------------------------------------------

def cmd_price(args) -> int:
    contract, market, cfg = _contract(args)
    scheme = _scheme(args)
    M, L = args.mesh or (_default_M(scheme, contract), None)
    rep = price_with_scheme(contract, market, scheme, M, L, cfg, args.rho, SMax.parse(args.s_max),
                            args.lam)
    print(rep.summary())
    if args.out:
        _emit(rows_csv(("scheme", "mesh", "value", "boundary_mode", "extraction", "wall_time"),
                       [(scheme, f"{rep.mesh[0]}x{rep.mesh[1]}", f"{rep.value:.6g}", rep.boundary_mode,
                         rep.extraction, f"{rep.wall_time:.3g}")]), args.out)
    return EXIT_OK


def _ladder_meshes(args, scheme, contract, market) -> List[tuple]:
    if args.meshes:
        meshes = [parse_mesh(m) for m in args.meshes.split(",") if m.strip()]
    else:
        M, L = args.mesh or (25, None)
        if args.levels < 1:
            raise UsageError("--levels must be at least 1")
        meshes = [(M * 2 ** k, None if L is None else L * 2 ** k) for k in range(args.levels)]
    if scheme not in EXPLICIT and not contract.monitoring.is_discrete:
        meshes = [(M, default_time_steps(M, market.sigma) if L is None else L) for M, L in meshes]
    return meshes


def _order_row(values, errors, ratio) -> Optional[tuple]:
    if errors[-1] is not None:
        order = observed_order(errors, ratio)
    else:
        order = richardson_order(values, ratio)
    return None if order is None else ("order", f"{order:.3g}", "", "")


def cmd_converge(args) -> int:
    scheme = _scheme(args)
    if args.problem == "heat-kernel":
        if scheme not in _POLICIES:
            raise UsageError("the heat-kernel ladder needs a theta scheme (hobis, cn or implicit)")
        ladder = heat_kernel_ladder(_POLICIES[scheme], args.mode, args.levels)
        rows = [(r.mesh, f"{r.value:.3g}", f"{r.abs_error:.3g}", f"{r.wall_time:.3g}") for r in ladder.rows]
        if ladder.order is not None:
            rows.append(("order", f"{ladder.order:.3g}", "", ""))
        _emit(rows_csv(LADDER_HEADER, rows), args.out)
        return EXIT_OK

    contract, market, cfg = _contract(args)
    reference = args.reference if args.reference is not None else closed_form_reference(contract, market)
    meshes = _ladder_meshes(args, scheme, contract, market)
    s_max = SMax.parse(args.s_max)
    results, rows = [], []
    for M, L in meshes:
        rep = price_with_scheme(contract, market, scheme, M, L, cfg, args.rho, s_max, args.lam)
        err = None if reference is None else abs(rep.value - reference)
        results.append((rep.value, err))
        rows.append((f"{rep.mesh[0]}x{rep.mesh[1]}", f"{rep.value:.6g}", _g(err, ".3g"),
                     f"{rep.wall_time:.3g}"))
    if len(meshes) >= 2:
        n = (lambda m: m[1] or m[0]) if scheme in EXPLICIT else (lambda m: m[0])
        ratio = n(meshes[-1]) / n(meshes[-2])
        extra = _order_row(*zip(*results), ratio) if ratio > 1 else None
        if extra:
            rows.append(extra)
    _emit(rows_csv(LADDER_HEADER, rows), args.out)
    return EXIT_OK


def cmd_table(args) -> int:
    ids = [t.upper() for t in args.table_ids]
    if ids == ["ALL"]:
        ids = list(TABLE_IDS)
    unknown = [t for t in ids if t not in TABLE_IDS]
    if unknown:
        raise UsageError(f"unknown table id(s) {', '.join(unknown)}; choose from {', '.join(TABLE_IDS)}")
    results = [run_table(t, max(1, args.workers)) for t in ids]
    _emit(table_csv(results, timings=not args.no_timings), args.out)
    failed = False
    for res in results:
        checked = [c for c in res.cells if c.passed is not None]
        bad = len(res.failures)
        failed |= bad > 0
        print(f"{res.table_id}: {len(checked)} checked cells, {len(checked) - bad} pass, {bad} fail",
              file=sys.stderr)
    return EXIT_TABLE if failed else EXIT_OK


def cmd_compare(args) -> int:
    schemes = [s.strip().lower() for s in args.schemes.split(",") if s.strip()]
    if len(schemes) < 2:
        raise UsageError("compare needs at least two schemes")
    bad = [s for s in schemes if s not in SCHEMES]
    if bad:
        raise UsageError(f"unknown scheme(s) {', '.join(bad)}; choose from {', '.join(SCHEMES)}")
    contract, market, cfg = _contract(args)
    s_max = SMax.parse(args.s_max)
    reference = closed_form_reference(contract, market)
    rows = []
    for scheme in schemes:
        M, L = args.mesh or (_default_M(scheme, contract), None)
        rep = price_with_scheme(contract, market, scheme, M, L, cfg, args.rho, s_max, args.lam)
        err = None if reference is None else abs(rep.value - reference)
        max_err = None
        if scheme in ("hobis", "cn", "implicit") and reference is not None:
            max_err = error_profile(contract, market, M, L, _POLICIES[scheme], cfg).max_abs
        rows.append((scheme, f"{rep.value:.6g}", _g(err, ".3g"), _g(max_err, ".3g"),
                     f"{rep.wall_time:.3g}"))
    _emit(rows_csv(COMPARE_HEADER, rows), args.out)
    return EXIT_OK


_COMMANDS = {"price": cmd_price, "converge": cmd_converge, "table": cmd_table, "compare": cmd_compare}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        parser.print_usage(sys.stderr)
        print(f"barrierfd: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValidationError, DomainError, GeometryError) as exc:
        print(f"barrierfd: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except NumericalError as exc:
        print(f"barrierfd: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"barrierfd: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
