"""Command-line entry point: ``ivref check | laws | eval``.

Exit codes: 0 everything passed (or the evaluated predicate is true),
1 some check failed (or the predicate is false), 2 bad input (parse or
resolution error, unknown name or law), 3 the enumeration budget was
refused.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Optional, Sequence

from . import __version__
from . import dsl
from . import intv_pred as ip
from . import laws as lw
from .state import DEFAULT_BUDGET, BudgetExceeded, Stream, StreamSet, format_value
from .time_core import EMPTY, Interval, is_infinite, parse_interval

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3
REPORT_VERSION = 1


class InputError(Exception):
    pass


def _global_flags(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--json", action="store_true", default=d(False), help="machine-readable report on stdout")
    p.add_argument("--jobs", type=int, default=d(1), metavar="N", help="worker processes")
    p.add_argument("--budget", type=int, default=d(None), metavar="N",
                   help="streams per universe for check/eval, instances per law for laws")
    p.add_argument("--horizon", type=int, default=d(None), metavar="H", help="override the carrier horizon")
    p.add_argument("--timing", action="store_true", default=d(False), help="include runtimes in reports")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ivref", description="Interval-predicate refinement checker.")
    parser.add_argument("--version", action="version", version=f"ivref {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the check directives of a .ivdl file")
    p.add_argument("file")
    _global_flags(p, suppress=True)

    p = sub.add_parser("laws", help="run the executable law catalog")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--depth", type=int, default=None, help="cap on generated term depth (at most 4)")
    p.add_argument("--law", action="append", default=None, metavar="ID", help="run only this law (repeatable)")
    p.add_argument("--list", action="store_true", help="list law ids and exit")
    _global_flags(p, suppress=True)

    p = sub.add_parser("eval", help="evaluate a named predicate on one stream and interval")
    p.add_argument("file")
    p.add_argument("--pred", required=True, metavar="NAME", help="predicate name or System.process")
    p.add_argument("--interval", default=None, metavar="a..b", help="'empty' or 'a..b' (default: whole carrier)")
    p.add_argument("--stream", default="0", metavar="IDX|LITERAL",
                   help="enumeration index, or a literal such as 'u=0,1,1 v=0,0,1'")
    p.add_argument("--trace", action="store_true", help="show the chop splits or fixpoint table")
    _global_flags(p, suppress=True)
    return parser


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


# -- check ------------------------------------------------------------------------------


def cmd_check(args) -> int:
    model = dsl.load(args.file).with_horizon(args.horizon)
    if model.carrier.horizon < 2:
        print(f"warning: horizon {model.carrier.horizon} leaves no room for nonempty chop splits", file=sys.stderr)
    budget = args.budget if args.budget is not None else DEFAULT_BUDGET
    results = []
    for d in model.spec.directives:
        results.extend(dsl.execute(model, d, budget, args.jobs))
    failed = [r for r in results if not r.verdict.passed]
    if args.json:
        _emit(
            {
                "version": REPORT_VERSION,
                "file": os.path.basename(args.file),
                "directives": [r.to_json(args.timing) for r in results],
            }
        )
    else:
        for r in results:
            line = f"{'PASS' if r.verdict.passed else 'FAIL'}  {r.name}"
            if args.timing:
                line += f"  ({r.seconds:.2f}s)"
            print(line)
            if r.verdict.counterexample is not None:
                print("    " + r.verdict.counterexample.describe().replace("\n", "\n    "))
        print(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    return EXIT_FAIL if failed else EXIT_OK


# -- laws -------------------------------------------------------------------------------


def cmd_laws(args) -> int:
    if args.list:
        for i in lw.law_ids():
            law = lw.CATALOG[i]
            print(f"{i:28} {law.polarity:24} {law.statement}")
        return EXIT_OK
    if args.depth is not None and not 0 <= args.depth <= 4:
        raise InputError("--depth must be between 0 and 4")
    budget = args.budget if args.budget is not None else lw.DEFAULT_INSTANCES
    report = lw.run_all(budget, args.seed, args.law, args.jobs, depth=args.depth, horizon=args.horizon)
    if args.json:
        _emit({"version": REPORT_VERSION, "seed": args.seed, "budget": budget, **report.to_json(args.timing)})
    else:
        for r in report.reports:
            line = f"{r.status:12} {r.law_id:28} checked={r.checked} vacuous={r.vacuous} failures={r.failures}"
            if args.timing:
                line += f" ({r.seconds:.1f}s)"
            print(line)
            for w in r.witnesses[:1]:
                print("    " + w.replace("\n", "\n    "))
        print("ok" if report.ok else "not ok")
    return EXIT_OK if report.ok else EXIT_FAIL


# -- eval -------------------------------------------------------------------------------


def parse_stream_literal(text: str, universe, horizon: int) -> Stream:
    """``"u=0,1,1 v=0,0,1"``: one comma-separated column per variable."""
    columns = {}
    for part in text.split():
        name, _, values = part.partition("=")
        if name not in universe.names:
            raise InputError(f"stream literal names unknown variable {name!r}")
        dom = universe.domain(name)
        lookup = {format_value(v): v for v in dom}
        col = []
        for raw in values.split(","):
            if raw not in lookup:
                raise InputError(f"{raw!r} is not in the domain of {name}")
            col.append(lookup[raw])
        if len(col) != horizon:
            raise InputError(f"column {name} has {len(col)} values; the carrier has {horizon} points")
        columns[name] = col
    missing = [n for n in universe.names if n not in columns]
    if missing:
        raise InputError(f"stream literal lacks variable {missing[0]!r}")
    return Stream.from_columns(universe, columns)


def _trace(g: ip.IntvPred, delta: Interval, ev: ip.Evaluator, depth: int = 0) -> list[str]:
    pad = "  " * depth
    lines = [f"{pad}{ip.format_term(g)}  on {delta}: {str(ev(g, delta)).lower()}"]
    if isinstance(g, ip.Chop):
        for d1, d2, a, b in ev.trace_chop(g, delta):
            lines.append(f"{pad}  split {d1} | {d2}: {str(a).lower()} ; {str(b).lower()}")
        if is_infinite(delta, ev.carrier):
            lines.append(f"{pad}  infinite: left operand on whole interval {str(ev(g.left, delta)).lower()}")
    elif isinstance(g, ip.Omega):
        for d, val in ev.omega_table(g).items():
            lines.append(f"{pad}  fixpoint {d}: {str(val).lower()}")
    elif isinstance(g, (ip.And, ip.Or)):
        lines += _trace(g.left, delta, ev, depth + 1) + _trace(g.right, delta, ev, depth + 1)
    elif isinstance(g, (ip.Not, ip.NonEmpty)):
        lines += _trace(g.g, delta, ev, depth + 1)
    return lines


def cmd_eval(args) -> int:
    model = dsl.load(args.file).with_horizon(args.horizon)
    c = model.carrier
    try:
        g, u = model.predicate(args.pred)
    except KeyError:
        raise InputError(f"no predicate or process named {args.pred!r}") from None
    if args.stream.isdigit():
        budget = args.budget if args.budget is not None else DEFAULT_BUDGET
        ss = StreamSet.all(u, c, budget)
        idx = int(args.stream)
        if idx >= len(ss):
            raise InputError(f"stream index {idx} out of range (0..{len(ss) - 1})")
        s = ss.stream(idx)
    else:
        s = parse_stream_literal(args.stream, u, c.horizon)
    if args.interval is None:
        delta = Interval(0, c.horizon - 1) if c.horizon else EMPTY
    else:
        delta = parse_interval(args.interval)
        if not delta.is_empty and delta.hi >= c.horizon:
            raise InputError(f"interval {delta} lies outside the carrier")
    ev = ip.Evaluator(s, c)
    value = ev(g, delta)
    if args.json:
        _emit(
            {
                "version": REPORT_VERSION,
                "pred": args.pred,
                "term": ip.format_term(g),
                "interval": delta.to_json(),
                "stream": s.to_json(),
                "value": value,
            }
        )
    else:
        print(f"{args.pred} = {ip.format_term(g)}")
        print(f"stream: {s}")
        print(f"{delta}: {str(value).lower()}")
        if args.trace:
            print("\n".join(_trace(g, delta, ev)))
    return EXIT_OK if value else EXIT_FAIL


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {"check": cmd_check, "laws": cmd_laws, "eval": cmd_eval}[args.command]
    try:
        return handler(args)
    except dsl.DslError as e:
        print(str(e), file=sys.stderr)
        if e.expected:
            print("  expected: " + ", ".join(e.expected), file=sys.stderr)
        return EXIT_INPUT
    except lw.UnknownLaw as e:
        print(f"error: unknown law {e.args[0]!r}; try 'ivref laws --list'", file=sys.stderr)
        return EXIT_INPUT
    except (InputError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except BudgetExceeded as e:
        print(f"budget refused: {e}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
