"""Command-line driver.

Exit codes: 0 on success, 1 for errors in the input or the command line,
2 when a budget is exhausted or an internal invariant fails.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import __version__, cellflow, interp
from .diagnostics import Diagnostic, TamgramError
from .pipeline import analyse, compile_system, load_system
from .translate import Style


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


STYLES = [s.value for s in Style]


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="root .tg file")
    p.add_argument("-I", "--include", action="append", default=[], metavar="DIR",
                   help="module search directory (repeatable, searched before the input's directory)")
    p.add_argument("--budget", type=int, default=cellflow.DEFAULT_BUDGET,
                   help="trace budget for cell analysis")
    p.add_argument("--warnings", action="store_true", help="print warnings to stderr")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tamgram", description="Tamgram compiler and analysis toolkit")
    ap.add_argument("--version", action="version", version=f"tamgram {__version__}")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("compile", help="compile to a Tamarin theory")
    _common(p)
    p.add_argument("-o", "--output", help="output .spthy file (default: stdout)")
    p.add_argument("--style", choices=STYLES, default="hybrid")
    p.add_argument("--theory-name", help="theory name (default: module name)")
    p.add_argument("--builtins", default="", help="comma-separated Tamarin builtins")
    p.add_argument("--fuse-skips", action="store_true", help="remove empty rules from the graph")
    p.add_argument("--emit-contexts", metavar="FILE", help="also write the context table")

    p = sub.add_parser("check", help="parse, bind and check cell validity")
    _common(p)

    p = sub.add_parser("cfg", help="print the control-flow graph as DOT")
    _common(p)
    p.add_argument("-o", "--output")
    p.add_argument("--fuse-skips", action="store_true")

    p = sub.add_parser("contexts", help="print the maximal context table")
    _common(p)
    p.add_argument("-o", "--output")
    p.add_argument("--fuse-skips", action="store_true")

    p = sub.add_parser("equiv", help="bounded trace correspondence check")
    _common(p)
    p.add_argument("--style", choices=["forward", "backward", "hybrid", "cell-by-cell", "all"],
                   default="all")
    p.add_argument("--max-steps", type=int, default=5, help="Tamgram trace depth")
    p.add_argument("--universe-consts", help="comma-separated public constants")
    p.add_argument("--max-fresh", type=int, default=2)
    p.add_argument("--state-budget", type=int, default=interp.DEFAULT_BUDGET)
    return ap


def _write(text: str, output: Optional[str], out) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        out.write(text)


def _warn(args, warnings, err) -> None:
    if getattr(args, "warnings", False):
        for w in warnings:
            err.write(w.render() + "\n")


def run(argv, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except UsageError as e:
        err.write(f"{e}\n")
        return 1
    except SystemExit as e:  # --help / --version
        return int(e.code or 0)
    if not args.command:
        err.write(ap.format_usage())
        return 1
    path = Path(args.input)
    if path.suffix != ".tg" or not path.is_file():
        err.write(Diagnostic(f"input must be an existing .tg file: {args.input}").render() + "\n")
        return 1
    try:
        flat = load_system(path, args.include)
        if args.command == "compile":
            builtins = [b.strip() for b in args.builtins.split(",") if b.strip()]
            res = compile_system(flat, args.style, args.theory_name, builtins,
                                 args.fuse_skips, args.budget)
            _write(res.text, args.output, out)
            if args.emit_contexts:
                Path(args.emit_contexts).write_text(res.table.dump(), encoding="utf-8")
            _warn(args, res.warnings, err)
        elif args.command == "check":
            g, _table = analyse(flat, budget=args.budget)
            _warn(args, list(flat.warnings) + list(g.warnings), err)
        elif args.command == "cfg":
            from .cfg import system_cfg, to_dot

            g = system_cfg(flat, fuse_skips=args.fuse_skips)
            _write(to_dot(g), args.output, out)
            _warn(args, g.warnings, err)
        elif args.command == "contexts":
            g, table = analyse(flat, args.fuse_skips, args.budget)
            _write(table.dump(), args.output, out)
            _warn(args, g.warnings, err)
        elif args.command == "equiv":
            return _equiv(args, flat, out, err)
    except TamgramError as e:
        err.write(e.render() + "\n")
        return e.exit_code
    except RecursionError:
        err.write(Diagnostic("internal error: nesting too deep").render() + "\n")
        return 2
    return 0


def _equiv(args, flat, out, err) -> int:
    g, table = analyse(flat, budget=args.budget)
    if args.universe_consts:
        u = interp.Universe(tuple(c.strip() for c in args.universe_consts.split(",") if c.strip()),
                            args.max_fresh)
    else:
        u = interp.default_universe(g, max_fresh=args.max_fresh)
    styles = ["forward", "backward", "hybrid"] if args.style == "all" else [args.style]
    status = 0
    for st in styles:
        if st == "cell-by-cell":
            res = interp.check_observational(g, args.max_steps, u, budget=args.state_budget)
        else:
            res = interp.check_correspondence(g, st, args.max_steps, u, table=table,
                                              budget=args.state_budget)
        if res.ok:
            out.write(f"{st}: ok (explored {res.explored}, depth {args.max_steps}, "
                      f"universe {', '.join(u.consts)})\n")
        else:
            out.write(f"{st}: FAILED\n")
            err.write(Diagnostic(res.counterexample.show()).render() + "\n")
            status = 1
    return status


def main(argv=None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
