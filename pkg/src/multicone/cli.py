"""Command-line workbench.

    multicone classify    --config job.json [--json out.json] [--csv out.csv]
    multicone pressure    --config job.json --depth 12 --s 1.0
    multicone equilibrium --config job.json --cylinder-depth 6
    multicone multicone   --config job.json
    multicone example1    [--json out.json]

Exit codes: 0 success, 1 internal error, 2 an inconclusive verdict is
present, 3 config parse or precondition failure, 4 an enumeration cap was
exceeded. Flags --json/--csv write machine-readable reports whose bytes
depend only on the config and seed; --plot DIR also renders figures.
"""

from __future__ import annotations

import argparse
import sys

from .config import JobConfig, ParseError, load_config, validate
from .report import (run_classify, run_equilibrium, run_example1,
                     run_multicone, run_pressure, write_csv)
from .semigroup import CapExceeded, SingularMatrix
from .thermo import PreconditionFailed

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2
EXIT_PARSE = 3
EXIT_CAP = 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="multicone",
        description="Domination, pressure and equilibrium-state analysis "
                    "of finite tuples of invertible 2x2 matrices.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_text, needs_config=True):
        sp = sub.add_parser(name, help=help_text)
        if needs_config:
            sp.add_argument("--config", required=True,
                            help="JSON job file with a 'matrices' list "
                                 "(row-major 4-number arrays)")
        sp.add_argument("--depth", type=int, default=None,
                        help="enumeration depth for kappa/pressure tables")
        sp.add_argument("--cylinder-depth", type=int, default=None,
                        help="word length of the cylinder measures")
        sp.add_argument("--s", type=float, default=None,
                        help="singular-value exponent (default 1.0)")
        sp.add_argument("--seed", type=int, default=None,
                        help="seed for randomized probes")
        sp.add_argument("--json", metavar="PATH",
                        help="write the report as JSON")
        sp.add_argument("--csv", metavar="PATH",
                        help="write the report's table as CSV")
        sp.add_argument("--plot", metavar="DIR",
                        help="render figures into this directory")
        sp.add_argument("--quiet", action="store_true",
                        help="suppress the text report on stdout")
        return sp

    add("classify", "run the full classification pipeline")
    add("pressure", "kappa table and sub-additive pressure brackets")
    add("equilibrium", "construct the equilibrium cylinder measure")
    add("multicone", "decide domination and search for invariant multicones")
    add("example1", "the three demonstration tuples and their classes",
        needs_config=False)
    return p


def _apply_overrides(cfg: JobConfig, args) -> JobConfig:
    kw = {}
    if args.depth is not None:
        kw["enum_depth"] = args.depth
    if args.cylinder_depth is not None:
        kw["cylinder_depth"] = args.cylinder_depth
    if args.s is not None:
        kw["s"] = args.s
    if args.seed is not None:
        kw["seed"] = args.seed
    if kw:
        # re-run the range checks on the overridden values
        cfg = validate({**cfg.to_dict(), **kw})
    return cfg


def _emit(report, args) -> None:
    if not args.quiet:
        sys.stdout.write(report.to_text())
    if args.json:
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(report.to_json())
    if args.csv:
        write_csv(args.csv, report.csv_rows())
    if args.plot:
        from .plots import render_report_plots
        for path in render_report_plots(report, args.plot):
            if not args.quiet:
                sys.stdout.write(f"wrote {path}\n")


def _inconclusive(report) -> bool:
    c = getattr(report, "classification", None)
    if c is not None and c.flagged:
        return True
    dom = getattr(report, "domination", None)
    if dom is not None and dom.verdict.value == "inconclusive":
        return True
    return False


def _run_single(args) -> int:
    cfg = _apply_overrides(load_config(args.config), args)
    runner = {"classify": run_classify, "pressure": run_pressure,
              "equilibrium": run_equilibrium,
              "multicone": run_multicone}[args.command]
    report = runner(cfg)
    _emit(report, args)
    return EXIT_INCONCLUSIVE if _inconclusive(report) else EXIT_OK


def _run_example1(args) -> int:
    import json as _json

    reports, expected, ok = run_example1()
    out = []
    for rep, want in zip(reports, expected):
        got = rep.classification.name
        if not args.quiet:
            sys.stdout.write(rep.to_text())
            sys.stdout.write(f"expected {want}, got {got}: "
                             f"{'ok' if got == want else 'MISMATCH'}\n\n")
        out.append({"expected": want, "got": got,
                    "report": rep.to_json_dict()})
    if not args.quiet:
        sys.stdout.write(f"example1: {'ok' if ok else 'MISMATCH'}\n")
    if args.json:
        payload = {"kind": "example1", "ok": ok, "cases": out}
        with open(args.json, "w", encoding="utf-8") as fh:
            fh.write(_json.dumps(payload, sort_keys=True, indent=2) + "\n")
    if args.csv:
        rows = [("case", "expected", "got")]
        rows += [(i + 1, c["expected"], c["got"]) for i, c in enumerate(out)]
        write_csv(args.csv, rows)
    if args.plot:
        import os

        from .plots import render_report_plots
        for i, rep in enumerate(reports, start=1):
            render_report_plots(rep, os.path.join(args.plot, f"case{i}"))
    return EXIT_OK if ok else EXIT_ERROR


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "example1":
            return _run_example1(args)
        return _run_single(args)
    except (ParseError, SingularMatrix, PreconditionFailed) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_PARSE
    except CapExceeded as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
