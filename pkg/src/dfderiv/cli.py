"""Command line: ``dfderiv {verify,oracle,enumerate,run,report,list} ...``.

Exit codes: 0 all tasks as expected, 1 verdict mismatch or task error,
2 usage/parse/resolve error, 3 hypothesis or declared-fact failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .errors import DerivError
from .scenario import (
    REPORT_SCHEMA_ID,
    Options,
    dumps,
    error_report,
    parse_scenario,
    render_text,
    run_scenario,
    shipped_path,
    shipped_scenarios,
)


def _scenario_path(arg: str) -> Path:
    """A file path, or the name of a shipped scenario."""
    p = Path(arg)
    if p.exists() or p.suffix == ".json" or "/" in arg:
        return p
    if arg in shipped_scenarios():
        return shipped_path(arg)
    return p


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, help="override the scenario seed (probe set, sampling, context choice)")
    p.add_argument("--probe-degree", type=int, help="maximum polynomial degree in probe sets")
    p.add_argument("--budget", type=int, help="enumeration budget (examined candidates)")
    p.add_argument("--partitions", type=int, default=1, help="worker partitions for enumerations and oracles")
    p.add_argument("--out", help="write the report here instead of stdout")
    p.add_argument("--format", choices=("json", "text"), default="json", help="report format")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dfderiv", description="Run (δ,f)-derivation scenarios and emit reports.")
    sub = ap.add_subparsers(dest="verb", required=True)
    helps = {
        "verify": "run the check/evaluate/image/structure tasks of a scenario",
        "oracle": "run the oracle and lemma-suite tasks of a scenario",
        "enumerate": "run the enumeration tasks of a scenario",
        "run": "run every task of a scenario",
    }
    for verb, h in helps.items():
        p = sub.add_parser(verb, help=h)
        p.add_argument("scenario", help="scenario file or shipped scenario name")
        _add_common(p)
    p = sub.add_parser("report", help="render a saved report, or run a scenario and render its report")
    p.add_argument("source", help="report file, scenario file, or shipped scenario name")
    _add_common(p)
    sub.add_parser("list", help="list shipped scenarios")
    return ap


def _emit(report: dict, fmt: str, out: str | None) -> None:
    text = render_text(report) if fmt == "text" else dumps(report)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and 2
    if args.verb == "list":
        for name in shipped_scenarios():
            print(name)
        return 0
    if args.partitions < 1:
        print("dfderiv: --partitions must be at least 1", file=sys.stderr)
        return 2
    target = args.source if args.verb == "report" else args.scenario
    path = _scenario_path(target)
    if args.verb == "report" and path.exists():
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            print(f"dfderiv: {path}: {e}", file=sys.stderr)
            return 2
        if isinstance(doc, dict) and doc.get("schema") == REPORT_SCHEMA_ID:
            _emit(doc, args.format, args.out)
            return int(doc["summary"]["exit_code"])
    verb = "run" if args.verb == "report" else args.verb
    opts = Options(seed=args.seed, probe_degree=args.probe_degree, budget=args.budget,
                   partitions=args.partitions, verb=verb)
    try:
        sc = parse_scenario(path, opts)
    except DerivError as e:
        rep = error_report(path.stem, e, verb)
        print(f"dfderiv: {type(e).__name__}: {e}", file=sys.stderr)
        _emit(rep, args.format, args.out)
        return rep["summary"]["exit_code"]
    report = run_scenario(sc, opts)
    _emit(report, args.format, args.out)
    return report["summary"]["exit_code"]


if __name__ == "__main__":
    sys.exit(main())
