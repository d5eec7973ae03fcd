"""Command line client: run / bounds / phaserand / selftest / serve.

The CLI is a thin layer over the same service functions the HTTP app exposes;
it adds file handling (experiment configs in, JSON-lines transcripts and a
CSV summary out) and the exit-code contract: 0 success, 1 selftest failure,
2 validation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .experiment import bounds_table, build_plan, execute, phaserand_table, write_outputs
from .models import ExperimentModel
from .selftest import run_selftest

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_VALIDATION = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="veriphoton",
        description="Coherent-light verification protocol simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute an experiment file")
    run.add_argument("--config", required=True, help="experiment JSON file")
    run.add_argument("--seed", type=int, help="override the config seed")
    run.add_argument("--trials", type=int, help="override the config trial count")
    run.add_argument("--out", help="override the output directory")
    run.add_argument("--format", choices=("csv", "jsonl"), default="csv",
                     help="summary format (transcripts are always JSON-lines)")

    bounds = sub.add_parser("bounds", help="print the analytic parameter table")
    bounds.add_argument("--n", type=int, required=True, help="number of repetitions N")
    bounds.add_argument("--f", type=float, required=True, help="gap polynomial value")
    bounds.add_argument("--m", type=int, help="pulses per repetition (default: recommended)")
    bounds.add_argument("--alpha", type=float, help="pulse amplitude (default: 1)")
    bounds.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    pr = sub.add_parser("phaserand", help="discrete phase randomization sizing table")
    pr.add_argument("--m", type=int, required=True)
    pr.add_argument("--n", type=int, required=True)
    pr.add_argument("--f", type=float, required=True)
    pr.add_argument("--format", choices=("csv", "jsonl"), default="csv")

    st = sub.add_parser("selftest", help="run the oracle-equivalence suites")
    st.add_argument("--check", action="append", help="run only the named check (repeatable)")

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    return parser


def _print_table(record: dict, fmt: str) -> None:
    if fmt == "jsonl":
        print(json.dumps(record, sort_keys=True, separators=(",", ":")))
        return
    cols = list(record)
    print(",".join(cols))
    print(",".join(_cell(record[c]) for c in cols))


def _cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.12g}"
    return "" if value is None else str(value)


def _cmd_run(args) -> int:
    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except json.JSONDecodeError as exc:
        print(f"error: config is not valid JSON: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    if not isinstance(doc, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return EXIT_VALIDATION
    if args.seed is not None:
        doc["seed"] = args.seed
    if args.trials is not None:
        doc["trials"] = args.trials
    if args.out is not None:
        doc.setdefault("output", {})["directory"] = args.out
    try:
        model = ExperimentModel.model_validate(doc)
        plan = build_plan(model, base_dir=Path(args.config).parent)
    except (ValidationError, ValueError, FileNotFoundError) as exc:
        print(f"error: invalid experiment config: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    result, records = execute(plan)
    try:
        paths = write_outputs(result, records, model, fmt=args.format)
    except OSError as exc:
        print(f"error: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    _print_table(result.model_dump(), args.format)
    print(f"wrote {paths['summary']} and {paths['transcripts']}", file=sys.stderr)
    return EXIT_OK


def _cmd_bounds(args) -> int:
    try:
        table = bounds_table(args.n, args.f, args.m, args.alpha)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _print_table(table.model_dump(), args.format)
    return EXIT_OK


def _cmd_phaserand(args) -> int:
    try:
        row = phaserand_table(args.m, args.n, args.f)
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    _print_table(row.model_dump(), args.format)
    return EXIT_OK


def _cmd_selftest(args) -> int:
    try:
        result = run_selftest(args.check)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    for check in result.checks:
        status = "pass" if check.passed else "FAIL"
        line = f"{status}  {check.name}"
        if check.detail:
            line += f"  ({check.detail})"
        print(line)
    if not result.passed:
        print(f"selftest failed: {result.first_failure}", file=sys.stderr)
        return EXIT_SELFTEST_FAILED
    print("selftest passed")
    return EXIT_OK


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import app

    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "bounds": _cmd_bounds,
        "phaserand": _cmd_phaserand,
        "selftest": _cmd_selftest,
        "serve": _cmd_serve,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
