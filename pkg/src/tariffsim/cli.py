"""Command-line interface: validate data, run a scenario, compare two.

Exit codes: 0 success, 1 model or validation findings, 2 usage, I/O or
schema errors. Logs go to stderr; data and tables go to files or stdout,
so output is pipeline-safe.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import report
from .engine import run_simulation
from .errors import DegenerateWeights, TariffSimError
from .ingest import (
    Dataset,
    aggregate_lines,
    as_trade_lines,
    parse_groups,
    parse_trade_records,
    validate_dataset,
)
from .scenario import parse_scenario

log = logging.getLogger("tariffsim")

JOBS_ENV_VAR = "TARIFFSIM_JOBS"
_EXTENSIONS = {"csv": "csv", "json": "json", "md": "md"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tariffsim",
        description="Partial-equilibrium tariff reform simulator",
    )
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", required=True, help="trade data CSV")
    common.add_argument("--groups", default=None, help="country groups CSV (group_name,member)")

    p_validate = sub.add_parser("validate", parents=[common], help="check a data file")
    p_validate.set_defaults(func=cmd_validate)

    run_common = argparse.ArgumentParser(add_help=False)
    run_common.add_argument("--out", required=True, help="output directory for report files")
    run_common.add_argument(
        "--format",
        dest="formats",
        action="append",
        choices=sorted(report.FORMATS),
        help="report format; repeatable (default: all)",
    )
    run_common.add_argument(
        "--paper-rounding",
        action="store_true",
        help="render shares at zero decimals",
    )
    run_common.add_argument(
        "--jobs",
        type=int,
        default=None,
        help=f"worker threads for product processing (or ${JOBS_ENV_VAR})",
    )
    run_common.add_argument("--top-n", type=int, default=10, help="partners shown before folding")
    run_common.add_argument(
        "--currency-label", default="value", help="display label for value columns"
    )

    p_run = sub.add_parser("run", parents=[common, run_common], help="simulate one scenario")
    p_run.add_argument(
        "--scenario", dest="scenarios", action="append", required=True, help="scenario JSON"
    )
    p_run.set_defaults(func=cmd_run, n_scenarios=1)

    p_compare = sub.add_parser("compare", parents=[common, run_common], help="compare two scenarios")
    p_compare.add_argument(
        "--scenario",
        dest="scenarios",
        action="append",
        required=True,
        help="scenario JSON (give twice)",
    )
    p_compare.set_defaults(func=cmd_compare, n_scenarios=2)

    return parser


def resolve_jobs(value: int | None, environ: dict[str, str] | os._Environ = os.environ) -> int:
    """Job count from the flag, else the environment, else 1."""
    if value is None:
        raw = environ.get(JOBS_ENV_VAR, "").strip()
        value = int(raw) if raw else 1
    if value < 1:
        raise ValueError(f"jobs must be >= 1, got {value}")
    return value


def _load_dataset(args: argparse.Namespace, merge: bool = True) -> Dataset:
    records = parse_trade_records(Path(args.data).read_bytes())
    lines = aggregate_lines(records) if merge else as_trade_lines(records)
    groups = ()
    if args.groups:
        groups = tuple(parse_groups(Path(args.groups).read_bytes()))
    label = getattr(args, "currency_label", "value")
    return Dataset(lines=tuple(lines), groups=groups, currency_label=label)


def cmd_validate(args: argparse.Namespace) -> int:
    dataset = _load_dataset(args, merge=False)
    result = validate_dataset(dataset)
    print(result)
    return 0 if result.ok else 1


def _write_reports(out_dir: Path, named_tables: dict[str, object], formats: list[str], paper: bool) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for fmt in formats:
        ext = _EXTENSIONS[fmt]
        for stem, table in named_tables.items():
            path = out_dir / f"{stem}.{ext}"
            path.write_bytes(report.render(table, fmt, paper_rounding=paper))
            log.info("wrote %s", path)


def cmd_run(args: argparse.Namespace) -> int:
    scenario = parse_scenario(Path(args.scenarios[0]).read_bytes())
    dataset = _load_dataset(args)
    findings = validate_dataset(dataset)
    if not findings.ok:
        print(findings, file=sys.stderr)
        return 1
    result = run_simulation(dataset, scenario, jobs=resolve_jobs(args.jobs))
    summary = report.scenario_summary(result)
    tables = {
        "partners": report.partner_shares(dataset, top_n=args.top_n),
        "bands": report.revenue_by_band(result),
        "summary": summary,
    }
    formats = args.formats or list(report.FORMATS)
    _write_reports(Path(args.out), tables, formats, args.paper_rounding)
    sys.stdout.write(report.render(summary, "md").decode("utf-8"))
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    scenarios = [parse_scenario(Path(p).read_bytes()) for p in args.scenarios]
    dataset = _load_dataset(args)
    findings = validate_dataset(dataset)
    if not findings.ok:
        print(findings, file=sys.stderr)
        return 1
    jobs = resolve_jobs(args.jobs)
    summaries = [
        report.scenario_summary(run_simulation(dataset, s, jobs=jobs)) for s in scenarios
    ]
    formats = args.formats or list(report.FORMATS)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for fmt in formats:
        path = out_dir / f"compare.{_EXTENSIONS[fmt]}"
        path.write_bytes(report.render_comparison(summaries, fmt))
        log.info("wrote %s", path)
    sys.stdout.write(report.render_comparison(summaries, "md").decode("utf-8"))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors, 0 on --help
        return exc.code if isinstance(exc.code, int) else 2

    logging.basicConfig(
        stream=sys.stderr,
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(message)s",
    )

    expected = getattr(args, "n_scenarios", None)
    if expected is not None and len(args.scenarios) != expected:
        print(
            f"error: {args.command} takes exactly {expected} --scenario argument(s), "
            f"got {len(args.scenarios)}",
            file=sys.stderr,
        )
        return 2

    try:
        return args.func(args)
    except DegenerateWeights as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (TariffSimError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
