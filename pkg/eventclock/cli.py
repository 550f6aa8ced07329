"""
Command-line entry point: run, sweep, verify, oracle-check, schema, serve.
"""

import argparse
import json
import logging
import sys

from .errors import ContractError, EventClockError, PropertyViolation
from .event_statistics import uncertainty_report
from .exporter import ReportExporter
from .oracle import oracle_check
from .scenario import build_finite_dim, load_scenario, run_scenario, sweep_scenario
from .schema import report_json_schema
from .verification import run_property_suite


def _emit_error(kind: str, field: str | None, message: str):
    sys.stderr.write(json.dumps({"error": kind, "field": field, "message": message}) + "\n")


def cmd_run(args) -> int:
    config, raw = load_scenario(args.path)
    result = run_scenario(config)
    exporter = ReportExporter()
    paths = exporter.write_report(args.out, result, raw, config.tolerances)
    print(json.dumps({name: str(p) for name, p in paths.items()}, sort_keys=True))
    return 0


def cmd_sweep(args) -> int:
    config, raw = load_scenario(args.path)
    result = sweep_scenario(config, jobs=args.jobs)
    exporter = ReportExporter()
    paths = exporter.write_sweep(args.out, result, raw, config.tolerances)
    print(json.dumps({name: str(p) for name, p in paths.items()}, sort_keys=True))
    return 0


def cmd_verify(args) -> int:
    result = run_property_suite(seed=args.seed, trials=args.trials, d=args.d, jobs=args.jobs)
    print(json.dumps(result.to_dict(), sort_keys=True, indent=2))
    if result.violations:
        raise PropertyViolation(
            f"{len(result.violations)} property violation(s); first: {result.violations[0]}"
        )
    return 0


def cmd_oracle_check(args) -> int:
    config, _ = load_scenario(args.path)
    if config.kind != "finite_dim":
        raise ContractError("oracle-check applies to finite_dim scenarios only")
    history, ev = build_finite_dim(config)
    report = uncertainty_report(history, ev, config.tolerances)
    reference = oracle_check(history, ev, report, config.tolerances)
    print(json.dumps({"scenario": config.name, "fields_checked": sorted(reference), "status": "ok"},
                     sort_keys=True))
    return 0


def cmd_schema(args) -> int:
    print(json.dumps(report_json_schema(), sort_keys=True, indent=2))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .app import create_app, settings

    host, port = settings()
    uvicorn.run(create_app(), host=args.host or host, port=args.port or port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventclock",
        description="Conditional time and energy of quantum events on a finite clock.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate one scenario file")
    p.add_argument("path")
    p.add_argument("--out", default="out")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="evaluate a scenario's sweep block")
    p.add_argument("path")
    p.add_argument("--out", default="out")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="randomized property suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--d", type=int, default=512, help="clock dimension")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle-check", help="compare a small scenario with the dense oracle")
    p.add_argument("path")
    p.set_defaults(func=cmd_oracle_check)

    p = sub.add_parser("schema", help="print the report JSON schema")
    p.set_defaults(func=cmd_schema)

    p = sub.add_parser("serve", help="start the HTTP batch surface")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except EventClockError as e:
        _emit_error(e.kind, getattr(e, "field", None), getattr(e, "message", None) or str(e))
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
