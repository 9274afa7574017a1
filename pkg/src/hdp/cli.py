"""``hdp`` command line: run one experiment and write its report.

Exit codes: 0 success, 1 a verdict failed or the run raised, 2 I/O error,
3 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import experiments
from .experiments import SCHEMAS, ConfigError, ExperimentConfig

EXIT_OK, EXIT_FAIL, EXIT_IO, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hdp", description="Seeded high-dimensional probability experiments.")
    sub = parser.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    for name, schema in SCHEMAS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--threads", type=int, help="worker threads (default: all cores; HDP_THREADS wins)")
        for key, spec in schema.items():
            p.add_argument(f"--{key}", type=spec.type, default=None, choices=spec.choices, help=spec.help or None)
    return parser


def _threads(flag) -> int:
    env = os.environ.get("HDP_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError:
            raise ConfigError("HDP_THREADS", f"not an integer: {env!r}") from None
    else:
        value = flag if flag is not None else (os.cpu_count() or 1)
    if value < 1:
        raise ConfigError("threads", "must be >= 1")
    return value


def make_config(args) -> ExperimentConfig:
    doc: dict = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        if doc.get("experiment", args.experiment) != args.experiment:
            raise ConfigError("experiment", f"config is for {doc['experiment']!r}, not {args.experiment!r}")
    params = dict(doc.get("parameters", {}))
    for key in SCHEMAS[args.experiment]:
        value = getattr(args, key)
        if value is not None:
            params[key] = value
    return ExperimentConfig(
        experiment=args.experiment,
        parameters=params,
        seed=args.seed if args.seed is not None else doc.get("seed", 0),
        trials=args.trials if args.trials is not None else doc.get("trials", 10),
        output_path=args.out if args.out is not None else doc.get("output_path"),
        threads=_threads(args.threads),
    )


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"hdp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        config = make_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"hdp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, json.JSONDecodeError) as exc:
        print(f"hdp: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        record = experiments.run(config)
    except ConfigError as exc:
        print(f"hdp: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if config.output_path:
            experiments.emit(record, config.output_path, args.format)
        else:
            text = experiments.to_csv(record) if args.format == "csv" else experiments.to_json(record)
            sys.stdout.write(text if text.endswith("\n") else text + "\n")
    except OSError as exc:
        print(f"hdp: cannot write report: {exc}", file=sys.stderr)
        return EXIT_IO
    if record.error:
        print(f"hdp: run failed: {record.error}", file=sys.stderr)
        return EXIT_FAIL
    for name, ok in record.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}", file=sys.stderr)
    return EXIT_OK if record.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
