"""Command line entry point: ``corruptlab <experiment> [options]``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import RUNNERS
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config

_OPTIONS = (
    ("--domain-size", int), ("--eta", float), ("--epsilon", float), ("--n", int), ("--m", int),
    ("--k-max", int), ("--trials", int), ("--seed", int),
)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corruptlab", description="Run an adaptive-vs-oblivious corruption experiment.")
    sub = p.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        s = sub.add_parser(name)
        for flag, typ in _OPTIONS:
            s.add_argument(flag, type=typ)
        s.add_argument("--config", help="key = value file; command line flags override it")
        s.add_argument("--out", help="write the JSON report here and the event log to OUT.log")
        s.add_argument("--quiet", action="store_true", help="suppress the summary")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {flag.lstrip("-").replace("-", "_"): getattr(args, flag.lstrip("-").replace("-", "_"))
                 for flag, _ in _OPTIONS}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    try:
        if args.config:
            cfg = load_config(args.config, **overrides)
            if cfg.experiment != args.experiment:
                raise ConfigError(f"config is for {cfg.experiment!r}, not {args.experiment!r}")
        else:
            cfg = ExperimentConfig(args.experiment, **overrides)
        cfg.resolved()
    except ConfigError as exc:
        print(f"corruptlab: {exc}", file=sys.stderr)
        return 2
    report = RUNNERS[args.experiment](cfg)
    if args.out:
        Path(args.out).write_text(report.to_json())
        Path(args.out + ".log").write_text(report.event_log())
    else:
        sys.stdout.write(report.to_json())
    if not args.quiet:
        print(report.summary(), file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
