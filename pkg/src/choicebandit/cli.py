"""Command-line entry point.

    choicebandit run --config exp.json [--seed N] [--threads K] [--fast] [--out DIR] [--format F]
    choicebandit presets list
    choicebandit presets run NAME [same options as run]
    choicebandit verify

Exit codes: 0 success, 2 config error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from .harness import FAST_REPLICATIONS, ConfigError, check_bounds, config_from_json, run_experiment
from .presets import get_preset, preset_experiments
from .report import write_outputs

EXIT_OK, EXIT_CONFIG, EXIT_VERIFY = 0, 2, 3


def _add_run_options(p: argparse.ArgumentParser):
    p.add_argument("--seed", type=int, help="master seed (overrides the config)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads; output does not depend on this")
    p.add_argument("--fast", action="store_true",
                   help=f"cap replications at {FAST_REPLICATIONS}")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--format", choices=("csv", "svg", "both"), help="output formats")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="choicebandit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment from a JSON config")
    run.add_argument("--config", required=True)
    _add_run_options(run)

    presets = sub.add_parser("presets", help="list or run the built-in experiments")
    psub = presets.add_subparsers(dest="action", required=True)
    psub.add_parser("list")
    prun = psub.add_parser("run")
    prun.add_argument("name")
    _add_run_options(prun)

    verify = sub.add_parser("verify", help="run the invariant and bound checks")
    verify.add_argument("--seed", type=int, default=0)
    return parser


def _execute(config, args) -> int:
    formats = None
    if args.format:
        formats = ("csv", "svg") if args.format == "both" else (args.format,)
    replications = min(config.replications, FAST_REPLICATIONS) if args.fast else None
    config = config.with_overrides(seed=args.seed, output_dir=args.out, formats=formats,
                                   replications=replications)
    start = time.perf_counter()
    result = run_experiment(config, threads=max(1, args.threads))
    paths = write_outputs(result, config.output_dir, config.formats)
    print(f"{config.name}: B={config.replications} T={config.steps} "
          f"in {time.perf_counter() - start:.1f}s")
    for name, summary in result.summary().items():
        print(f"  {name:<12} total avg reward {summary['total_average_reward']:.4f}  "
              f"final pct optimal {summary['final_pct_optimal']:.4f}")
    status = EXIT_OK
    for check in check_bounds(config, result):
        flag = "ok" if check.passed else "VIOLATED"
        print(f"  bound {check.variant}: regret {check.measured:.2f} <= {check.bound:.2f} {flag}")
        if not check.passed:
            status = EXIT_VERIFY
    for path in paths:
        print(f"  wrote {path}")
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _execute(config_from_json(args.config), args)
        if args.command == "presets":
            if args.action == "list":
                for config in preset_experiments():
                    print(f"{config.name:<32} {config.description}")
                return EXIT_OK
            try:
                config = get_preset(args.name)
            except KeyError:
                raise ConfigError(f"unknown preset {args.name!r}; see 'choicebandit presets list'")
            return _execute(config, args)
        from .verify import run_checks
        results = run_checks(args.seed)
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.detail}")
        return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
