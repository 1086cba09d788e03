"""Command line front end.

slugsim run <config.toml> [--workers N] [--output DIR] [--seed S]
slugsim validate <config.toml>

Exit codes: 0 success, 2 config problem, 3 I/O problem, 1 anything else.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import load_config
from .errors import ConfigError, ParameterDomainError, SlugSimError
from .runner import run

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slugsim",
        description="SLUG microwave amplifier simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config")
    p_run.add_argument("config", help="path to a TOML run config")
    p_run.add_argument("--workers", type=int, default=None,
                       help="override worker count")
    p_run.add_argument("--output", default=None,
                       help="override the output directory")
    p_run.add_argument("--seed", type=int, default=None,
                       help="override the base RNG seed")

    p_val = sub.add_parser("validate",
                           help="parse and check a config, run nothing")
    p_val.add_argument("config", help="path to a TOML run config")
    return parser


def _apply_overrides(config, args):
    if args.seed is not None:
        config = dataclasses.replace(
            config, sim=dataclasses.replace(config.sim, seed=args.seed))
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        config = dataclasses.replace(config, workers=args.workers)
    return config


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
        if args.command == "validate":
            print(f"ok: {args.config} ({config.experiment})")
            return EXIT_OK
        config = _apply_overrides(config, args)
        manifest = run(config, output_dir=args.output)
    except (ConfigError, ParameterDomainError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except SlugSimError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    print(f"{config.experiment}: {manifest.points_ok} ok, "
          f"{manifest.points_masked} masked, "
          f"{manifest.wall_time_s:.1f}s wall")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
