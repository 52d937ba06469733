"""Command-line entry point.

Usage::

    erspin-sim <experiment> [--config FILE] [--set key=value ...]
               [--out DIR] [--seed N]

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bloch import ConvergenceError
from .config import ConfigError
from .experiments import EXPERIMENT_NAMES, build_config, run
from .fitting import FitError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _parse_args(argv):
    parser = argparse.ArgumentParser(
        prog="erspin-sim",
        description="Simulate erbium spin-ensemble initialization, control and readout experiments.",
    )
    parser.add_argument("experiment", help=f"one of: {', '.join(EXPERIMENT_NAMES)}")
    parser.add_argument("--config", type=Path, default=None, help="flat key = value config file")
    parser.add_argument(
        "--set",
        dest="sets",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config key (repeatable)",
    )
    parser.add_argument("--out", type=Path, default=Path("."), help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="seed for monte-carlo quadrature")
    return parser.parse_args(argv)


def main(argv=None) -> int:
    args = _parse_args(sys.argv[1:] if argv is None else argv)
    try:
        overrides = {}
        for item in args.sets:
            if "=" not in item:
                raise ConfigError(item, "expected KEY=VALUE")
            key, value = item.split("=", 1)
            overrides[key.strip()] = value.strip()
        config_text = args.config.read_text() if args.config is not None else None
        cfg = build_config(
            args.experiment,
            config_text=config_text,
            set_overrides=overrides,
            output_dir=args.out,
            seed=args.seed,
        )
        run(cfg)
    except ConfigError as exc:
        print(f"erspin-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, FitError, FloatingPointError) as exc:
        print(f"erspin-sim: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"erspin-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
