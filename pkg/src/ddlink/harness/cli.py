"""``ddlink`` command line.

Exit codes: 0 success, 2 configuration error, 1 runtime error.  Log
verbosity comes from ``DDLINK_LOG_LEVEL`` (default ``WARNING``).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from ..errors import ConfigError
from .complexity import count_ops_report
from .config import load_scenario, with_overrides
from .results import emit_csv
from .sweep import run_ber_sweep, run_sensing_trials

log = logging.getLogger("ddlink")

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ddlink", description="OFDM/OTFS link-level simulation with speed-driven switching")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="Monte Carlo BER sweep")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=Path("results"))
    run.add_argument("--seed", type=int)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--noiseless", action="store_true")

    sense = sub.add_parser("sense", help="sensing-only speed accuracy report")
    sense.add_argument("config", type=Path)

    sub.add_parser("complexity", help="instrumented operation counts")
    return parser


def _cmd_run(args) -> int:
    scenario = load_scenario(args.config)
    if args.seed is not None and not 0 <= args.seed < 2**64:
        raise ConfigError("seed must fit in 64 bits", field="--seed")
    if args.workers < 1:
        raise ConfigError("must be >= 1", field="--workers")
    scenario = with_overrides(scenario, seed=args.seed, noiseless=True if args.noiseless else None)
    table = run_ber_sweep(scenario, workers=args.workers)
    path = emit_csv(table, args.out / f"ber_{scenario.waveform}.csv")
    for row in table.rows:
        print(f"{row.waveform:6s} {row.speed_kmh:7.1f} km/h {row.snr_db:6.1f} dB  ber={row.ber:.3e} ({row.bit_errors}/{row.bits})")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_sense(args) -> int:
    scenario = load_scenario(args.config)
    print(json.dumps(run_sensing_trials(scenario), indent=2))
    return EXIT_OK


def _cmd_complexity(args) -> int:
    report = count_ops_report()
    print(json.dumps(report.as_dict(), indent=2))
    return EXIT_OK


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DDLINK_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "sense": _cmd_sense, "complexity": _cmd_complexity}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.debug("runtime failure", exc_info=True)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
