"""``airbeam`` command line."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from ..config import ConfigError
from .config_io import KINDS, load_config
from .csv_io import format_csv, write_csv
from .experiment import TrialError, run_experiment

log = logging.getLogger("airbeam.harness")


def _u64(s: str) -> int:
    v = int(s)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="airbeam", description="Active-RIS over-the-air beamforming simulator")
    sub = p.add_subparsers(dest="command", required=True)
    for name in (*KINDS, "validate"):
        sp = sub.add_parser(name, help="check a config file" if name == "validate" else f"run a {name} sweep")
        sp.add_argument("--config", required=True, help="experiment file (key = value lines)")
        sp.add_argument("--seed", type=_u64, help="override mc.seed")
        sp.add_argument("--trials", type=_positive, help="override mc.trials")
        if name != "validate":
            sp.add_argument("--out", help="CSV path (default: stdout)")
            sp.add_argument("--workers", type=_positive, default=1, help="worker processes")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                        format="%(asctime)s level=%(levelname)s %(message)s")
    kind = None if args.command == "validate" else args.command
    try:
        spec = load_config(args.config, kind=kind, output_path=getattr(args, "out", None))
        changes = {}
        if args.seed is not None:
            changes["seed"] = args.seed
        if args.trials is not None:
            changes["trials"] = args.trials
        if changes:
            spec = replace(spec, base=spec.base.with_(**changes))
        if args.command == "validate":
            log.info("valid kind=%s sweep=%s points=%d", spec.kind, spec.sweep.variable,
                     len(spec.sweep.values))
            return 0
        rows = run_experiment(spec, workers=args.workers)
        if spec.output_path:
            write_csv(rows, spec.output_path)
            log.info("wrote path=%s rows=%d", spec.output_path, len(rows))
        else:
            sys.stdout.write(format_csv(rows))
    except (ConfigError, TrialError, OSError) as exc:
        log.error("%s", exc)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
