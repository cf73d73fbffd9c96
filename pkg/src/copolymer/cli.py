"""Command-line entry point.

    copolab <subcommand> --config cfg.json [--seed N] [--out DIR]
            [--threads N] [--fast]

Exit codes: 0 success, 1 config error, 2 invariant/acceptance failure,
3 resource limit.  All state flows through the config file and flags.
"""

from __future__ import annotations

import argparse
import sys

from .config import ConfigError, load_config
from .experiments import (InvariantFailure, cmd_collapse, cmd_free_energy,
                          cmd_hc_curve, cmd_pipeline_chain,
                          cmd_regenset_sample, cmd_rn_check)
from .models import HorizonError
from .validate import run_validation

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_INVARIANT = 2
EXIT_RESOURCE = 3

_COMMANDS = {
    "free-energy": cmd_free_energy,
    "hc-curve": cmd_hc_curve,
    "collapse": cmd_collapse,
    "pipeline-chain": cmd_pipeline_chain,
    "regenset-sample": cmd_regenset_sample,
    "rn-check": cmd_rn_check,
}


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="copolab",
        description="Disordered-copolymer simulation and verification lab")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in [*_COMMANDS, "validate"]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=(name != "validate"),
                       help="path to the JSON run configuration")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed (u64)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--threads", type=int, default=1,
                       help="worker threads for replica batches")
        p.add_argument("--fast", action="store_true",
                       help="validate: run the quick deterministic subset")
    return ap


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            seed = args.seed if args.seed is not None else 0
            config = {}
            out = args.out or "results"
            if args.config:
                cfg = load_config(args.config, seed_override=args.seed,
                                  out_override=args.out)
                seed, config, out = cfg.seed, cfg.raw, cfg.out
            rec, ok = run_validation(seed, fast=args.fast, config=config)
            path = rec.write(out)
            print(f"wrote {path}")
            for row in rec.rows:
                print(f"  {row[0]:28s} {row[1]}")
            return EXIT_OK if ok else EXIT_INVARIANT

        cfg = load_config(args.config, seed_override=args.seed,
                          out_override=args.out)
        if cfg.experiment != args.command:
            print(f"{args.config}: experiment.name is {cfg.experiment!r}, "
                  f"but the {args.command!r} subcommand was invoked",
                  file=sys.stderr)
            return EXIT_CONFIG
        rec = _COMMANDS[args.command](cfg, threads=max(1, args.threads))
        path = rec.write(cfg.out)
        print(f"wrote {path} ({len(rec.rows)} rows, "
              f"{rec.wall_time:.1f}s)")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error:\n{exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantFailure as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (HorizonError, MemoryError) as exc:
        print(f"resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
