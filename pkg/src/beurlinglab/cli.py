"""Command line entry point: ``beurlinglab <command> --config <path> [--out <dir>] [--seed <int>] [--curves]``."""

import argparse
import json
import sys

from .harness import COMMANDS, curves_csv, run_batch, run_files, to_json


def build_parser():
    p = argparse.ArgumentParser(prog="beurlinglab",
                                description="Run one dilation or cocycle experiment.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="JSON config file")
    p.add_argument("--out", help="directory for report.json, curves.csv and timing.json")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--curves", action="store_true", help="also emit curve tables")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2

    if isinstance(cfg, list):
        if not args.out:
            print("error: batch configs need --out", file=sys.stderr)
            return 2
        cfgs = []
        for c in cfg:
            c = dict(c, command=c.get("command", args.command))
            if args.seed is not None:
                c["seed"] = args.seed
            cfgs.append(c)
        return max(run_batch(cfgs, args.out, args.curves), default=0)

    if not isinstance(cfg, dict):
        print("error: config must be a JSON object", file=sys.stderr)
        return 2
    if cfg.get("command", args.command) != args.command:
        print(f"error: config command {cfg['command']!r} does not match {args.command!r}",
              file=sys.stderr)
        return 2
    cfg["command"] = args.command
    if args.seed is not None:
        cfg["seed"] = args.seed

    report, status, elapsed = run_files(cfg, args.out, args.curves)
    if args.out is None:
        sys.stdout.write(to_json(report))
        if args.curves:
            sys.stdout.write(curves_csv(report["curves"]))
    if status == 2:
        print(f"error: {report.get('error')}", file=sys.stderr)
    print(f"{args.command}: {report['status']} ({elapsed:.2f} s)", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
