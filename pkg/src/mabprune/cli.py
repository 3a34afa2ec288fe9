"""Command-line entry point: ``mabprune run | summarize | sample``."""
from __future__ import annotations

import argparse
import sys

from . import experiments as ex
from .model import CASES, InstanceSampler, dumps


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mabprune",
                                     description="Branch-and-bound planning for target monitoring")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment config and write a metrics CSV")
    run.add_argument("--config", required=True, help="key = value experiment file")
    run.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    for key in ex.config_keys:
        run.add_argument(f"--{key}", f"--{key.replace('_', '-')}", dest=f"override_{key}",
                         metavar="VALUE", help=f"override '{key}' from the config file")

    summ = sub.add_parser("summarize", help="aggregate a metrics CSV by the given columns")
    summ.add_argument("--input", required=True)
    summ.add_argument("--group-by", required=True,
                      help="comma-separated columns, e.g. algorithm,horizon")
    summ.add_argument("--output", help="write the summary CSV here instead of stdout")
    summ.add_argument("--pairs", metavar="ALG_A,ALG_B",
                      help="instead of a summary, emit per-instance node-count pairs")

    samp = sub.add_parser("sample", help="print one sampled instance in key = value form")
    samp.add_argument("--case", required=True, choices=CASES)
    samp.add_argument("--index", required=True, type=int)
    samp.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_run(args) -> int:
    cfg = ex.ExperimentConfig.load(args.config)
    overrides = {k: getattr(args, f"override_{k}") for k in ex.config_keys
                 if getattr(args, f"override_{k}") is not None}
    if overrides:
        cfg = cfg.with_overrides(overrides)
    if args.jobs < 1:
        raise ex.ConfigError("--jobs must be at least 1")
    rows = ex.run(cfg, jobs=args.jobs)
    print(f"wrote {len(rows)} rows to {cfg.output_path}", file=sys.stderr)
    return 0


def _cmd_summarize(args) -> int:
    rows = ex.read_csv(args.input)
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        if args.pairs:
            first, second = (s.strip() for s in args.pairs.split(","))
            out.write(f"instance_index,horizon,nodes_{first},nodes_{second}\n")
            for i, h, a, b in ex.node_pairs(rows, first, second):
                out.write(f"{i},{h},{a},{b}\n")
        else:
            group_by = tuple(g.strip() for g in args.group_by.split(",") if g.strip())
            ex.write_summary(ex.summarize(rows, group_by), group_by, out)
    finally:
        if args.output:
            out.close()
    for line in ex.crossover_report(rows):
        print(line, file=sys.stderr)
    return 0


def _cmd_sample(args) -> int:
    model, belief = InstanceSampler(args.seed, args.case).sample(args.index)
    sys.stdout.write(dumps(model, belief))
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "summarize": _cmd_summarize, "sample": _cmd_sample}[args.command]
    try:
        return handler(args)
    except (ValueError, OSError) as exc:
        print(f"mabprune {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
